//! Plain-text dataset and subgroup files, prediction tables and the
//! provenance stamp carried by every output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cmmsb::model::{InteractionMatrix, SubgroupMap};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Hash of the run configuration plus the seed actually used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_sha256: impl Into<String>, seed: u64) -> Self {
        Self { config_sha256: config_sha256.into(), seed }
    }

    /// Comment line heading text and CSV outputs.
    pub fn comment_line(&self) -> String {
        format!("# config_sha256={} seed={}", self.config_sha256, self.seed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((k + 1, line))
    })
}

fn parse_field<T: std::str::FromStr>(source: &str, line: usize, field: &str, raw: &str) -> CliResult<T> {
    raw.parse().map_err(|_| CliError::config(format!("{source}:{line}: invalid {field} `{raw}`")))
}

/// Parse a dataset: a header `n <N> directed|symmetric` followed by one
/// `i j e` line per observed ordered pair, `e` being 0 or 1. Symmetric
/// files list each unordered pair once and are mirrored on load.
pub fn parse_dataset(source: &str, text: &str) -> CliResult<InteractionMatrix> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| CliError::config(format!("{source}: empty dataset")))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, symmetric) = match fields.as_slice() {
        ["n", n, kind] => {
            let n: usize = parse_field(source, line, "node count", n)?;
            let symmetric = match *kind {
                "directed" => false,
                "symmetric" => true,
                other => {
                    return Err(CliError::config(format!(
                        "{source}:{line}: expected `directed` or `symmetric`, got `{other}`"
                    )))
                }
            };
            (n, symmetric)
        }
        _ => {
            return Err(CliError::config(format!(
                "{source}:{line}: header must read `n <nodes> directed|symmetric`"
            )))
        }
    };
    if n < 2 {
        return Err(CliError::config(format!("{source}:{line}: need at least two nodes, got {n}")));
    }
    let mut data = InteractionMatrix::new(n);
    for (line, body) in lines {
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [i, j, e] = fields.as_slice() else {
            return Err(CliError::config(format!("{source}:{line}: expected `i j e`, got `{body}`")));
        };
        let i: usize = parse_field(source, line, "source node", i)?;
        let j: usize = parse_field(source, line, "target node", j)?;
        let e = match *e {
            "0" => false,
            "1" => true,
            other => return Err(CliError::config(format!("{source}:{line}: link value must be 0 or 1, got `{other}`"))),
        };
        if i >= n || j >= n {
            return Err(CliError::config(format!("{source}:{line}: node index out of range for {n} nodes")));
        }
        if i == j {
            return Err(CliError::config(format!("{source}:{line}: self-pair ({i}, {i}) is not allowed")));
        }
        let targets: &[(usize, usize)] = if symmetric { &[(i, j), (j, i)] } else { &[(i, j)] };
        for &(a, b) in targets {
            if let Some(old) = data.get(a, b) {
                if old != e {
                    return Err(CliError::config(format!("{source}:{line}: conflicting values for pair ({a}, {b})")));
                }
            }
            data.set(a, b, e)?;
        }
    }
    Ok(data)
}

pub fn read_dataset(path: &Path) -> CliResult<InteractionMatrix> {
    parse_dataset(&path.display().to_string(), &read_text(path)?)
}

/// Directed dataset text listing every observed entry.
pub fn format_dataset(data: &InteractionMatrix, provenance: &Provenance) -> String {
    let mut out = format!("{}\nn {} directed\n", provenance.comment_line(), data.n());
    for (i, j, e) in data.observed() {
        let _ = writeln!(out, "{i} {j} {}", u8::from(e));
    }
    out
}

/// Parse a subgroup file for `n` nodes. Lines are applied in order, later
/// ones overriding earlier ones:
///
/// * `all d=K` puts every off-diagonal pair in subgroup `K`;
/// * `block A..B d=K [rest d=M]` puts pairs with both ends in `A..=B` in `K`
///   and every other pair in `M` (0 when omitted);
/// * `i j d` sets one ordered pair.
///
/// Pairs never mentioned stay independent (subgroup 0). The subgroup count
/// is the largest label used.
pub fn parse_subgroups(source: &str, text: &str, n: usize) -> CliResult<SubgroupMap> {
    let mut labels = vec![0usize; n * n];
    let label = |line: usize, raw: &str| -> CliResult<usize> {
        let value = raw
            .strip_prefix("d=")
            .ok_or_else(|| CliError::config(format!("{source}:{line}: expected `d=<label>`, got `{raw}`")))?;
        parse_field(source, line, "subgroup label", value)
    };
    for (line, body) in content_lines(text) {
        let fields: Vec<&str> = body.split_whitespace().collect();
        match fields.as_slice() {
            ["all", d] => {
                let d = label(line, d)?;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            labels[i * n + j] = d;
                        }
                    }
                }
            }
            ["block", range, d, rest @ ..] => {
                let (lo, hi) = range
                    .split_once("..")
                    .ok_or_else(|| CliError::config(format!("{source}:{line}: expected a range `A..B`, got `{range}`")))?;
                let lo: usize = parse_field(source, line, "range start", lo)?;
                let hi: usize = parse_field(source, line, "range end", hi)?;
                if lo > hi || hi >= n {
                    return Err(CliError::config(format!("{source}:{line}: range {lo}..{hi} invalid for {n} nodes")));
                }
                let inside = label(line, d)?;
                let outside = match rest {
                    [] => 0,
                    ["rest", d] => label(line, d)?,
                    _ => return Err(CliError::config(format!("{source}:{line}: expected `rest d=<label>` after the block"))),
                };
                let within = |x: usize| (lo..=hi).contains(&x);
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            labels[i * n + j] = if within(i) && within(j) { inside } else { outside };
                        }
                    }
                }
            }
            [i, j, d] => {
                let i: usize = parse_field(source, line, "source node", i)?;
                let j: usize = parse_field(source, line, "target node", j)?;
                let d: usize = parse_field(source, line, "subgroup label", d.strip_prefix("d=").unwrap_or(d))?;
                if i >= n || j >= n {
                    return Err(CliError::config(format!("{source}:{line}: node index out of range for {n} nodes")));
                }
                if i == j {
                    return Err(CliError::config(format!("{source}:{line}: self-pair ({i}, {i}) cannot join a subgroup")));
                }
                labels[i * n + j] = d;
            }
            _ => return Err(CliError::config(format!("{source}:{line}: unrecognised subgroup line `{body}`"))),
        }
    }
    let groups = labels.iter().copied().max().unwrap_or(0);
    let mut map = SubgroupMap::new(n, groups)?;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                map.set(i, j, labels[i * n + j])?;
            }
        }
    }
    Ok(map)
}

pub fn read_subgroups(path: &Path, n: usize) -> CliResult<SubgroupMap> {
    parse_subgroups(&path.display().to_string(), &read_text(path)?, n)
}

/// Subgroup file listing every pair outside subgroup 0.
pub fn format_subgroups(map: &SubgroupMap, provenance: &Provenance) -> String {
    let n = map.n();
    let mut out = format!("{}\n", provenance.comment_line());
    for i in 0..n {
        for j in 0..n {
            let d = map.get(i, j);
            if d != 0 {
                let _ = writeln!(out, "{i} {j} {d}");
            }
        }
    }
    out
}

/// Write an `n × n` row-major probability matrix as `i,j,p` rows, one per
/// off-diagonal pair.
pub fn write_predictive(path: &Path, n: usize, values: &[f64], provenance: &Provenance) -> CliResult<()> {
    let mut out = Vec::new();
    out.extend_from_slice(provenance.comment_line().as_bytes());
    out.push(b'\n');
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["i", "j", "p"]).map_err(|e| CliError::io(path, e))?;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    w.serialize((i, j, values[i * n + j])).map_err(|e| CliError::io(path, e))?;
                }
            }
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// Read a table written by [`write_predictive`] back into `(n, matrix)`.
pub fn read_predictive(path: &Path) -> CliResult<(usize, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes.as_slice());
    let mut rows = Vec::new();
    for row in reader.deserialize::<(usize, usize, f64)>() {
        rows.push(row.map_err(|e| CliError::io(path, e))?);
    }
    let n = rows.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
    if n < 2 || rows.len() != n * (n - 1) {
        return Err(CliError::Io(format!("{}: incomplete prediction table", path.display())));
    }
    let mut values = vec![0.0; n * n];
    for (i, j, p) in rows {
        values[i * n + j] = p;
    }
    Ok((n, values))
}

/// Parse a query file of `i j` lines.
pub fn parse_pairs(source: &str, text: &str, n: usize) -> CliResult<Vec<(usize, usize)>> {
    content_lines(text)
        .map(|(line, body)| {
            let fields: Vec<&str> = body.split_whitespace().collect();
            let [i, j] = fields.as_slice() else {
                return Err(CliError::config(format!("{source}:{line}: expected `i j`, got `{body}`")));
            };
            let i: usize = parse_field(source, line, "source node", i)?;
            let j: usize = parse_field(source, line, "target node", j)?;
            if i >= n || j >= n {
                return Err(CliError::config(format!("{source}:{line}: node index out of range for {n} nodes")));
            }
            if i == j {
                return Err(CliError::config(format!("{source}:{line}: self-pair ({i}, {i}) has no prediction")));
            }
            Ok((i, j))
        })
        .collect()
}
