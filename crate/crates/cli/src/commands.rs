//! The four subcommands as library functions, so tests can call them
//! without spawning a process.

use std::fs;
use std::path::{Path, PathBuf};

use cmmsb::eval::{cross_validate, make_folds, posterior_predictive, MetricsReport};
use cmmsb::infer::{run_chain, Acceptance, IterationRecord, Variant};
use cmmsb::math::RngStream;
use cmmsb::model::CommunityMode;
use cmmsb::synth::{generate as synthesize, GroundTruth, SynthConfig};
use serde::Serialize;

use crate::config::LoadedConfig;
use crate::error::{CliError, CliResult};
use crate::formats::{
    format_dataset, format_subgroups, parse_pairs, read_predictive, read_text, sha256_hex, write_json,
    write_predictive, write_text, Provenance,
};

/// Built-in synthetic benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// One Gumbel copula with `θ = 3.5` on every pair.
    SyntheticFull,
    /// `θ = 3.5` among the first 20 nodes, independent elsewhere.
    SyntheticPartial,
}

impl Preset {
    pub fn config(self, seed: u64) -> SynthConfig {
        match self {
            Preset::SyntheticFull => SynthConfig::benchmark_full(seed),
            Preset::SyntheticPartial => SynthConfig::benchmark_partial(seed),
        }
    }
}

/// Where synthetic network settings come from.
#[derive(Clone, Debug)]
pub enum SynthSource {
    File(PathBuf),
    Preset(Preset),
}

/// Synthetic network settings and their hash: the file bytes for a file, the JSON
/// encoding of the settings for a preset.
pub fn load_synth_config(source: &SynthSource, seed: Option<u64>) -> CliResult<(SynthConfig, String)> {
    match source {
        SynthSource::File(path) => {
            let text = read_text(path)?;
            let mut settings: SynthConfig =
                toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            if let Some(seed) = seed {
                settings.seed = seed;
            }
            Ok((settings, sha256_hex(text.as_bytes())))
        }
        SynthSource::Preset(preset) => {
            let settings = preset.config(seed.unwrap_or(0));
            let json = serde_json::to_vec(&settings).map_err(|e| CliError::config(e.to_string()))?;
            Ok((settings, sha256_hex(&json)))
        }
    }
}

#[derive(Serialize)]
struct TruthFile<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    settings: &'a SynthConfig,
    truth: &'a GroundTruth,
}

/// `generate`: write `data.txt`, `subgroups.txt` and `truth.json` to `out`.
pub fn generate(source: &SynthSource, seed: Option<u64>, out: &Path) -> CliResult<Provenance> {
    let (settings, hash) = load_synth_config(source, seed)?;
    let synthetic = synthesize(&settings)?;
    let provenance = Provenance::new(hash, settings.seed);
    create_dir(out)?;
    write_text(&out.join("data.txt"), &format_dataset(&synthetic.data, &provenance))?;
    write_text(&out.join("subgroups.txt"), &format_subgroups(&synthetic.subgroups, &provenance))?;
    write_json(
        &out.join("truth.json"),
        &TruthFile { provenance: &provenance, settings: &settings, truth: &synthetic.truth },
    )?;
    Ok(provenance)
}

#[derive(Serialize)]
struct TraceFile<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    variant: Variant,
    mode: CommunityMode,
    iterations: usize,
    burn_in: usize,
    predictive_samples: usize,
    acceptance: &'a Acceptance,
    records: &'a [IterationRecord],
}

/// `fit`: run one chain on the full dataset and write `trace.json` and
/// `predictive.csv`. Returns the output directory.
pub fn fit(config: &LoadedConfig, seed: Option<u64>, out: Option<&Path>) -> CliResult<PathBuf> {
    let (data, groups) = config.inputs()?;
    let seed = seed.unwrap_or(config.run.seed);
    let cfg = config.run.chain_config(seed);
    let trace = run_chain(&data, &groups, &cfg)?;
    let pred = posterior_predictive(&trace)?;
    let provenance = Provenance::new(config.sha256.clone(), seed);
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| config.out_dir());
    create_dir(&out)?;
    write_json(
        &out.join("trace.json"),
        &TraceFile {
            provenance: &provenance,
            variant: cfg.variant,
            mode: cfg.mode,
            iterations: cfg.iterations,
            burn_in: cfg.burn_in(),
            predictive_samples: trace.predictive.samples,
            acceptance: &trace.acceptance,
            records: &trace.records,
        },
    )?;
    write_predictive(&out.join("predictive.csv"), data.n(), &pred, &provenance)?;
    Ok(out)
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    fold_count: usize,
    #[serde(flatten)]
    report: &'a MetricsReport,
}

/// `eval`: k-fold cross-validation, written to `metrics.json`. The file
/// depends only on the config and seed, never on the worker count.
pub fn eval(config: &LoadedConfig, seed: Option<u64>, out: Option<&Path>) -> CliResult<MetricsReport> {
    let (data, groups) = config.inputs()?;
    let seed = seed.unwrap_or(config.run.seed);
    let cfg = config.run.chain_config(seed);
    let split = make_folds(&data, config.run.folds, &mut RngStream::new(seed).fork(0))?;
    let report = cross_validate(&data, &groups, &cfg, &split, config.run.workers()?)?;
    let provenance = Provenance::new(config.sha256.clone(), seed);
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| config.out_dir());
    create_dir(&out)?;
    write_json(
        &out.join("metrics.json"),
        &MetricsFile { provenance: &provenance, fold_count: split.fold_count(), report: &report },
    )?;
    Ok(report)
}

/// Fitted link probabilities for queried pairs, with the provenance line of
/// the fit that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictions {
    pub provenance: Option<String>,
    pub rows: Vec<(usize, usize, f64)>,
}

impl Predictions {
    /// The provenance comment, then one `i j p` line per query.
    pub fn to_text(&self) -> String {
        let mut out: String = self.provenance.iter().map(|line| format!("{line}\n")).collect();
        out.extend(self.rows.iter().map(|(i, j, p)| format!("{i} {j} {p}\n")));
        out
    }
}

/// `predict`: look up the fitted link probability of each queried pair.
pub fn predict(trace_dir: &Path, pairs: &Path) -> CliResult<Predictions> {
    let table = trace_dir.join("predictive.csv");
    let (n, values) = read_predictive(&table)?;
    let provenance = read_text(&table)?.lines().next().filter(|l| l.starts_with('#')).map(str::to_owned);
    let queries = parse_pairs(&pairs.display().to_string(), &read_text(pairs)?, n)?;
    Ok(Predictions { provenance, rows: queries.into_iter().map(|(i, j)| (i, j, values[i * n + j])).collect() })
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}
