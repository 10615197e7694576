//! Synthetic networks drawn from the generative process with fixed,
//! group-level membership vectors.

use serde::{Deserialize, Serialize};

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::math::{sample_uniform_open, RngStream};
use crate::model::{stick_invert, InteractionMatrix, SubgroupMap};

/// How ordered pairs are assigned to copula subgroups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupRule {
    /// Every pair in subgroup 1.
    Full,
    /// Pairs inside the first `block_size` nodes in subgroup 1, the rest in 2.
    FirstBlock,
    /// Every pair independent.
    None,
}

impl SubgroupRule {
    fn copula_count(self) -> usize {
        match self {
            SubgroupRule::Full => 1,
            SubgroupRule::FirstBlock => 2,
            SubgroupRule::None => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n: usize,
    /// Consecutive node groups; node `i` belongs to the group whose range holds it.
    pub group_sizes: Vec<usize>,
    /// One membership vector over `K` communities per group.
    pub group_membership: Vec<Vec<f64>>,
    /// `K × K` link probability per community pair.
    pub compat: Vec<Vec<f64>>,
    pub subgroup_rule: SubgroupRule,
    #[serde(default = "default_block")]
    pub block_size: usize,
    #[serde(default)]
    pub copulas: Vec<Copula>,
    #[serde(default)]
    pub seed: u64,
}

fn default_block() -> usize {
    20
}

/// Latent variables behind a generated network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub n: usize,
    pub group_of_node: Vec<usize>,
    pub memberships: Vec<Vec<f64>>,
    pub compat: Vec<Vec<f64>>,
    pub copulas: Vec<Copula>,
    /// Per ordered pair `(i, j, s, r, u, v, e)`, row-major, diagonal skipped.
    pub pairs: Vec<TruePair>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruePair {
    pub i: usize,
    pub j: usize,
    pub s: usize,
    pub r: usize,
    pub u: f64,
    pub v: f64,
    pub e: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synthetic {
    pub data: InteractionMatrix,
    pub subgroups: SubgroupMap,
    pub truth: GroundTruth,
}

const FIG2_MEMBERSHIP: [[f64; 4]; 4] =
    [[0.9, 0.1, 0.0, 0.0], [0.0, 0.9, 0.1, 0.0], [0.1, 0.05, 0.85, 0.0], [0.1, 0.05, 0.05, 0.8]];
const FIG3_COMPAT: [[f64; 4]; 4] =
    [[0.95, 0.05, 0.0, 0.0], [0.05, 0.95, 0.05, 0.0], [0.05, 0.0, 0.95, 0.0], [0.0, 0.05, 0.0, 0.95]];

impl SynthConfig {
    fn benchmark(rule: SubgroupRule, copulas: Vec<Copula>, seed: u64) -> Self {
        Self {
            n: 50,
            group_sizes: vec![20, 13, 9, 8],
            group_membership: FIG2_MEMBERSHIP.iter().map(|r| r.to_vec()).collect(),
            compat: FIG3_COMPAT.iter().map(|r| r.to_vec()).collect(),
            subgroup_rule: rule,
            block_size: 20,
            copulas,
            seed,
        }
    }

    /// 50 nodes in groups of 20, 13, 9 and 8; one Gumbel copula with
    /// `θ = 3.5` over every pair.
    pub fn benchmark_full(seed: u64) -> Self {
        Self::benchmark(SubgroupRule::Full, vec![Copula::gumbel(3.5).expect("valid")], seed)
    }

    /// The same network with `θ = 3.5` only among the first 20 nodes and an
    /// independent (`θ = 1`) Gumbel copula on every other pair.
    pub fn benchmark_partial(seed: u64) -> Self {
        Self::benchmark(
            SubgroupRule::FirstBlock,
            vec![Copula::gumbel(3.5).expect("valid"), Copula::gumbel(1.0).expect("valid")],
            seed,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let total: usize = self.group_sizes.iter().sum();
        if total != self.n {
            return Err(Error::config(format!("group_sizes sum to {total}, expected n = {}", self.n)));
        }
        if self.group_membership.len() != self.group_sizes.len() {
            return Err(Error::config(format!(
                "{} membership rows for {} groups",
                self.group_membership.len(),
                self.group_sizes.len()
            )));
        }
        let k = self.compat.len();
        if k == 0 || self.compat.iter().any(|row| row.len() != k) {
            return Err(Error::config("compat must be a non-empty square matrix"));
        }
        if self.compat.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::config("compat entries must lie in [0, 1]"));
        }
        for (g, row) in self.group_membership.iter().enumerate() {
            if row.len() != k {
                return Err(Error::config(format!("membership row {g} has {} entries, expected {k}", row.len())));
            }
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::config(format!("membership row {g} is not a probability vector")));
            }
        }
        if self.copulas.len() != self.subgroup_rule.copula_count() {
            return Err(Error::config(format!(
                "subgroup rule {:?} needs {} copulas, got {}",
                self.subgroup_rule,
                self.subgroup_rule.copula_count(),
                self.copulas.len()
            )));
        }
        for c in &self.copulas {
            c.validate()?;
        }
        Ok(())
    }

    pub fn subgroup_map(&self) -> Result<SubgroupMap> {
        match self.subgroup_rule {
            SubgroupRule::Full => Ok(SubgroupMap::full(self.n)),
            SubgroupRule::FirstBlock => SubgroupMap::block(self.n, self.block_size, 1, 2),
            SubgroupRule::None => Ok(SubgroupMap::independent(self.n)),
        }
    }
}

/// Draw one network: per ordered pair, copula coordinates (or independent
/// uniforms), indicators by stick inversion, then a Bernoulli link.
pub fn generate(settings: &SynthConfig) -> Result<Synthetic> {
    settings.validate()?;
    let n = settings.n;
    let subgroups = settings.subgroup_map()?;
    let group_of_node: Vec<usize> =
        settings.group_sizes.iter().enumerate().flat_map(|(g, &size)| std::iter::repeat_n(g, size)).collect();
    let memberships: Vec<Vec<f64>> = group_of_node.iter().map(|&g| settings.group_membership[g].clone()).collect();
    let mut rng = RngStream::new(settings.seed);
    let independence = Copula::independence();
    let mut data = InteractionMatrix::new(n);
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = subgroups.get(i, j);
            let copula = if d == 0 { &independence } else { &settings.copulas[d - 1] };
            let (u, v) = copula.sample_pair(&mut rng);
            let s = stick_invert(&memberships[i], u);
            let r = stick_invert(&memberships[j], v);
            let e = sample_uniform_open(&mut rng) < settings.compat[s][r];
            data.set(i, j, e)?;
            pairs.push(TruePair { i, j, s, r, u, v, e });
        }
    }
    let truth = GroundTruth {
        n,
        group_of_node,
        memberships,
        compat: settings.compat.clone(),
        copulas: settings.copulas.clone(),
        pairs,
    };
    Ok(Synthetic { data, subgroups, truth })
}
