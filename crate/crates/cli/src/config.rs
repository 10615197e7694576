//! TOML run configuration for `fit` and `eval`.

use std::path::{Path, PathBuf};

use cmmsb::copula::Copula;
use cmmsb::infer::{ChainConfig, Variant};
use cmmsb::model::{CommunityMode, Hyperparams, InteractionMatrix, SubgroupMap};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::formats::{read_dataset, read_subgroups, read_text, sha256_hex};

/// Environment variable overriding the worker count of `eval`.
pub const WORKERS_ENV: &str = "CMMSB_WORKERS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset file, relative to the config file.
    pub dataset: PathBuf,
    /// Subgroup file. Without one, pairs are independent when no copula is
    /// listed and all share the copula when exactly one is.
    #[serde(default)]
    pub subgroups: Option<PathBuf>,
    pub variant: Variant,
    pub mode: CommunityMode,
    pub communities: usize,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub lambda1: f64,
    #[serde(default = "one")]
    pub lambda2: f64,
    #[serde(default)]
    pub copulas: Vec<Copula>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "half")]
    pub burn_in_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Output directory, relative to the config file.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_theta_steps")]
    pub theta_steps: usize,
    #[serde(default = "default_label_swaps")]
    pub label_swaps: usize,
    #[serde(default)]
    pub theta_warmup: usize,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn default_iterations() -> usize {
    1000
}
fn default_folds() -> usize {
    10
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_theta_steps() -> usize {
    3
}
fn default_label_swaps() -> usize {
    2
}

impl RunConfig {
    pub fn parse(source: &str, text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("{source}: {e}")))
    }

    /// Chain settings, with `seed` replacing the configured one.
    pub fn chain_config(&self, seed: u64) -> ChainConfig {
        ChainConfig {
            hyper: Hyperparams { alpha: self.alpha, gamma: self.gamma, lambda1: self.lambda1, lambda2: self.lambda2 },
            iterations: self.iterations,
            burn_in_fraction: self.burn_in_fraction,
            seed,
            theta_steps: self.theta_steps,
            label_swaps: self.label_swaps,
            theta_warmup: self.theta_warmup,
            ..ChainConfig::new(self.variant, self.mode, self.communities, self.copulas.clone())
        }
    }

    /// Worker threads for `eval`: the environment override, then the
    /// config, then one per fold.
    pub fn workers(&self) -> CliResult<usize> {
        match std::env::var(WORKERS_ENV) {
            Ok(raw) => match raw.trim().parse::<usize>() {
                Ok(w) if w > 0 => Ok(w),
                _ => Err(CliError::config(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`"))),
            },
            Err(_) => match self.workers {
                Some(0) => Err(CliError::config("workers must be positive")),
                Some(w) => Ok(w),
                None => Ok(self.folds.max(1)),
            },
        }
    }
}

/// A parsed config together with where it came from.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub run: RunConfig,
    /// Directory relative paths are resolved against.
    pub base: PathBuf,
    /// SHA-256 of the config file bytes.
    pub sha256: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_text(path)?;
        let run = RunConfig::parse(&path.display().to_string(), &text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { run, base, sha256: sha256_hex(text.as_bytes()) })
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base.join(path)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.run.out)
    }

    /// Dataset and subgroup map, checked against the chain settings.
    pub fn inputs(&self) -> CliResult<(InteractionMatrix, SubgroupMap)> {
        let data = read_dataset(&self.resolve(&self.run.dataset))?;
        let n = data.n();
        let groups = match &self.run.subgroups {
            Some(path) => read_subgroups(&self.resolve(path), n)?,
            None => match self.run.copulas.len() {
                0 => SubgroupMap::independent(n),
                1 => SubgroupMap::full(n),
                k => {
                    return Err(CliError::config(format!(
                        "{k} copulas are listed but no subgroup file says which pairs use which"
                    )))
                }
            },
        };
        self.run.chain_config(self.run.seed).validate(groups.groups())?;
        Ok((data, groups))
    }
}
