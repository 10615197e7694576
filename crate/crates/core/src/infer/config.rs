use serde::{Deserialize, Serialize};

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::model::{CommunityMode, Hyperparams};

/// Which latent block the sampler keeps explicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Membership vectors explicit, copula coordinates integrated out.
    Pi,
    /// Copula coordinates explicit, membership vectors integrated out.
    Uv,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Pi => "pi",
            Variant::Uv => "uv",
        })
    }
}

/// Everything a single chain needs besides the data.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub variant: Variant,
    pub mode: CommunityMode,
    /// `K` in finite mode, the initial `K` in hdp mode.
    pub communities: usize,
    pub hyper: Hyperparams,
    /// One copula per subgroup; entry `d − 1` serves label `d`.
    pub copulas: Vec<Copula>,
    pub iterations: usize,
    pub burn_in_fraction: f64,
    pub seed: u64,
    /// Metropolis steps on each copula parameter per sweep.
    pub theta_steps: usize,
    /// Label-exchange proposals per sweep (π variant only). Community order
    /// matters under a copula, so without these a chain keeps the order it
    /// started with.
    pub label_swaps: usize,
    /// Leading sweeps during which copula parameters stay at their initial
    /// values; must end within burn-in.
    pub theta_warmup: usize,
}

impl ChainConfig {
    pub fn new(variant: Variant, mode: CommunityMode, communities: usize, copulas: Vec<Copula>) -> Self {
        Self {
            variant,
            mode,
            communities,
            hyper: Hyperparams::default(),
            copulas,
            iterations: 1000,
            burn_in_fraction: 0.5,
            seed: 0,
            theta_steps: 3,
            label_swaps: 2,
            theta_warmup: 0,
        }
    }

    /// Number of leading sweeps discarded before predictions accumulate.
    pub fn burn_in(&self) -> usize {
        (self.iterations as f64 * self.burn_in_fraction).floor() as usize
    }

    pub fn validate(&self, subgroups: usize) -> Result<()> {
        if self.iterations < 2 {
            return Err(Error::config(format!("iterations must be at least 2, got {}", self.iterations)));
        }
        if !(self.burn_in_fraction > 0.0 && self.burn_in_fraction < 1.0) {
            return Err(Error::config(format!(
                "burn_in_fraction must lie in (0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        if self.theta_warmup > self.burn_in() {
            return Err(Error::config(format!(
                "theta_warmup ({}) must not exceed the burn-in of {} sweeps",
                self.theta_warmup,
                self.burn_in()
            )));
        }
        if self.mode == CommunityMode::Finite && self.communities == 0 {
            return Err(Error::config("finite mode needs at least one community"));
        }
        if self.copulas.len() != subgroups {
            return Err(Error::config(format!(
                "the subgroup map declares {subgroups} copula subgroups but {} copulas are configured",
                self.copulas.len()
            )));
        }
        self.hyper.validate()?;
        for copula in &self.copulas {
            copula.validate()?;
        }
        Ok(())
    }
}
