use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{sample_beta, sample_dirichlet};

/// How the number of communities is handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommunityMode {
    /// Fixed `K`, symmetric Dirichlet prior on the global weights.
    #[serde(rename = "finiteK")]
    Finite,
    /// Unbounded `K` under a stick-breaking prior; an extra remainder slot
    /// stands for every community not yet instantiated.
    #[serde(rename = "hdp")]
    Hdp,
}

/// Global community weights `β`.
///
/// In hdp mode the last entry is the remainder mass of all uninstantiated
/// communities, so the vector has `K + 1` entries. In finite mode it has
/// exactly `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalWeights {
    beta: Vec<f64>,
    gamma: f64,
    mode: CommunityMode,
}

impl GlobalWeights {
    pub fn new(beta: Vec<f64>, gamma: f64, mode: CommunityMode) -> Result<Self> {
        let w = Self { beta, gamma, mode };
        w.validate()?;
        Ok(w)
    }

    /// Draw from the prior: `Dirichlet(γ, …, γ)` over `k` entries in finite
    /// mode, `k` stick-breaking pieces plus their remainder in hdp mode.
    pub fn sample_prior<R: Rng + ?Sized>(
        k: usize,
        gamma: f64,
        mode: CommunityMode,
        rng: &mut R,
    ) -> Result<Self> {
        let beta = match mode {
            CommunityMode::Finite => {
                if k == 0 {
                    return Err(Error::config("finite mode needs at least one community"));
                }
                sample_dirichlet(&vec![gamma; k], rng)?
            }
            CommunityMode::Hdp => {
                let mut beta = Vec::with_capacity(k + 1);
                let mut rest = 1.0;
                for _ in 0..k {
                    let b = sample_beta(1.0, gamma, rng)?;
                    beta.push(rest * b);
                    rest *= 1.0 - b;
                }
                beta.push(rest);
                beta
            }
        };
        Self::new(beta, gamma, mode)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.beta.is_empty() {
            return Err(Error::consistency("global weights are empty"));
        }
        if self.beta.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::consistency(format!("global weights not a simplex: {:?}", self.beta)));
        }
        let total: f64 = self.beta.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::consistency(format!("global weights sum to {total}")));
        }
        Ok(())
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mode(&self) -> CommunityMode {
        self.mode
    }

    /// Number of instantiated communities.
    pub fn active(&self) -> usize {
        match self.mode {
            CommunityMode::Finite => self.beta.len(),
            CommunityMode::Hdp => self.beta.len() - 1,
        }
    }

    /// Replace all weights, e.g. after a conditional draw.
    pub fn set(&mut self, beta: Vec<f64>) -> Result<()> {
        if beta.len() != self.beta.len() {
            return Err(Error::consistency(format!(
                "weight vector length {} does not match {}",
                beta.len(),
                self.beta.len()
            )));
        }
        self.beta = beta;
        self.validate()
    }

    /// Break a `Beta(1, γ)` piece off the remainder as a new community,
    /// placed just before the remainder. Returns the new weight.
    pub fn split_remainder<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        if self.mode != CommunityMode::Hdp {
            return Err(Error::consistency("finite weights have no remainder to split"));
        }
        let b = sample_beta(1.0, self.gamma, rng)?;
        let last = self.beta.len() - 1;
        let rest = self.beta[last];
        let fresh = rest * b;
        self.beta[last] = rest - fresh;
        self.beta.insert(last, fresh);
        Ok(fresh)
    }

    /// Exchange two instantiated communities; the remainder cannot move.
    pub fn swap(&mut self, a: usize, b: usize) -> Result<()> {
        let k = self.active();
        if a >= k || b >= k {
            return Err(Error::consistency(format!("cannot swap communities {a} and {b} of {k}")));
        }
        self.beta.swap(a, b);
        Ok(())
    }

    /// Fold community `c` back into the remainder.
    pub fn absorb(&mut self, c: usize) -> Result<()> {
        if self.mode != CommunityMode::Hdp || c + 1 >= self.beta.len() {
            return Err(Error::consistency(format!("cannot absorb community {c}")));
        }
        let w = self.beta.remove(c);
        *self.beta.last_mut().expect("remainder present") += w;
        Ok(())
    }
}
