use rand::Rng;

use crate::error::{Error, Result};
use crate::math::sample_beta;

/// Explicit membership vectors, one per node, each with one entry per slot
/// (so a trailing remainder entry in hdp mode).
#[derive(Clone, Debug, PartialEq)]
pub struct PiState {
    pi: Vec<Vec<f64>>,
}

impl PiState {
    pub fn new(pi: Vec<Vec<f64>>) -> Result<Self> {
        let state = Self { pi };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        let width = self.pi.first().map_or(0, Vec::len);
        for (i, row) in self.pi.iter().enumerate() {
            if row.len() != width || row.is_empty() {
                return Err(Error::consistency(format!("membership row {i} has length {}", row.len())));
            }
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::consistency(format!("membership row {i} is not a simplex: {row:?}")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::consistency(format!("membership row {i} sums to {total}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.pi[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.pi
    }

    pub(crate) fn set_row(&mut self, i: usize, row: Vec<f64>) {
        self.pi[i] = row;
    }

    pub(crate) fn swap(&mut self, a: usize, b: usize) {
        for row in &mut self.pi {
            row.swap(a, b);
        }
    }

    /// Fold community `c` into each node's remainder entry.
    pub(crate) fn absorb(&mut self, c: usize) {
        for row in &mut self.pi {
            let w = row.remove(c);
            *row.last_mut().expect("remainder present") += w;
        }
    }

    /// Break a new community off each node's remainder. Under `π_i ~ DP(αβ)`
    /// the split of the remainder between the new community and what is left
    /// is `Beta(αβ_new, αβ_rest)`. The node `picked`, whose own draw chose the
    /// new community, gets the size-biased `Beta(αβ_new + 1, αβ_rest)`.
    pub(crate) fn split<R: Rng + ?Sized>(
        &mut self,
        alpha: f64,
        beta_new: f64,
        beta_rest: f64,
        picked: Option<usize>,
        rng: &mut R,
    ) -> Result<()> {
        for (i, row) in self.pi.iter_mut().enumerate() {
            let last = row.len() - 1;
            let rest = row[last];
            let bias = if picked == Some(i) { 1.0 } else { 0.0 };
            let fresh = if beta_rest <= 0.0 {
                rest
            } else if beta_new <= 0.0 && bias == 0.0 {
                0.0
            } else {
                rest * sample_beta(alpha * beta_new + bias, alpha * beta_rest, rng)?
            };
            row[last] = rest - fresh;
            row.insert(last, fresh);
        }
        Ok(())
    }
}

/// Copula coordinates `(u, v)` for every training pair.
#[derive(Clone, Debug, PartialEq)]
pub struct UvState {
    pub(crate) u: Vec<f64>,
    pub(crate) v: Vec<f64>,
}

impl UvState {
    pub fn new(coords: Vec<(f64, f64)>) -> Result<Self> {
        if let Some((u, v)) = coords.iter().find(|(u, v)| !(*u > 0.0 && *u < 1.0 && *v > 0.0 && *v < 1.0)) {
            return Err(Error::consistency(format!("copula coordinates ({u}, {v}) outside the open square")));
        }
        let (u, v) = coords.into_iter().unzip();
        Ok(Self { u, v })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn get(&self, p: usize) -> (f64, f64) {
        (self.u[p], self.v[p])
    }
}
