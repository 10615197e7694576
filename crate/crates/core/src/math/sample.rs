use std::f64::consts::PI;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Uniform draw on the open interval `(0, 1)`.
pub fn sample_uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

pub fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Unit-rate exponential.
pub fn sample_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -sample_uniform_open(rng).ln()
}

/// `ln X` for `X ~ Gamma(shape, 1)`.
///
/// Marsaglia–Tsang squeeze; shapes below one are boosted through
/// `X = Y · U^(1/shape)` with `Y ~ Gamma(shape + 1)`, which is where working in
/// log space matters: `U^(1/shape)` underflows for small shapes.
pub fn sample_ln_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    if !(shape.is_finite() && shape > 0.0) {
        return Err(Error::domain(format!("gamma shape must be positive, got {shape}")));
    }
    Ok(ln_gamma_draw(shape, rng))
}

fn ln_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let boosted = ln_gamma_draw(shape + 1.0, rng);
        return boosted + sample_uniform_open(rng).ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = sample_standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = sample_uniform_open(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d.ln() + v.ln();
        }
    }
}

/// `X ~ Gamma(shape, 1)`.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    sample_ln_gamma(shape, rng).map(f64::exp)
}

/// `X ~ Beta(a, b)` via a pair of gamma draws.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let la = sample_ln_gamma(a, rng)?;
    let lb = sample_ln_gamma(b, rng)?;
    // X / (X + Y) = 1 / (1 + exp(lb − la))
    Ok(1.0 / (1.0 + (lb - la).exp()))
}

/// Draw from `Dirichlet(weights)`.
///
/// Normalises gamma draws in log space so that tiny concentrations yield tiny
/// (possibly zero) components rather than a NaN simplex.
pub fn sample_dirichlet<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::domain("dirichlet needs at least one weight"));
    }
    let mut logs = Vec::with_capacity(weights.len());
    for &w in weights {
        logs.push(sample_ln_gamma(w, rng)?);
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = out.iter().sum();
    for x in &mut out {
        *x /= total;
    }
    Ok(out)
}

/// Positive stable variable with Laplace transform `E[exp(−tS)] = exp(−t^alpha)`,
/// `0 < alpha ≤ 1`, by Kanter's representation.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("stable index must lie in (0, 1], got {alpha}")));
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    let u = PI * sample_uniform_open(rng);
    let e = sample_exponential(rng);
    let ratio = (1.0 - alpha) / alpha;
    let ln_s = (alpha * u).sin().ln() + ratio * ((1.0 - alpha) * u).sin().ln()
        - u.sin().ln() / alpha
        - ratio * e.ln();
    Ok(ln_s.exp())
}
