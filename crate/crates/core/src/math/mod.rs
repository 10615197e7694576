//! Special functions and seeded samplers shared by every other module.
//!
//! Everything here is pure given an explicit [`RngStream`], so concurrent
//! chains can each own a private stream.

mod normal;
mod rng;
mod sample;
mod special;

pub use normal::{bivariate_normal_cdf, normal_cdf, normal_quantile};
pub use rng::RngStream;
pub use sample::{
    sample_beta, sample_dirichlet, sample_exponential, sample_gamma, sample_ln_gamma,
    sample_positive_stable, sample_standard_normal, sample_uniform_open,
};
pub use special::{ln_beta, ln_gamma, reg_inc_beta};

pub(crate) use special::{ln_beta_unchecked, ln_gamma_unchecked, reg_inc_beta_unchecked};

/// `ln(Σ exp(x_i))` without overflow. Returns `-inf` for an empty or all `-inf` slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
