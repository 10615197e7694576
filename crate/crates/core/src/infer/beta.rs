use rand::Rng;

use super::state::PiState;
use crate::error::Result;
use crate::math::{ln_gamma_unchecked, sample_dirichlet, sample_uniform_open};
use crate::model::{CommunityMode, CountState, GlobalWeights};

/// Number of tables occupied by `customers` diners in a Chinese restaurant
/// with the given concentration, drawn by sequential seating.
pub fn antoniak_tables<R: Rng + ?Sized>(customers: u32, concentration: f64, rng: &mut R) -> u32 {
    let mut tables = 0;
    for m in 0..customers {
        if sample_uniform_open(rng) * (concentration + m as f64) < concentration {
            tables += 1;
        }
    }
    tables
}

/// Redraw the global weights from their conditional given the indicator
/// counts, via auxiliary table counts `t_k = Σ_i t_ik`.
///
/// hdp mode draws `Dirichlet(t_1, …, t_K, γ)`; finite mode, whose prior is
/// `Dirichlet(γ, …, γ)`, draws `Dirichlet(γ + t_1, …, γ + t_K)`.
pub fn resample_beta<R: Rng + ?Sized>(
    counts: &CountState,
    weights: &mut GlobalWeights,
    alpha: f64,
    rng: &mut R,
) -> Result<()> {
    let k = counts.k();
    let gamma = weights.gamma();
    let mut t = vec![0.0; weights.beta().len()];
    for i in 0..counts.n() {
        for (c, &n_ik) in counts.node_counts(i).iter().enumerate() {
            if n_ik > 0 {
                t[c] += antoniak_tables(n_ik, alpha * weights.beta()[c], rng) as f64;
            }
        }
    }
    let params: Vec<f64> = match weights.mode() {
        CommunityMode::Finite => t.iter().map(|x| x + gamma).collect(),
        CommunityMode::Hdp => {
            t[k] = gamma;
            t
        }
    };
    // Zero weights are point masses at zero.
    let live: Vec<usize> = (0..params.len()).filter(|&c| params[c] > 0.0).collect();
    let draw = sample_dirichlet(&live.iter().map(|&c| params[c]).collect::<Vec<_>>(), rng)?;
    let mut beta = vec![0.0; params.len()];
    for (c, x) in live.into_iter().zip(draw) {
        beta[c] = x;
    }
    weights.set(beta)
}

/// Metropolis–Hastings moves on finite-mode global weights given explicit
/// memberships, targeting `Dir(β; γ) Π_i Dir(π_i; αβ)`.
///
/// Proposals are `Dirichlet(κβ)` around the current point. Returns the number
/// of accepted moves.
pub fn resample_beta_given_pi<R: Rng + ?Sized>(
    pi: &PiState,
    weights: &mut GlobalWeights,
    alpha: f64,
    steps: usize,
    rng: &mut R,
) -> Result<usize> {
    let k = weights.beta().len();
    let n = pi.n() as f64;
    let gamma = weights.gamma();
    let floor = f64::MIN_POSITIVE.ln();
    let ln_pi_sums: Vec<f64> =
        (0..k).map(|c| pi.rows().iter().map(|row| row[c].ln().max(floor)).sum()).collect();
    let log_target = |b: &[f64]| -> f64 {
        b.iter()
            .zip(&ln_pi_sums)
            .map(|(&bk, &l)| {
                if bk <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (gamma - 1.0) * bk.ln() - n * ln_gamma_unchecked(alpha * bk) + alpha * bk * l
            })
            .sum()
    };
    let kappa = 10.0 * (n * alpha + k as f64 * gamma);
    let ln_q = |to: &[f64], from: &[f64]| -> f64 {
        ln_gamma_unchecked(kappa)
            + from
                .iter()
                .zip(to)
                .map(|(&f, &t)| -ln_gamma_unchecked(kappa * f) + (kappa * f - 1.0) * t.ln().max(floor))
                .sum::<f64>()
    };

    let mut accepted = 0;
    let mut current = weights.beta().to_vec();
    let mut current_lp = log_target(&current);
    for _ in 0..steps {
        let conc: Vec<f64> = current.iter().map(|b| (kappa * b).max(f64::MIN_POSITIVE)).collect();
        let proposal = sample_dirichlet(&conc, rng)?;
        let lp = log_target(&proposal);
        let log_ratio = lp - current_lp + ln_q(&current, &proposal) - ln_q(&proposal, &current);
        if log_ratio.is_finite() && sample_uniform_open(rng).ln() < log_ratio {
            current = proposal;
            current_lp = lp;
            accepted += 1;
        }
    }
    weights.set(current)?;
    Ok(accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::RngStream;
    use crate::model::Pair;

    #[test]
    fn single_customer_opens_one_table() {
        let mut rng = RngStream::new(1);
        for _ in 0..100 {
            assert_eq!(antoniak_tables(1, 0.01, &mut rng), 1);
        }
        assert_eq!(antoniak_tables(0, 3.0, &mut rng), 0);
    }

    #[test]
    fn empty_counts_put_all_mass_on_remainder() {
        let mut rng = RngStream::new(2);
        let pairs = vec![Pair { sender: 0, receiver: 1, link: true, group: 0 }];
        let counts = CountState::new(CommunityMode::Hdp, 0, 2, pairs).unwrap();
        let mut w = GlobalWeights::new(vec![1.0], 1.0, CommunityMode::Hdp).unwrap();
        resample_beta(&counts, &mut w, 1.0, &mut rng).unwrap();
        assert_eq!(w.beta(), &[1.0]);
    }

    #[test]
    fn table_count_mean() {
        // E[tables] = Σ_m c / (c + m).
        let mut rng = RngStream::new(3);
        let (n, c) = (6, 1.7);
        let want: f64 = (0..n).map(|m| c / (c + m as f64)).sum();
        let draws = 100_000;
        let mean = (0..draws).map(|_| antoniak_tables(n, c, &mut rng) as f64).sum::<f64>() / draws as f64;
        assert!((mean - want).abs() < 0.01, "{mean} vs {want}");
    }
}
