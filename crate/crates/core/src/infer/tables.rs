use crate::copula::{settle_mass, CopulaFamily, Copula};
use crate::error::{Error, Result};
use crate::math::reg_inc_beta_unchecked;

/// Cumulative breakpoints `0 = π̂⁰ ≤ π̂¹ ≤ … ≤ π̂^S = 1` of a simplex.
pub(crate) fn breakpoints(pi: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.push(0.0);
    let mut acc = 0.0;
    for &p in &pi[..pi.len() - 1] {
        acc += p;
        out.push(acc.min(1.0));
    }
    out.push(1.0);
}

/// Reusable buffers for table construction.
#[derive(Clone, Debug, Default)]
pub(crate) struct TableScratch {
    pub(crate) cum_i: Vec<f64>,
    pub(crate) cum_j: Vec<f64>,
    grid: Vec<f64>,
}

/// Joint probability of the cell pair `(k, l)` for two memberships coupled
/// by `copula`: the copula mass of the rectangle spanned by their `k`-th and
/// `l`-th stick intervals. Row-major `S × S`.
pub fn pi_rectangle_table(copula: &Copula, pi_i: &[f64], pi_j: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    fill_table(copula, pi_i, pi_j, &mut TableScratch::default(), &mut out)?;
    Ok(out)
}

pub(crate) fn fill_table(
    copula: &Copula,
    pi_i: &[f64],
    pi_j: &[f64],
    scratch: &mut TableScratch,
    out: &mut Vec<f64>,
) -> Result<()> {
    out.clear();
    if copula.family() == CopulaFamily::Independence {
        for &a in pi_i {
            out.extend(pi_j.iter().map(|&b| a * b));
        }
        return Ok(());
    }
    breakpoints(pi_i, &mut scratch.cum_i);
    breakpoints(pi_j, &mut scratch.cum_j);
    copula.cdf_grid(&scratch.cum_i, &scratch.cum_j, &mut scratch.grid);
    let w = pi_j.len() + 1;
    let g = &scratch.grid;
    for k in 0..pi_i.len() {
        for l in 0..pi_j.len() {
            let mass = g[(k + 1) * w + l + 1] + g[k * w + l] - g[(k + 1) * w + l] - g[k * w + l + 1];
            out.push(settle_mass(mass)?);
        }
    }
    Ok(())
}

/// Copula mass of the single cell `(s, r)`.
pub(crate) fn cell_mass(copula: &Copula, cum_i: &[f64], s: usize, cum_j: &[f64], r: usize) -> Result<f64> {
    let (u0, u1, v0, v1) = (cum_i[s], cum_i[s + 1], cum_j[r], cum_j[r + 1]);
    let mass = copula.cdf_unchecked(u1, v1) + copula.cdf_unchecked(u0, v0)
        - copula.cdf_unchecked(u1, v0)
        - copula.cdf_unchecked(u0, v1);
    settle_mass(mass)
}

/// Probability that `u` falls in each stick interval of a membership vector
/// distributed as `Dirichlet(αβ + N)`, with the membership integrated out.
///
/// Entry `k` is `I_u(h^{k−1}, ĥ^{k−1}) − I_u(h^k, ĥ^k)` where `h^k` sums the
/// Dirichlet weights up to `k` and `ĥ^k` the rest. `counts` may be shorter
/// than `beta`; missing entries count as zero.
pub fn uv_interval_prob(u: f64, alpha: f64, beta: &[f64], counts: &[u32]) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::domain(format!("u must lie in [0, 1], got {u}")));
    }
    if counts.len() > beta.len() {
        return Err(Error::consistency(format!(
            "{} counts for {} global weights",
            counts.len(),
            beta.len()
        )));
    }
    let mut out = Vec::new();
    interval_probs(u, alpha, beta, counts, &mut out);
    Ok(out)
}

pub(crate) fn interval_probs(u: f64, alpha: f64, beta: &[f64], counts: &[u32], out: &mut Vec<f64>) {
    let s = beta.len();
    let weight = |d: usize| alpha * beta[d] + counts.get(d).copied().unwrap_or(0) as f64;
    let total: f64 = (0..s).map(weight).sum();
    out.clear();
    let mut below = 1.0;
    let mut h = 0.0;
    for k in 0..s {
        h += weight(k);
        let upper = if k + 1 == s { 0.0 } else { beta_cdf(u, h, total - h) };
        out.push((below - upper).max(0.0));
        below = upper;
    }
}

/// Single entry of [`interval_probs`].
pub(crate) fn interval_prob_at(u: f64, alpha: f64, beta: &[f64], counts: &[u32], k: usize) -> f64 {
    let s = beta.len();
    let weight = |d: usize| alpha * beta[d] + counts.get(d).copied().unwrap_or(0) as f64;
    let total: f64 = (0..s).map(weight).sum();
    let h_hi: f64 = (0..=k).map(weight).sum();
    let h_lo = h_hi - weight(k);
    let lower = if k == 0 { 1.0 } else { beta_cdf(u, h_lo, total - h_lo) };
    let upper = if k + 1 == s { 0.0 } else { beta_cdf(u, h_hi, total - h_hi) };
    (lower - upper).max(0.0)
}

/// `I_u(a, b)` with the degenerate limits `a → 0` (mass at 0) and `b → 0`
/// (mass at 1) handled explicitly.
fn beta_cdf(u: f64, a: f64, b: f64) -> f64 {
    if a <= 0.0 {
        1.0
    } else if b <= 0.0 {
        if u >= 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        reg_inc_beta_unchecked(u, a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independence_gives_outer_product() {
        let pi_i = [0.2, 0.5, 0.3];
        let pi_j = [0.6, 0.1, 0.3];
        let t = pi_rectangle_table(&Copula::independence(), &pi_i, &pi_j).unwrap();
        let g = pi_rectangle_table(&Copula::gumbel(1.0).unwrap(), &pi_i, &pi_j).unwrap();
        for k in 0..3 {
            for l in 0..3 {
                assert!((t[k * 3 + l] - pi_i[k] * pi_j[l]).abs() < 1e-15);
                assert!((g[k * 3 + l] - pi_i[k] * pi_j[l]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gumbel_half_split_diagonal() {
        let c = Copula::gumbel(3.5).unwrap();
        let t = pi_rectangle_table(&c, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        // C(½, ½) = 2^(−2^{1/θ}); the upper-right cell is 1 − 1 + C(½, ½) by symmetry.
        let corner = 2f64.powf(-(2f64.powf(1.0 / 3.5)));
        assert!((t[0] - corner).abs() < 1e-14);
        assert!((t[3] - corner).abs() < 1e-14);
        assert!((t[1] - (0.5 - corner)).abs() < 1e-14);
    }

    #[test]
    fn one_community_interval_split() {
        // K = 1 plus a remainder slot.
        let beta = [0.7, 0.3];
        let counts = [4];
        let u = 0.63;
        let p = uv_interval_prob(u, 2.0, &beta, &counts).unwrap();
        let h1 = 2.0 * 0.7 + 4.0;
        let i1 = reg_inc_beta_unchecked(u, h1, 2.0 * 0.3);
        assert!((p[0] - (1.0 - i1)).abs() < 1e-15);
        assert!((p[1] - i1).abs() < 1e-15);
        for k in 0..2 {
            assert_eq!(p[k], interval_prob_at(u, 2.0, &beta, &counts, k));
        }
    }

    #[test]
    fn interval_probs_sum_to_one() {
        let beta = [0.1, 0.25, 0.4, 0.25];
        let counts = [3, 0, 11];
        for u in [0.0, 1e-9, 0.2, 0.5, 0.93, 1.0] {
            let p = uv_interval_prob(u, 1.3, &beta, &counts).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9, "u = {u}");
        }
        assert!(uv_interval_prob(0.5, 1.0, &[1.0], &[1, 2]).is_err());
    }
}
