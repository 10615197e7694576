//! Exact checks on rectangle tables and interval probabilities.

use cmmsb::copula::Copula;
use cmmsb::infer::{pi_rectangle_table, uv_interval_prob, Chain, ChainConfig, Variant};
use cmmsb::math::{sample_dirichlet, sample_uniform_open, RngStream};
use cmmsb::model::{CommunityMode, InteractionMatrix, SubgroupMap};

use crate::quadrature::tanh_sinh;
use crate::Outcome;

/// Gumbel `θ = 1` on a seeded 10-node instance: tables are outer products and
/// the interval probabilities integrate to the Dirichlet posterior mean.
pub fn independence_reduction() -> Outcome {
    let n = 10;
    let k = 4;
    let mut rng = RngStream::new(101);
    let data = InteractionMatrix::complete(n, |_, _| sample_uniform_open(&mut rng) < 0.3);
    let groups = SubgroupMap::full(n);
    let copula = Copula::gumbel(1.0).unwrap().with_proposal_scale(0.0).unwrap();

    let mut cfg = ChainConfig::new(Variant::Pi, CommunityMode::Finite, k, vec![copula.clone()]);
    cfg.seed = 102;
    let mut chain = Chain::new(&data, &groups, &cfg).unwrap();
    for _ in 0..20 {
        chain.sweep().unwrap();
    }
    let pis = chain.pi().unwrap().clone();
    let mut table_err: f64 = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let (pi_i, pi_j) = (pis.row(i), pis.row(j));
            let table = pi_rectangle_table(&copula, pi_i, pi_j).unwrap();
            for a in 0..k {
                for b in 0..k {
                    table_err = table_err.max((table[a * k + b] - pi_i[a] * pi_j[b]).abs());
                }
            }
        }
    }

    cfg.variant = Variant::Uv;
    let mut chain = Chain::new(&data, &groups, &cfg).unwrap();
    for _ in 0..20 {
        chain.sweep().unwrap();
    }
    let alpha = chain.hyper().alpha;
    let beta = chain.weights().beta().to_vec();
    let mut interval_err: f64 = 0.0;
    for i in 0..n {
        let counts = chain.counts().node_counts(i).to_vec();
        let total: u32 = counts.iter().sum();
        for c in 0..k {
            let integral = tanh_sinh(|u| uv_interval_prob(u, alpha, &beta, &counts).unwrap()[c]);
            let exact = (alpha * beta[c] + counts[c] as f64) / (alpha + total as f64);
            interval_err = interval_err.max((integral - exact).abs());
        }
    }
    Outcome::new(
        table_err <= 1e-10 && interval_err <= 1e-6,
        format!("max table deviation {table_err:.2e} (tol 1e-10), max interval-integral deviation {interval_err:.2e} (tol 1e-6)"),
    )
}

/// Row and column sums of the rectangle table reproduce both memberships.
pub fn margin_preservation() -> Outcome {
    let mut rng = RngStream::new(202);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let k = 2 + trial % 7;
        let pi_i = sample_dirichlet(&vec![1.0; k], &mut rng).unwrap();
        let pi_j = sample_dirichlet(&vec![1.0; k], &mut rng).unwrap();
        let gumbel_theta = 1.0 + 19.0 * sample_uniform_open(&mut rng);
        let rho = 1.98 * sample_uniform_open(&mut rng) - 0.99;
        for copula in [Copula::independence(), Copula::gumbel(gumbel_theta).unwrap(), Copula::gaussian(rho).unwrap()] {
            let table = pi_rectangle_table(&copula, &pi_i, &pi_j).unwrap();
            for a in 0..k {
                let row: f64 = (0..k).map(|b| table[a * k + b]).sum();
                let col: f64 = (0..k).map(|b| table[b * k + a]).sum();
                worst = worst.max((row - pi_i[a]).abs()).max((col - pi_j[a]).abs());
            }
        }
    }
    Outcome::new(worst <= 1e-9, format!("300 tables, max margin deviation {worst:.2e} (tol 1e-9)"))
}
