//! Joint-distribution test: a chain that alternates sweeps with fresh links
//! drawn given its state must sample the prior, so its statistics should be
//! indistinguishable from independent forward draws of the model.

use std::collections::HashMap;

use cmmsb::copula::Copula;
use cmmsb::infer::{Chain, ChainConfig, Variant};
use cmmsb::math::{normal_cdf, sample_beta, sample_dirichlet, sample_exponential, sample_uniform_open, RngStream};
use cmmsb::model::{stick_invert, CommunityMode, InteractionMatrix, SubgroupMap};

use crate::Outcome;

const NODES: usize = 6;
const FINITE_K: usize = 3;
const PRIOR_RATE: f64 = 0.5;
/// Stick pieces kept by the forward simulator in hdp mode; the leftover mass
/// below the last one is far under double precision.
const TRUNCATION: usize = 200;
const SWEEPS: usize = 200_000;
const THIN: usize = 5;
const FORWARD: usize = 40_000;
const BATCHES: usize = 50;

#[derive(Clone, Copy)]
struct Stats {
    k: f64,
    theta: f64,
    edges: f64,
}

fn forward(mode: CommunityMode, rng: &mut RngStream) -> Stats {
    let beta = match mode {
        CommunityMode::Finite => sample_dirichlet(&[1.0; FINITE_K], rng).unwrap(),
        CommunityMode::Hdp => {
            let mut beta = Vec::with_capacity(TRUNCATION);
            let mut rest = 1.0;
            for _ in 0..TRUNCATION - 1 {
                let b = sample_beta(1.0, 1.0, rng).unwrap();
                beta.push(rest * b);
                rest *= 1.0 - b;
            }
            beta.push(rest);
            beta
        }
    };
    let weights: Vec<f64> = beta.iter().map(|b| b.max(1e-300)).collect();
    let pis: Vec<Vec<f64>> = (0..NODES).map(|_| sample_dirichlet(&weights, rng).unwrap()).collect();
    let theta = 1.0 + sample_exponential(rng) / PRIOR_RATE;
    let copula = Copula::gumbel(theta).unwrap();
    let mut used = vec![false; beta.len()];
    let mut blocks: HashMap<(usize, usize), f64> = HashMap::new();
    let mut edges = 0;
    for i in 0..NODES {
        for j in (0..NODES).filter(|&j| j != i) {
            let (u, v) = copula.sample_pair(rng);
            let (s, r) = (stick_invert(&pis[i], u), stick_invert(&pis[j], v));
            used[s] = true;
            used[r] = true;
            let b = *blocks.entry((s, r)).or_insert_with(|| sample_beta(1.0, 1.0, rng).unwrap());
            edges += usize::from(sample_uniform_open(rng) < b);
        }
    }
    Stats { k: used.iter().filter(|&&u| u).count() as f64, theta, edges: edges as f64 }
}

fn successive(variant: Variant, mode: CommunityMode, seed: u64) -> Vec<Stats> {
    let data = InteractionMatrix::complete(NODES, |i, j| (i + j) % 3 == 0);
    let groups = SubgroupMap::full(NODES);
    let copula = Copula::gumbel(2.0)
        .unwrap()
        .with_prior(cmmsb::copula::ThetaPrior::ShiftedExponential { rate: PRIOR_RATE })
        .unwrap();
    let k = if mode == CommunityMode::Finite { FINITE_K } else { 2 };
    let mut cfg = ChainConfig::new(variant, mode, k, vec![copula]);
    cfg.seed = seed;
    let mut chain = Chain::new(&data, &groups, &cfg).unwrap();
    let mut out = Vec::with_capacity(SWEEPS / THIN);
    for t in 0..SWEEPS {
        chain.sweep().unwrap();
        chain.resimulate_links().unwrap();
        if t % THIN == THIN - 1 {
            let counts = chain.counts();
            out.push(Stats {
                k: (0..counts.k()).filter(|&c| counts.community_size(c) > 0).count() as f64,
                theta: chain.thetas()[0].unwrap(),
                edges: counts.pairs().iter().filter(|p| p.link).count() as f64,
            });
        }
    }
    out
}

/// `P(Y < x) + ½ P(Y = x)` under the empirical distribution of sorted `ys`.
fn midrank_cdf(sorted: &[f64], x: f64) -> f64 {
    let below = sorted.partition_point(|&y| y < x);
    let not_above = sorted.partition_point(|&y| y <= x);
    (below as f64 + 0.5 * (not_above - below) as f64) / sorted.len() as f64
}

/// Two-sided p-value of the Mann–Whitney statistic comparing an
/// autocorrelated chain sample with an independent forward sample. The
/// chain's share of the variance comes from batch means rather than the
/// i.i.d. formula.
fn rank_test(chain: &[f64], forward: &[f64]) -> f64 {
    let mut fwd = forward.to_vec();
    fwd.sort_by(f64::total_cmp);
    let mut sorted_chain = chain.to_vec();
    sorted_chain.sort_by(f64::total_cmp);
    let h: Vec<f64> = chain.iter().map(|&x| midrank_cdf(&fwd, x)).collect();
    let g: Vec<f64> = forward.iter().map(|&y| 1.0 - midrank_cdf(&sorted_chain, y)).collect();
    let u = h.iter().sum::<f64>() / h.len() as f64;

    let per = h.len() / BATCHES;
    let batch: Vec<f64> = h.chunks_exact(per).map(|c| c.iter().sum::<f64>() / per as f64).collect();
    let bm = batch.iter().sum::<f64>() / batch.len() as f64;
    let var_chain = batch.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / ((batch.len() - 1) * batch.len()) as f64;
    let gm = g.iter().sum::<f64>() / g.len() as f64;
    let var_fwd = g.iter().map(|x| (x - gm).powi(2)).sum::<f64>() / ((g.len() - 1) * g.len()) as f64;
    let se = (var_chain + var_fwd).sqrt();
    if se == 0.0 {
        return if u == 0.5 { 1.0 } else { 0.0 };
    }
    2.0 * normal_cdf(-((u - 0.5) / se).abs())
}

pub fn joint_distribution() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, mode) in [CommunityMode::Finite, CommunityMode::Hdp].into_iter().enumerate() {
        let mut rng = RngStream::new(800 + m as u64);
        let fwd: Vec<Stats> = (0..FORWARD).map(|_| forward(mode, &mut rng)).collect();
        for (v, variant) in [Variant::Pi, Variant::Uv].into_iter().enumerate() {
            let chain = successive(variant, mode, 900 + 2 * m as u64 + v as u64);
            let mut line = format!("{variant}/{}", if mode == CommunityMode::Finite { "finite" } else { "hdp" });
            for (name, f) in [("K", (|s: &Stats| s.k) as fn(&Stats) -> f64), ("θ", |s| s.theta), ("edges", |s| s.edges)] {
                let xs: Vec<f64> = chain.iter().map(f).collect();
                let ys: Vec<f64> = fwd.iter().map(f).collect();
                let p = rank_test(&xs, &ys);
                pass &= p > 0.01;
                let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                line += &format!(" {name} p={p:.3} ({:.3} vs {:.3})", mean(&xs), mean(&ys));
            }
            parts.push(line);
        }
    }
    Outcome::new(pass, format!("need every p > 0.01; {}", parts.join("; ")))
}
