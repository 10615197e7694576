//! Stationary distribution of one pair's indicators against exhaustive
//! enumeration on a 3-node, 2-community instance.

use cmmsb::copula::Copula;
use cmmsb::infer::{pi_rectangle_table, Chain, ChainConfig, Variant};
use cmmsb::math::ln_beta;
use cmmsb::model::{CommunityMode, InteractionMatrix, SubgroupMap};

use crate::quadrature::gauss_legendre;
use crate::Outcome;

const THETA: f64 = 2.5;
const BURN_IN: usize = 2_000;
const SWEEPS: usize = 100_000;
const BATCHES: usize = 100;

/// Posterior of the first pair's `(s, r)` cell. With `α = 2` and `β` pinned
/// at `(½, ½)` each membership is uniform on the simplex, so the prior over
/// all 4^6 indicator configurations is a 3-d integral of products of
/// rectangle-table cells; the block probabilities integrate out in closed
/// form.
fn enumerate(copula: &Copula, data: &InteractionMatrix, nodes: usize) -> [f64; 4] {
    let pairs: Vec<(usize, usize, bool)> = data.observed().collect();
    assert_eq!(pairs.len(), 6);
    let (xs, ws) = gauss_legendre(nodes);
    let mut prior = vec![0.0; 4096];
    let mut tables = vec![Vec::new(); 6];
    for (a, wa) in xs.iter().zip(&ws) {
        for (b, wb) in xs.iter().zip(&ws) {
            for (c, wc) in xs.iter().zip(&ws) {
                let pis = [[*a, 1.0 - a], [*b, 1.0 - b], [*c, 1.0 - c]];
                for (p, &(i, j, _)) in pairs.iter().enumerate() {
                    tables[p] = pi_rectangle_table(copula, &pis[i], &pis[j]).unwrap();
                }
                let w = wa * wb * wc;
                for (z, slot) in prior.iter_mut().enumerate() {
                    *slot += (0..6).fold(w, |acc, p| acc * tables[p][(z >> (2 * p)) & 3]);
                }
            }
        }
    }
    let mut post = [0.0; 4];
    let mut total = 0.0;
    for (z, mass) in prior.iter().enumerate() {
        let mut m = [[0u32; 2]; 4];
        for (p, &(_, _, e)) in pairs.iter().enumerate() {
            m[(z >> (2 * p)) & 3][e as usize] += 1;
        }
        let lik: f64 = m.iter().map(|c| ln_beta(c[1] as f64 + 1.0, c[0] as f64 + 1.0).unwrap().exp()).product();
        total += mass * lik;
        post[z & 3] += mass * lik;
    }
    post.map(|p| p / total)
}

/// Batch-mean z-scores of the chain's cell frequencies against `oracle`.
fn chain_z(variant: Variant, copula: &Copula, data: &InteractionMatrix, groups: &SubgroupMap, oracle: &[f64; 4]) -> [f64; 4] {
    let mut cfg = ChainConfig::new(variant, CommunityMode::Finite, 2, vec![copula.clone()]);
    cfg.hyper.alpha = 2.0;
    cfg.hyper.gamma = 1e8;
    cfg.seed = 7;
    let mut chain = Chain::new(data, groups, &cfg).unwrap();
    for _ in 0..BURN_IN {
        chain.sweep().unwrap();
    }
    let per_batch = SWEEPS / BATCHES;
    let mut batches = vec![[0.0; 4]; BATCHES];
    for t in 0..SWEEPS {
        chain.sweep().unwrap();
        let (s, r) = chain.counts().assignment(0).unwrap();
        batches[t / per_batch][s * 2 + r] += 1.0 / per_batch as f64;
    }
    std::array::from_fn(|c| {
        let mean = batches.iter().map(|b| b[c]).sum::<f64>() / BATCHES as f64;
        let var = batches.iter().map(|b| (b[c] - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        (mean - oracle[c]) / (var / BATCHES as f64).sqrt()
    })
}

pub fn stationary_distribution() -> Outcome {
    let data = InteractionMatrix::complete(3, |i, j| matches!((i, j), (0, 1) | (1, 2) | (2, 1)));
    let groups = SubgroupMap::full(3);
    // β is pinned near (½, ½) by a huge γ; θ stays fixed.
    let copula = Copula::gumbel(THETA).unwrap().with_proposal_scale(0.0).unwrap();
    let oracle = enumerate(&copula, &data, 40);
    let coarse = enumerate(&copula, &data, 24);
    let quad_err = oracle.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut pass = true;
    let mut detail = format!("Gumbel θ={THETA}, oracle {:.4?} (quadrature drift {quad_err:.1e})", oracle);
    for variant in [Variant::Pi, Variant::Uv] {
        let z = chain_z(variant, &copula, &data, &groups, &oracle);
        let ok = z.iter().all(|z| z.abs() <= 3.0);
        pass &= ok;
        detail += &format!("; {variant}: z {:.2?} {}", z, if ok { "ok" } else { "outside 3σ" });
    }
    Outcome::new(pass, detail)
}
