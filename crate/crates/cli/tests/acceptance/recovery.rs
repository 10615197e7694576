//! Copula-parameter recovery on the synthetic benchmarks.

use cmmsb::copula::Copula;
use cmmsb::infer::{run_chain, ChainConfig, Trace, Variant};
use cmmsb::synth::{generate, SynthConfig};
use cmmsb_cli::commands::Preset;

use crate::Outcome;

const DATA_SEED: u64 = 1;
const CHAIN_SEED: u64 = 1;
const ITERATIONS: usize = 2_000;

/// Post-burn-in draws of copula parameter `d` (0-based).
fn theta_draws(trace: &Trace, burn_in: usize, d: usize) -> Vec<f64> {
    trace.records[burn_in..].iter().map(|r| r.theta[d].expect("parametric copula")).collect()
}

struct Posterior {
    mean: f64,
    lower: f64,
    upper: f64,
}

impl Posterior {
    fn of(mut draws: Vec<f64>) -> Self {
        draws.sort_by(f64::total_cmp);
        let q = |p: f64| draws[((draws.len() - 1) as f64 * p).round() as usize];
        Posterior { mean: draws.iter().sum::<f64>() / draws.len() as f64, lower: q(0.025), upper: q(0.975) }
    }
}

impl std::fmt::Display for Posterior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} [{:.2}, {:.2}]", self.mean, self.lower, self.upper)
    }
}

/// Fit `copulas.len()` Gumbel copulas, each started at `θ = 2`, to a
/// synthetic dataset and return per-copula posteriors.
fn fit(settings: &SynthConfig, variant: Variant) -> Vec<Posterior> {
    let synthetic = generate(settings).unwrap();
    let copulas = vec![Copula::gumbel(2.0).unwrap(); settings.copulas.len()];
    let mut cfg = ChainConfig::new(variant, cmmsb::model::CommunityMode::Finite, 4, copulas);
    cfg.iterations = ITERATIONS;
    cfg.seed = CHAIN_SEED;
    let trace = run_chain(&synthetic.data, &synthetic.subgroups, &cfg).unwrap();
    (0..settings.copulas.len()).map(|d| Posterior::of(theta_draws(&trace, cfg.burn_in(), d))).collect()
}

pub fn full_correlation() -> Outcome {
    let settings = Preset::SyntheticFull.config(DATA_SEED);
    let pi = &fit(&settings, Variant::Pi)[0];
    let uv = &fit(&settings, Variant::Uv)[0];
    Outcome::new(
        (2.5..=5.5).contains(&pi.mean) && pi.lower > 1.0,
        format!("truth 3.5; pi θ {pi} (need mean in [2.5, 5.5], 95% interval above 1); uv θ {uv} (information)"),
    )
}

pub fn partial_correlation() -> Outcome {
    let settings = Preset::SyntheticPartial.config(DATA_SEED);
    let pi = fit(&settings, Variant::Pi);
    let uv = fit(&settings, Variant::Uv);
    Outcome::new(
        pi[0].mean > pi[1].mean && pi[1].mean < 2.0,
        format!(
            "truth θ1=3.5, θ2=1; pi θ1 {} θ2 {} (need θ1 > θ2, θ2 < 2); uv θ1 {} θ2 {} (information)",
            pi[0], pi[1], uv[0], uv[1]
        ),
    )
}

pub fn independent_data() -> Outcome {
    let settings = SynthConfig { copulas: vec![Copula::independence()], ..Preset::SyntheticFull.config(DATA_SEED) };
    let synthetic = generate(&settings).unwrap();
    let mass = |variant| {
        let mut cfg = ChainConfig::new(variant, cmmsb::model::CommunityMode::Finite, 4, vec![Copula::gumbel(2.0).unwrap()]);
        cfg.iterations = ITERATIONS;
        cfg.seed = CHAIN_SEED;
        let trace = run_chain(&synthetic.data, &synthetic.subgroups, &cfg).unwrap();
        let draws = theta_draws(&trace, cfg.burn_in(), 0);
        let inside = draws.iter().filter(|t| (1.0..=1.5).contains(*t)).count() as f64 / draws.len() as f64;
        (inside, Posterior::of(draws))
    };
    let (pi_mass, pi) = mass(Variant::Pi);
    let (uv_mass, uv) = mass(Variant::Uv);
    Outcome::new(
        pi_mass >= 0.5,
        format!(
            "pi mass in [1, 1.5] {pi_mass:.3} (need ≥ 0.5), θ {pi}; uv mass {uv_mass:.3}, θ {uv} (information)"
        ),
    )
}
