//! Acceptance suite: one pass/fail line per criterion.
//!
//! `cargo test -p cmmsb-cli --test acceptance` runs everything; trailing
//! numbers select criteria (`-- 3 8`). Failing criteria are reported but do
//! not fail the process unless `CMMSB_ACCEPTANCE_STRICT=1` is set, so the
//! suite can record known failures without blocking the rest of the tests.

mod enumeration;
mod geweke;
mod prediction;
mod quadrature;
mod recovery;
mod tables;

use std::time::Instant;

pub struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

type Criterion = (usize, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 9] = [
    (1, "independence reduction", tables::independence_reduction),
    (2, "margin preservation", tables::margin_preservation),
    (3, "small-instance stationary distribution", enumeration::stationary_distribution),
    (4, "θ recovery, full correlation", recovery::full_correlation),
    (5, "θ discrimination, partial correlation", recovery::partial_correlation),
    (6, "link prediction", prediction::link_prediction),
    (7, "independent-data θ", recovery::independent_data),
    (8, "joint-distribution test", geweke::joint_distribution),
    (9, "eval determinism", prediction::determinism),
];

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let strict = std::env::var("CMMSB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut failed = 0;
    for (id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        failed += usize::from(!outcome.pass);
        println!(
            "criterion {id} {}: {name} ({:.0}s): {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {failed} criteria failed");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
