//! Held-out link prediction and reproducibility, run through the same
//! `generate` and `eval` code paths as the binary.

use std::fs;
use std::path::{Path, PathBuf};

use cmmsb_cli::commands::{self, Preset, SynthSource};
use cmmsb_cli::config::LoadedConfig;

use crate::Outcome;

fn write_config(dir: &Path, iterations: usize, folds: usize, seed: u64) -> PathBuf {
    commands::generate(&SynthSource::Preset(Preset::SyntheticFull), Some(1), &dir.join("data")).unwrap();
    let path = dir.join("run.toml");
    fs::write(
        &path,
        format!(
            r#"dataset = "data/data.txt"
subgroups = "data/subgroups.txt"
variant = "pi"
mode = "finiteK"
communities = 4
iterations = {iterations}
seed = {seed}
folds = {folds}

[[copulas]]
family = "gumbel"
theta = 2.0
"#
        ),
    )
    .unwrap();
    path
}

pub fn link_prediction() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = LoadedConfig::load(&write_config(dir.path(), 2_000, 10, 1)).unwrap();
    let report = commands::eval(&config, None, Some(&dir.path().join("out"))).unwrap();
    let error = report.test_error.as_ref().unwrap();
    let auc = report.auc.as_ref().unwrap();
    Outcome::new(
        auc.mean >= 0.85 && error.mean <= 0.11,
        format!(
            "10 folds × 2000 sweeps: mean AUC {:.4} ± {:.4} (need ≥ 0.85), mean test error {:.4} ± {:.4} (need ≤ 0.11)",
            auc.mean, auc.sd, error.mean, error.sd
        ),
    )
}

pub fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = LoadedConfig::load(&write_config(dir.path(), 60, 5, 9)).unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    commands::eval(&config, None, Some(&first)).unwrap();
    commands::eval(&config, None, Some(&second)).unwrap();
    let a = fs::read(first.join("metrics.json")).unwrap();
    let b = fs::read(second.join("metrics.json")).unwrap();
    Outcome::new(a == b, format!("two eval runs, metrics.json {} bytes each, identical: {}", a.len(), a == b))
}
