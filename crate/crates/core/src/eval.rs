//! Held-out link prediction: per-node cross-validation folds, the posterior
//! predictive matrix and the four reported metrics.

use rand::seq::SliceRandom;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infer::{run_chain, ChainConfig, Trace};
use crate::math::RngStream;
use crate::model::{InteractionMatrix, SubgroupMap};

/// Assignment of every observed off-diagonal entry to one test fold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvSplit {
    n: usize,
    fold_count: usize,
    /// Fold per cell, row-major; `None` for missing entries and the diagonal.
    fold_of: Vec<Option<usize>>,
}

impl CvSplit {
    pub fn fold_count(&self) -> usize {
        self.fold_count
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fold_of(&self, i: usize, j: usize) -> Option<usize> {
        self.fold_of[i * self.n + j]
    }

    /// Test entries of fold `f`, row-major.
    pub fn test_pairs(&self, f: usize) -> Vec<(usize, usize)> {
        (0..self.n * self.n)
            .filter(|&c| self.fold_of[c] == Some(f))
            .map(|c| (c / self.n, c % self.n))
            .collect()
    }

    /// Observed entries outside fold `f`, row-major.
    pub fn train_pairs(&self, f: usize) -> Vec<(usize, usize)> {
        (0..self.n * self.n)
            .filter(|&c| matches!(self.fold_of[c], Some(g) if g != f))
            .map(|c| (c / self.n, c % self.n))
            .collect()
    }
}

/// Split each node's observed outgoing entries as evenly as possible across
/// `fold_count` folds.
///
/// Nodes are visited in random order and each node's entries are shuffled;
/// one running counter deals folds round-robin across all of them. A node's
/// entries therefore land in consecutive folds, and fold sizes differ by at
/// most one overall.
pub fn make_folds<R: RngCore + ?Sized>(data: &InteractionMatrix, fold_count: usize, rng: &mut R) -> Result<CvSplit> {
    if fold_count < 2 {
        return Err(Error::config(format!("fold_count must be at least 2, got {fold_count}")));
    }
    let n = data.n();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in data.observed() {
        rows[i].push(j);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut fold_of = vec![None; n * n];
    let mut next = 0;
    for i in order {
        rows[i].shuffle(rng);
        for &j in &rows[i] {
            fold_of[i * n + j] = Some(next % fold_count);
            next += 1;
        }
    }
    Ok(CvSplit { n, fold_count, fold_of })
}

/// Posterior mean link probability per ordered pair, row-major, from the
/// post-burn-in states of a chain.
pub fn posterior_predictive(trace: &Trace) -> Result<Vec<f64>> {
    trace.predictive.mean()
}

fn checked_entries<'a>(
    pred: &'a [f64],
    truth: &'a InteractionMatrix,
    mask: &'a [(usize, usize)],
) -> Result<impl Iterator<Item = (f64, bool)> + 'a> {
    let n = truth.n();
    if pred.len() != n * n {
        return Err(Error::domain(format!("prediction has {} entries, expected {}", pred.len(), n * n)));
    }
    if mask.is_empty() {
        return Err(Error::domain("metric mask is empty"));
    }
    for &(i, j) in mask {
        if i >= n || j >= n || truth.get(i, j).is_none() {
            return Err(Error::domain(format!("mask entry ({i}, {j}) is not an observed pair")));
        }
    }
    Ok(mask.iter().map(move |&(i, j)| (pred[i * n + j], truth.get(i, j).expect("checked"))))
}

/// Fraction of masked entries misclassified at threshold 0.5; exactly 0.5
/// predicts a link.
pub fn zero_one_error(pred: &[f64], truth: &InteractionMatrix, mask: &[(usize, usize)]) -> Result<f64> {
    let wrong = checked_entries(pred, truth, mask)?.filter(|&(p, e)| (p >= 0.5) != e).count();
    Ok(wrong as f64 / mask.len() as f64)
}

/// `Σ e ln p + (1 − e) ln(1 − p)` over the masked entries.
pub fn test_log_likelihood(pred: &[f64], truth: &InteractionMatrix, mask: &[(usize, usize)]) -> Result<f64> {
    Ok(checked_entries(pred, truth, mask)?.map(|(p, e)| if e { p.ln() } else { (1.0 - p).ln() }).sum())
}

/// Area under the ROC curve as the Mann–Whitney statistic, ties counting
/// one half. `None` when the mask holds only one class.
pub fn auc(pred: &[f64], truth: &InteractionMatrix, mask: &[(usize, usize)]) -> Result<Option<f64>> {
    let mut scored: Vec<(f64, bool)> = checked_entries(pred, truth, mask)?.collect();
    if scored.iter().any(|(p, _)| p.is_nan()) {
        return Err(Error::domain("prediction contains NaN"));
    }
    let positives = scored.iter().filter(|(_, e)| *e).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return Ok(None);
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Midranks over tie groups, 1-based.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < scored.len() {
        let mut end = start;
        while end < scored.len() && scored[end].0 == scored[start].0 {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        rank_sum += midrank * scored[start..end].iter().filter(|(_, e)| *e).count() as f64;
        start = end;
    }
    let (pos, neg) = (positives as f64, negatives as f64);
    Ok(Some((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub seed: u64,
    pub train_entries: usize,
    pub test_entries: usize,
    pub train_error: f64,
    pub test_error: f64,
    pub test_loglik: f64,
    pub auc: Option<f64>,
}

/// Mean and sample standard deviation across folds. `count` is the number of
/// folds that contributed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd, count })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub folds: Vec<FoldMetrics>,
    pub train_error: Option<Summary>,
    pub test_error: Option<Summary>,
    pub test_loglik: Option<Summary>,
    pub auc: Option<Summary>,
}

impl MetricsReport {
    pub fn from_folds(folds: Vec<FoldMetrics>) -> Self {
        let collect = |f: fn(&FoldMetrics) -> Option<f64>| -> Option<Summary> {
            Summary::of(&folds.iter().filter_map(f).collect::<Vec<_>>())
        };
        Self {
            train_error: collect(|m| Some(m.train_error)),
            test_error: collect(|m| Some(m.test_error)),
            test_loglik: collect(|m| Some(m.test_loglik)),
            auc: collect(|m| m.auc),
            folds,
        }
    }
}

/// Chain seed for fold `f`, derived from the run seed so folds are
/// independent but reproducible.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    RngStream::new(seed).fork(fold as u64 + 1).next_u64()
}

/// Fit one chain with fold `f` held out and score it.
pub fn evaluate_fold(
    data: &InteractionMatrix,
    groups: &SubgroupMap,
    cfg: &ChainConfig,
    split: &CvSplit,
    fold: usize,
) -> Result<FoldMetrics> {
    if split.n() != data.n() {
        return Err(Error::config("split and data disagree on the node count"));
    }
    let test = split.test_pairs(fold);
    let train = split.train_pairs(fold);
    let training = data.without(&test)?;
    let seed = fold_seed(cfg.seed, fold);
    let fold_cfg = ChainConfig { seed, ..cfg.clone() };
    let trace = run_chain(&training, groups, &fold_cfg)?;
    let pred = posterior_predictive(&trace)?;
    Ok(FoldMetrics {
        fold,
        seed,
        train_entries: train.len(),
        test_entries: test.len(),
        train_error: zero_one_error(&pred, data, &train)?,
        test_error: zero_one_error(&pred, data, &test)?,
        test_loglik: test_log_likelihood(&pred, data, &test)?,
        auc: auc(&pred, data, &test)?,
    })
}

/// Evaluate every fold of `split` on a pool of `workers` threads. Results are
/// ordered by fold and do not depend on the worker count.
pub fn cross_validate(
    data: &InteractionMatrix,
    groups: &SubgroupMap,
    cfg: &ChainConfig,
    split: &CvSplit,
    workers: usize,
) -> Result<MetricsReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let folds = pool.install(|| {
        (0..split.fold_count())
            .into_par_iter()
            .map(|f| evaluate_fold(data, groups, cfg, split, f))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(MetricsReport::from_folds(folds))
}
