use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::beta::{resample_beta, resample_beta_given_pi};
use super::config::{ChainConfig, Variant};
use super::state::{PiState, UvState};
use super::tables::{breakpoints, cell_mass, fill_table, interval_prob_at, interval_probs, TableScratch};
use crate::copula::{CopulaFamily, Copula};
use crate::error::{Error, Result};
use crate::math::{sample_beta, sample_dirichlet, sample_uniform_open, RngStream};
use crate::model::{
    observed_pairs, stick_invert, CommunityMode, CountState, GlobalWeights, Hyperparams, InteractionMatrix, Pair,
    SubgroupMap,
};

const BETA_MH_STEPS: usize = 5;

/// A full sampler state to start a chain from.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    /// Global weights, including the remainder entry in hdp mode.
    pub beta: Vec<f64>,
    /// One `(s, r)` per training pair, every index below `K`.
    pub assignments: Vec<(usize, usize)>,
    /// Explicit memberships, required by the π variant.
    pub pi: Option<Vec<Vec<f64>>>,
    /// Copula coordinates, required by the uv variant.
    pub uv: Option<Vec<(f64, f64)>>,
    /// Copula parameters per subgroup; `None` keeps the configured value.
    pub thetas: Vec<Option<f64>>,
}

#[derive(Clone, Debug)]
enum Latent {
    Pi(PiState),
    Uv(UvState),
}

/// Proposal and acceptance tallies for the Metropolis moves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acceptance {
    pub theta: Vec<[u64; 2]>,
    pub pi: [u64; 2],
    pub uv: [u64; 2],
    pub beta: [u64; 2],
    pub swap: [u64; 2],
}

impl Acceptance {
    fn tally(slot: &mut [u64; 2], accepted: bool) {
        slot[0] += 1;
        slot[1] += accepted as u64;
    }
}

/// One sampler state with its random stream.
#[derive(Clone, Debug)]
pub struct Chain {
    cfg: ChainConfig,
    n: usize,
    counts: CountState,
    weights: GlobalWeights,
    latent: Latent,
    copulas: Vec<Copula>,
    independence: Copula,
    groups: SubgroupMap,
    pair_index: Vec<Option<usize>>,
    node_pairs: Vec<Vec<usize>>,
    group_pairs: Vec<Vec<usize>>,
    rng: RngStream,
    order: Vec<usize>,
    scratch: TableScratch,
    table: Vec<f64>,
    pu: Vec<f64>,
    pv: Vec<f64>,
    acceptance: Acceptance,
    sweeps: usize,
}

fn copula_for<'a>(copulas: &'a [Copula], independence: &'a Copula, group: usize) -> &'a Copula {
    if group == 0 {
        independence
    } else {
        &copulas[group - 1]
    }
}

/// Index drawn proportionally to nonnegative weights.
fn sample_weighted(weights: &[f64], rng: &mut RngStream) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::consistency(format!("cannot sample from weights with total {total}")));
    }
    let mut target = sample_uniform_open(rng) * total;
    for (k, &w) in weights.iter().enumerate() {
        target -= w;
        if target < 0.0 {
            return Ok(k);
        }
    }
    Ok(weights.iter().rposition(|&w| w > 0.0).expect("positive total"))
}

/// `a − b` for log values, treating two equal infinities as no change.
fn log_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        a - b
    }
}

impl Chain {
    /// Random start: global weights and memberships from the prior, then each
    /// pair's indicators drawn from the generative process given those.
    pub fn new(data: &InteractionMatrix, groups: &SubgroupMap, cfg: &ChainConfig) -> Result<Self> {
        cfg.validate(groups.groups())?;
        let pairs = observed_pairs(data, groups)?;
        let mut rng = RngStream::new(cfg.seed);
        let hp = cfg.hyper;
        let mut weights = GlobalWeights::sample_prior(cfg.communities, hp.gamma, cfg.mode, &mut rng)?;
        let draw_pi = |w: &GlobalWeights, rng: &mut RngStream| -> Result<Vec<f64>> {
            sample_dirichlet(&w.beta().iter().map(|b| (hp.alpha * b).max(f64::MIN_POSITIVE)).collect::<Vec<_>>(), rng)
        };
        let mut pi = PiState::new((0..data.n()).map(|_| draw_pi(&weights, &mut rng)).collect::<Result<_>>()?)?;
        let mut counts = CountState::new(cfg.mode, cfg.communities, data.n(), pairs.clone())?;
        let independence = Copula::independence();
        let mut coords = Vec::with_capacity(pairs.len());
        for (p, pair) in pairs.iter().enumerate() {
            let copula = copula_for(&cfg.copulas, &independence, pair.group);
            let (u, v) = copula.sample_pair(&mut rng);
            coords.push((u, v));
            let s = stick_invert(pi.row(pair.sender), u);
            let r = stick_invert(pi.row(pair.receiver), v);
            if cfg.mode == CommunityMode::Hdp && (s == counts.k() || r == counts.k()) {
                let fresh = weights.split_remainder(&mut rng)?;
                let rest = *weights.beta().last().expect("remainder");
                pi.split(hp.alpha, fresh, rest, None, &mut rng)?;
            }
            counts.add_pair(p, s, r)?;
        }
        for c in counts.drop_empty() {
            weights.absorb(c)?;
            pi.absorb(c);
        }
        let assignments = counts.assignments().iter().map(|a| a.expect("all assigned")).collect();
        let init = InitialState {
            beta: weights.beta().to_vec(),
            assignments,
            pi: (cfg.variant == Variant::Pi).then(|| pi.rows().to_vec()),
            uv: (cfg.variant == Variant::Uv).then_some(coords),
            thetas: vec![None; cfg.copulas.len()],
        };
        Self::assemble(data.n(), pairs, groups, cfg, init, rng)
    }

    /// Start from an explicit state.
    pub fn from_state(
        data: &InteractionMatrix,
        groups: &SubgroupMap,
        cfg: &ChainConfig,
        init: InitialState,
    ) -> Result<Self> {
        cfg.validate(groups.groups())?;
        let pairs = observed_pairs(data, groups)?;
        let rng = RngStream::new(cfg.seed);
        Self::assemble(data.n(), pairs, groups, cfg, init, rng)
    }

    fn assemble(
        n: usize,
        pairs: Vec<Pair>,
        groups: &SubgroupMap,
        cfg: &ChainConfig,
        init: InitialState,
        rng: RngStream,
    ) -> Result<Self> {
        if init.assignments.len() != pairs.len() {
            return Err(Error::config(format!(
                "{} assignments for {} training pairs",
                init.assignments.len(),
                pairs.len()
            )));
        }
        let k = match cfg.mode {
            CommunityMode::Finite => init.beta.len(),
            CommunityMode::Hdp => init.beta.len() - 1,
        };
        let assign: Vec<_> = init.assignments.iter().map(|&a| Some(a)).collect();
        let mut counts = CountState::from_assignments(cfg.mode, k, n, pairs.clone(), &assign)?;
        let mut weights = GlobalWeights::new(init.beta, cfg.hyper.gamma, cfg.mode)?;
        let mut latent = match cfg.variant {
            Variant::Pi => {
                let rows = init.pi.ok_or_else(|| Error::config("the pi variant needs membership vectors"))?;
                let state = PiState::new(rows)?;
                if state.n() != n || state.row(0).len() != weights.beta().len() {
                    return Err(Error::config("membership vectors do not match nodes and communities"));
                }
                Latent::Pi(state)
            }
            Variant::Uv => {
                let coords = init.uv.ok_or_else(|| Error::config("the uv variant needs copula coordinates"))?;
                if coords.len() != pairs.len() {
                    return Err(Error::config("one (u, v) per training pair is required"));
                }
                Latent::Uv(UvState::new(coords)?)
            }
        };
        for c in counts.drop_empty() {
            weights.absorb(c)?;
            if let Latent::Pi(pi) = &mut latent {
                pi.absorb(c);
            }
        }
        let mut copulas = cfg.copulas.clone();
        for (copula, theta) in copulas.iter_mut().zip(&init.thetas) {
            if let Some(t) = theta {
                *copula = copula.with_theta(*t)?;
            }
        }
        let mut pair_index = vec![None; n * n];
        let mut node_pairs = vec![Vec::new(); n];
        let mut group_pairs = vec![Vec::new(); groups.groups()];
        for (p, pair) in pairs.iter().enumerate() {
            pair_index[pair.sender * n + pair.receiver] = Some(p);
            node_pairs[pair.sender].push(p);
            node_pairs[pair.receiver].push(p);
            if pair.group > 0 {
                group_pairs[pair.group - 1].push(p);
            }
        }
        Ok(Self {
            cfg: cfg.clone(),
            n,
            counts,
            weights,
            latent,
            independence: Copula::independence(),
            acceptance: Acceptance { theta: vec![[0, 0]; copulas.len()], ..Default::default() },
            copulas,
            groups: groups.clone(),
            pair_index,
            node_pairs,
            group_pairs,
            rng,
            order: (0..pairs.len()).collect(),
            scratch: TableScratch::default(),
            table: Vec::new(),
            pu: Vec::new(),
            pv: Vec::new(),
            sweeps: 0,
        })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn counts(&self) -> &CountState {
        &self.counts
    }

    pub fn weights(&self) -> &GlobalWeights {
        &self.weights
    }

    pub fn copulas(&self) -> &[Copula] {
        &self.copulas
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.cfg.hyper
    }

    pub fn pi(&self) -> Option<&PiState> {
        match &self.latent {
            Latent::Pi(pi) => Some(pi),
            Latent::Uv(_) => None,
        }
    }

    pub fn uv(&self) -> Option<&UvState> {
        match &self.latent {
            Latent::Uv(uv) => Some(uv),
            Latent::Pi(_) => None,
        }
    }

    pub fn acceptance(&self) -> &Acceptance {
        &self.acceptance
    }

    /// Current copula parameter per subgroup.
    pub fn thetas(&self) -> Vec<Option<f64>> {
        self.copulas.iter().map(Copula::theta).collect()
    }

    pub fn loglik(&self) -> f64 {
        self.counts.collapsed_edge_loglik(&self.cfg.hyper)
    }

    /// Recount from the indicator arrays and check every latent block's shape.
    pub fn check_consistency(&self) -> Result<()> {
        self.counts.check_consistency()?;
        self.weights.validate()?;
        if self.weights.beta().len() != self.counts.slots() {
            return Err(Error::consistency("global weights and counts disagree on the number of slots"));
        }
        if let Latent::Pi(pi) = &self.latent {
            pi.validate()?;
            if pi.row(0).len() != self.counts.slots() {
                return Err(Error::consistency("membership vectors and counts disagree on the number of slots"));
            }
        }
        Ok(())
    }

    /// One full sweep: every pair's indicators in random order, then the
    /// global weights, the memberships (π variant) and the copula parameters.
    pub fn sweep(&mut self) -> Result<()> {
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(&mut self.rng);
        for &p in &order {
            match self.cfg.variant {
                Variant::Pi => self.update_pair_pi(p)?,
                Variant::Uv => self.update_pair_uv(p)?,
            }
        }
        self.order = order;
        self.update_beta()?;
        if self.cfg.variant == Variant::Pi {
            for i in 0..self.n {
                self.resample_pi(i)?;
            }
        }
        if self.sweeps >= self.cfg.theta_warmup {
            for d in 1..=self.copulas.len() {
                self.resample_theta(d)?;
            }
        }
        self.sweeps += 1;
        let k = self.counts.k();
        if self.cfg.variant == Variant::Pi && k >= 2 {
            for _ in 0..self.cfg.label_swaps {
                let a = self.rng.random_range(0..k);
                let b = (a + self.rng.random_range(1..k)) % k;
                self.swap_labels(a, b)?;
            }
        }
        Ok(())
    }

    fn take_out(&mut self, p: usize) -> Result<()> {
        let removal = self.counts.remove_pair(p)?;
        for c in removal.emptied {
            self.weights.absorb(c)?;
            if let Latent::Pi(pi) = &mut self.latent {
                pi.absorb(c);
            }
        }
        Ok(())
    }

    /// Create the communities behind slot `K` when the chosen cell uses it,
    /// returning the cell in the enlarged labelling.
    ///
    /// The end whose draw landed in the remainder chose its new community in
    /// proportion to its own share, so that node's split is size-biased. When
    /// both ends land in the remainder the receiver joins the sender's new
    /// community with its conditional probability and otherwise opens a
    /// second one.
    fn instantiate(&mut self, p: usize, s: usize, r: usize) -> Result<(usize, usize)> {
        let k = self.counts.k();
        let pair = self.counts.pairs()[p];
        if self.counts.mode() != CommunityMode::Hdp || (s != k && r != k) {
            return Ok((s, r));
        }
        let first = if s == k { pair.sender } else { pair.receiver };
        self.split_remainder(first)?;
        if s != r {
            return Ok((s, r));
        }
        if sample_uniform_open(&mut self.rng) < self.receiver_joins(p, k)? {
            return Ok((k, k));
        }
        self.split_remainder(pair.receiver)?;
        Ok((k, k + 1))
    }

    fn split_remainder(&mut self, picked: usize) -> Result<()> {
        let fresh = self.weights.split_remainder(&mut self.rng)?;
        let rest = *self.weights.beta().last().expect("remainder");
        if let Latent::Pi(pi) = &mut self.latent {
            pi.split(self.cfg.hyper.alpha, fresh, rest, Some(picked), &mut self.rng)?;
        }
        Ok(())
    }

    /// Probability that the receiver's remainder draw falls in the freshly
    /// split community `k` rather than the rest at `k + 1`, given the sender
    /// sits in `k`.
    fn receiver_joins(&mut self, p: usize, k: usize) -> Result<f64> {
        let pair = self.counts.pairs()[p];
        let alpha = self.cfg.hyper.alpha;
        let (new, rest) = match &self.latent {
            Latent::Pi(pi) => {
                let copula = copula_for(&self.copulas, &self.independence, pair.group);
                if copula.family() == CopulaFamily::Independence {
                    (pi.row(pair.receiver)[k], pi.row(pair.receiver)[k + 1])
                } else {
                    breakpoints(pi.row(pair.sender), &mut self.scratch.cum_i);
                    breakpoints(pi.row(pair.receiver), &mut self.scratch.cum_j);
                    let (ci, cj) = (&self.scratch.cum_i, &self.scratch.cum_j);
                    (cell_mass(copula, ci, k, cj, k)?, cell_mass(copula, ci, k, cj, k + 1)?)
                }
            }
            Latent::Uv(uv) => {
                let beta = self.weights.beta();
                if pair.group == 0 {
                    (beta[k], beta[k + 1])
                } else {
                    let v = uv.v[p];
                    let nj = self.counts.node_counts(pair.receiver);
                    (interval_prob_at(v, alpha, beta, nj, k), interval_prob_at(v, alpha, beta, nj, k + 1))
                }
            }
        };
        Ok(if new + rest > 0.0 { new / (new + rest) } else { 1.0 })
    }

    fn edge_term(&self, k: usize, l: usize, link: bool) -> f64 {
        let p = self.counts.predictive_edge_prob(&self.cfg.hyper, k, l, None);
        if link {
            p
        } else {
            1.0 - p
        }
    }

    /// Joint `(s, r)` draw for one pair given explicit memberships.
    pub fn update_pair_pi(&mut self, p: usize) -> Result<()> {
        self.take_out(p)?;
        let pair = self.counts.pairs()[p];
        let Latent::Pi(pi) = &self.latent else {
            return Err(Error::consistency("pair update for the wrong variant"));
        };
        let copula = copula_for(&self.copulas, &self.independence, pair.group);
        let mut table = std::mem::take(&mut self.table);
        fill_table(copula, pi.row(pair.sender), pi.row(pair.receiver), &mut self.scratch, &mut table)?;
        let slots = self.counts.slots();
        for k in 0..slots {
            for l in 0..slots {
                table[k * slots + l] *= self.edge_term(k, l, pair.link);
            }
        }
        let cell = sample_weighted(&table, &mut self.rng);
        self.table = table;
        let cell = cell?;
        let (s, r) = self.instantiate(p, cell / slots, cell % slots)?;
        self.counts.add_pair(p, s, r)
    }

    /// Joint `(s, r)` draw for one pair given its copula coordinates, then a
    /// Metropolis refresh of the coordinates given the new indicators. Pairs
    /// outside every subgroup skip the coordinates altogether.
    pub fn update_pair_uv(&mut self, p: usize) -> Result<()> {
        self.take_out(p)?;
        let pair = self.counts.pairs()[p];
        let alpha = self.cfg.hyper.alpha;
        let (u, v) = self.uv_of(p)?;
        let beta = self.weights.beta();
        let (mut pu, mut pv) = (std::mem::take(&mut self.pu), std::mem::take(&mut self.pv));
        if pair.group == 0 {
            // Independent coordinates integrate out in closed form: the
            // interval probabilities average to the Dirichlet means.
            let ni = self.counts.node_counts(pair.sender);
            let nj = self.counts.node_counts(pair.receiver);
            let mean = |counts: &[u32], out: &mut Vec<f64>| {
                out.clear();
                out.extend(beta.iter().enumerate().map(|(k, b)| alpha * b + counts.get(k).copied().unwrap_or(0) as f64));
            };
            mean(ni, &mut pu);
            mean(nj, &mut pv);
        } else {
            interval_probs(u, alpha, beta, self.counts.node_counts(pair.sender), &mut pu);
            interval_probs(v, alpha, beta, self.counts.node_counts(pair.receiver), &mut pv);
        }
        let slots = self.counts.slots();
        let mut table = std::mem::take(&mut self.table);
        table.clear();
        for k in 0..slots {
            for l in 0..slots {
                table.push(pu[k] * pv[l] * self.edge_term(k, l, pair.link));
            }
        }
        let cell = sample_weighted(&table, &mut self.rng);
        self.table = table;
        self.pu = pu;
        self.pv = pv;
        let cell = cell?;
        let (s, r) = self.instantiate(p, cell / slots, cell % slots)?;

        if pair.group > 0 {
            let copula = &self.copulas[pair.group - 1];
            let (u_new, v_new) = copula.sample_pair(&mut self.rng);
            let beta = self.weights.beta();
            let ni = self.counts.node_counts(pair.sender);
            let nj = self.counts.node_counts(pair.receiver);
            let old = interval_prob_at(u, alpha, beta, ni, s) * interval_prob_at(v, alpha, beta, nj, r);
            let new = interval_prob_at(u_new, alpha, beta, ni, s) * interval_prob_at(v_new, alpha, beta, nj, r);
            let accept = old <= 0.0 || sample_uniform_open(&mut self.rng) * old < new;
            Acceptance::tally(&mut self.acceptance.uv, accept);
            if accept {
                self.set_uv(p, u_new, v_new)?;
            }
        }
        self.counts.add_pair(p, s, r)
    }

    fn uv_of(&self, p: usize) -> Result<(f64, f64)> {
        match &self.latent {
            Latent::Uv(uv) => Ok(uv.get(p)),
            Latent::Pi(_) => Err(Error::consistency("pair update for the wrong variant")),
        }
    }

    fn set_uv(&mut self, p: usize, u: f64, v: f64) -> Result<()> {
        match &mut self.latent {
            Latent::Uv(uv) => {
                uv.u[p] = u;
                uv.v[p] = v;
                Ok(())
            }
            Latent::Pi(_) => Err(Error::consistency("pair update for the wrong variant")),
        }
    }

    fn update_beta(&mut self) -> Result<()> {
        let alpha = self.cfg.hyper.alpha;
        match (&self.latent, self.cfg.mode) {
            (Latent::Pi(pi), CommunityMode::Finite) => {
                let accepted = resample_beta_given_pi(pi, &mut self.weights, alpha, BETA_MH_STEPS, &mut self.rng)?;
                self.acceptance.beta[0] += BETA_MH_STEPS as u64;
                self.acceptance.beta[1] += accepted as u64;
                Ok(())
            }
            _ => resample_beta(&self.counts, &mut self.weights, alpha, &mut self.rng),
        }
    }

    /// Metropolis–Hastings move on `π_i` with the conjugate
    /// `Dirichlet(αβ + N_i)` proposal; only copula-coupled pairs touching `i`
    /// enter the acceptance ratio.
    pub fn resample_pi(&mut self, i: usize) -> Result<bool> {
        let alpha = self.cfg.hyper.alpha;
        let conc: Vec<f64> = self
            .weights
            .beta()
            .iter()
            .enumerate()
            .map(|(k, b)| (alpha * b + self.counts.node_count(i, k) as f64).max(f64::MIN_POSITIVE))
            .collect();
        let proposal = sample_dirichlet(&conc, &mut self.rng)?;
        let Latent::Pi(pi) = &self.latent else {
            return Err(Error::consistency("membership move for the wrong variant"));
        };
        let mut cum_old = Vec::new();
        let mut cum_new = Vec::new();
        let mut cum_other = Vec::new();
        breakpoints(pi.row(i), &mut cum_old);
        breakpoints(&proposal, &mut cum_new);
        let mut log_ratio = 0.0;
        let mut coupled = false;
        for &p in &self.node_pairs[i] {
            let pair = self.counts.pairs()[p];
            if pair.group == 0 {
                continue;
            }
            let copula = &self.copulas[pair.group - 1];
            if copula.is_independent() {
                continue;
            }
            coupled = true;
            let (s, r) = self.counts.assignment(p).expect("assigned");
            let (other, own) = if pair.sender == i { (pair.receiver, s) } else { (pair.sender, r) };
            breakpoints(pi.row(other), &mut cum_other);
            let (old, new) = if pair.sender == i {
                (cell_mass(copula, &cum_old, s, &cum_other, r)?, cell_mass(copula, &cum_new, s, &cum_other, r)?)
            } else {
                (cell_mass(copula, &cum_other, s, &cum_old, r)?, cell_mass(copula, &cum_other, s, &cum_new, r)?)
            };
            log_ratio += log_diff(new.ln(), old.ln()) - log_diff(proposal[own].ln(), pi.row(i)[own].ln());
        }
        let accept = !coupled || (!log_ratio.is_nan() && sample_uniform_open(&mut self.rng).ln() < log_ratio);
        if coupled {
            Acceptance::tally(&mut self.acceptance.pi, accept);
        }
        if accept {
            if let Latent::Pi(pi) = &mut self.latent {
                pi.set_row(i, proposal);
            }
        }
        Ok(accept)
    }

    /// Metropolis exchange of communities `a` and `b` in the global weights,
    /// every membership vector and every indicator (π variant). The priors
    /// and the collapsed link likelihood are symmetric under the exchange, so
    /// only the copula cell masses enter the ratio.
    pub fn swap_labels(&mut self, a: usize, b: usize) -> Result<bool> {
        let Latent::Pi(pi) = &self.latent else {
            return Err(Error::consistency("label exchange needs explicit memberships"));
        };
        if a == b {
            return Ok(true);
        }
        let flip = |x: usize| if x == a { b } else if x == b { a } else { x };
        let mut cums = Vec::with_capacity(self.n);
        let mut swapped = Vec::with_capacity(self.n);
        let mut row = Vec::new();
        for i in 0..self.n {
            let mut c = Vec::new();
            breakpoints(pi.row(i), &mut c);
            cums.push(c);
            row.clear();
            row.extend_from_slice(pi.row(i));
            row.swap(a, b);
            let mut c = Vec::new();
            breakpoints(&row, &mut c);
            swapped.push(c);
        }
        let mut log_ratio = 0.0;
        for (d, copula) in self.copulas.iter().enumerate() {
            if copula.is_independent() {
                continue;
            }
            for &p in &self.group_pairs[d] {
                let pair = self.counts.pairs()[p];
                let (s, r) = self.counts.assignment(p).expect("assigned");
                let old = cell_mass(copula, &cums[pair.sender], s, &cums[pair.receiver], r)?;
                let new = cell_mass(copula, &swapped[pair.sender], flip(s), &swapped[pair.receiver], flip(r))?;
                log_ratio += log_diff(new.ln(), old.ln());
            }
        }
        let accept = !log_ratio.is_nan() && sample_uniform_open(&mut self.rng).ln() < log_ratio;
        Acceptance::tally(&mut self.acceptance.swap, accept);
        if accept {
            self.counts.swap_labels(a, b)?;
            self.weights.swap(a, b)?;
            if let Latent::Pi(pi) = &mut self.latent {
                pi.swap(a, b);
            }
        }
        Ok(accept)
    }

    /// Log likelihood of subgroup `d`'s pairs under `copula`.
    fn group_loglik(&self, d: usize, copula: &Copula, cums: &[Vec<f64>]) -> Result<f64> {
        let mut total = 0.0;
        for &p in &self.group_pairs[d - 1] {
            match &self.latent {
                Latent::Pi(_) => {
                    let pair = self.counts.pairs()[p];
                    let (s, r) = self.counts.assignment(p).expect("assigned");
                    total += cell_mass(copula, &cums[pair.sender], s, &cums[pair.receiver], r)?.ln();
                }
                Latent::Uv(uv) => {
                    let (u, v) = uv.get(p);
                    total += copula.log_density(u, v);
                }
            }
        }
        Ok(total)
    }

    /// Random-walk Metropolis on the copula parameter of subgroup `d ≥ 1`.
    pub fn resample_theta(&mut self, d: usize) -> Result<()> {
        let copula = self.copulas[d - 1].clone();
        if !copula.is_updatable() {
            return Ok(());
        }
        let cums: Vec<Vec<f64>> = match &self.latent {
            Latent::Pi(pi) => pi
                .rows()
                .iter()
                .map(|row| {
                    let mut c = Vec::new();
                    breakpoints(row, &mut c);
                    c
                })
                .collect(),
            Latent::Uv(_) => Vec::new(),
        };
        let mut current = copula;
        let mut theta = current.theta().expect("parametric family");
        let mut current_lp =
            current.theta_log_prior(theta) + current.log_jacobian(theta) + self.group_loglik(d, &current, &cums)?;
        for _ in 0..self.cfg.theta_steps {
            let cand = current.propose_theta(theta, &mut self.rng);
            let accepted = match current.with_theta(cand) {
                Ok(copula) => {
                    let lp = copula.theta_log_prior(cand) + copula.log_jacobian(cand) + self.group_loglik(d, &copula, &cums)?;
                    let log_ratio = log_diff(lp, current_lp);
                    if !log_ratio.is_nan() && sample_uniform_open(&mut self.rng).ln() < log_ratio {
                        current = copula;
                        theta = cand;
                        current_lp = lp;
                        true
                    } else {
                        false
                    }
                }
                Err(_) => false,
            };
            Acceptance::tally(&mut self.acceptance.theta[d - 1], accepted);
        }
        self.copulas[d - 1] = current;
        Ok(())
    }

    /// Replace every training link by a draw from the model given the current
    /// indicators: block probabilities from their posterior, then Bernoulli
    /// links. Used by joint-distribution tests.
    pub fn resimulate_links(&mut self) -> Result<()> {
        let hp = self.cfg.hyper;
        let k = self.counts.k();
        let mut b = vec![0.0; k * k];
        for s in 0..k {
            for r in 0..k {
                let a = self.counts.links(s, r) as f64 + hp.lambda1;
                let c = self.counts.non_links(s, r) as f64 + hp.lambda2;
                b[s * k + r] = sample_beta(a, c, &mut self.rng)?;
            }
        }
        let links: Vec<bool> = (0..self.counts.pairs().len())
            .map(|p| {
                let (s, r) = self.counts.assignment(p).expect("assigned");
                sample_uniform_open(&mut self.rng) < b[s * k + r]
            })
            .collect();
        self.counts = self.counts.with_links(&links)?;
        Ok(())
    }

    /// Membership vector used for pairs outside the training set: explicit in
    /// the π variant, the posterior mean `(αβ + N_i) / (α + ΣN_i)` in the uv
    /// variant.
    fn membership_estimate(&self, i: usize) -> Vec<f64> {
        match &self.latent {
            Latent::Pi(pi) => pi.row(i).to_vec(),
            Latent::Uv(_) => {
                let alpha = self.cfg.hyper.alpha;
                let counts = self.counts.node_counts(i);
                let total = alpha * self.weights.beta().iter().sum::<f64>() + counts.iter().sum::<u32>() as f64;
                self.weights
                    .beta()
                    .iter()
                    .enumerate()
                    .map(|(k, b)| (alpha * b + counts.get(k).copied().unwrap_or(0) as f64) / total)
                    .collect()
            }
        }
    }

    /// Add the current state's link probabilities to `acc`: the block mean of
    /// the assigned cell for training pairs, and the cell mixture under the
    /// pair's joint indicator table for every other off-diagonal pair.
    pub fn accumulate(&mut self, acc: &mut PredictiveSum) -> Result<()> {
        if acc.n != self.n {
            return Err(Error::consistency("predictive accumulator has the wrong size"));
        }
        let hp = self.cfg.hyper;
        let slots = self.counts.slots();
        let mut cell_pred = vec![0.0; slots * slots];
        for k in 0..slots {
            for l in 0..slots {
                cell_pred[k * slots + l] = self.counts.predictive_edge_prob(&hp, k, l, None);
            }
        }
        let memberships: Vec<Vec<f64>> = (0..self.n).map(|i| self.membership_estimate(i)).collect();
        let mut table = std::mem::take(&mut self.table);
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                let value = match self.pair_index[i * self.n + j] {
                    Some(p) => {
                        let (s, r) = self.counts.assignment(p).expect("assigned");
                        cell_pred[s * slots + r]
                    }
                    None => {
                        let copula = copula_for(&self.copulas, &self.independence, self.groups.get(i, j));
                        fill_table(copula, &memberships[i], &memberships[j], &mut self.scratch, &mut table)?;
                        table.iter().zip(&cell_pred).map(|(t, q)| t * q).sum::<f64>()
                    }
                };
                acc.sum[i * self.n + j] += value;
            }
        }
        self.table = table;
        acc.samples += 1;
        Ok(())
    }

    fn record(&self, iteration: usize) -> IterationRecord {
        IterationRecord {
            iteration,
            communities: self.counts.k(),
            theta: self.thetas(),
            loglik: self.loglik(),
        }
    }
}

/// Running sum of per-state link probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSum {
    pub n: usize,
    pub sum: Vec<f64>,
    pub samples: usize,
}

impl PredictiveSum {
    pub fn new(n: usize) -> Self {
        Self { n, sum: vec![0.0; n * n], samples: 0 }
    }

    /// Averaged `n × n` matrix, row-major. The diagonal is zero.
    pub fn mean(&self) -> Result<Vec<f64>> {
        if self.samples == 0 {
            return Err(Error::consistency("no post-burn-in samples were accumulated"));
        }
        Ok(self.sum.iter().map(|s| s / self.samples as f64).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub communities: usize,
    pub theta: Vec<Option<f64>>,
    pub loglik: f64,
}

/// Everything a chain reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<IterationRecord>,
    pub predictive: PredictiveSum,
    pub acceptance: Acceptance,
}

/// Run a seeded chain from a random start and collect its trace.
pub fn run_chain(data: &InteractionMatrix, groups: &SubgroupMap, cfg: &ChainConfig) -> Result<Trace> {
    let mut chain = Chain::new(data, groups, cfg)?;
    run_from(&mut chain)
}

/// Run an already constructed chain for its configured number of sweeps.
pub fn run_from(chain: &mut Chain) -> Result<Trace> {
    let burn_in = chain.cfg.burn_in();
    let mut records = Vec::with_capacity(chain.cfg.iterations);
    let mut predictive = PredictiveSum::new(chain.n);
    for t in 0..chain.cfg.iterations {
        chain.sweep()?;
        if cfg!(debug_assertions) {
            chain.check_consistency()?;
        }
        records.push(chain.record(t));
        if t >= burn_in {
            chain.accumulate(&mut predictive)?;
        }
    }
    Ok(Trace { records, predictive, acceptance: chain.acceptance.clone() })
}
