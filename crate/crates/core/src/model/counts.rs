use serde::{Deserialize, Serialize};

use super::data::{InteractionMatrix, SubgroupMap};
use super::weights::CommunityMode;
use crate::error::{Error, Result};
use crate::math::ln_beta_unchecked;

/// Model hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    /// Node-level concentration.
    pub alpha: f64,
    /// Global concentration.
    pub gamma: f64,
    /// Beta prior on each block link probability.
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self { alpha: 1.0, gamma: 1.0, lambda1: 1.0, lambda2: 1.0 }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("alpha", self.alpha), ("gamma", self.gamma), ("lambda1", self.lambda1), ("lambda2", self.lambda2)]
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// One observed ordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pair {
    pub sender: usize,
    pub receiver: usize,
    pub link: bool,
    /// Subgroup label, 0 for independent.
    pub group: usize,
}

/// Observed training pairs in row-major order.
pub fn observed_pairs(data: &InteractionMatrix, groups: &SubgroupMap) -> Result<Vec<Pair>> {
    if data.n() != groups.n() {
        return Err(Error::config(format!(
            "subgroup map covers {} nodes but the data has {}",
            groups.n(),
            data.n()
        )));
    }
    Ok(data
        .observed()
        .map(|(i, j, e)| Pair { sender: i, receiver: j, link: e, group: groups.get(i, j) })
        .collect())
}

/// Result of taking a pair out of the counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    /// The cell the pair occupied, in labels from before any compaction.
    pub cell: (usize, usize),
    /// Communities deleted because they emptied, in descending order. Callers
    /// holding per-community vectors remove these indices in this order.
    pub emptied: Vec<usize>,
}

/// Indicator assignments and the sufficient statistics derived from them.
///
/// Community indices are 0-based. In hdp mode index `K` is the slot for a
/// brand-new community: assigning to it instantiates one, and a community
/// whose last member leaves is deleted with every higher index shifting down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountState {
    mode: CommunityMode,
    k: usize,
    n: usize,
    pairs: Vec<Pair>,
    assign: Vec<Option<(usize, usize)>>,
    node: Vec<Vec<u32>>,
    m1: Vec<Vec<u32>>,
    m0: Vec<Vec<u32>>,
    size: Vec<u32>,
}

impl CountState {
    /// `k` communities, every pair unassigned.
    pub fn new(mode: CommunityMode, k: usize, n: usize, pairs: Vec<Pair>) -> Result<Self> {
        if mode == CommunityMode::Finite && k == 0 {
            return Err(Error::config("finite mode needs at least one community"));
        }
        if let Some(p) = pairs.iter().find(|p| p.sender >= n || p.receiver >= n || p.sender == p.receiver) {
            return Err(Error::config(format!("invalid pair ({}, {}) for {n} nodes", p.sender, p.receiver)));
        }
        Ok(Self {
            mode,
            k,
            n,
            assign: vec![None; pairs.len()],
            pairs,
            node: vec![vec![0; k]; n],
            m1: vec![vec![0; k]; k],
            m0: vec![vec![0; k]; k],
            size: vec![0; k],
        })
    }

    /// Rebuild every count from the indicator arrays alone.
    pub fn from_assignments(
        mode: CommunityMode,
        k: usize,
        n: usize,
        pairs: Vec<Pair>,
        assign: &[Option<(usize, usize)>],
    ) -> Result<Self> {
        if assign.len() != pairs.len() {
            return Err(Error::consistency("assignment list does not match pair list"));
        }
        let mut state = Self::new(mode, k, n, pairs)?;
        for (p, a) in assign.iter().enumerate() {
            if let Some((s, r)) = *a {
                if s >= k || r >= k {
                    return Err(Error::consistency(format!("assignment ({s}, {r}) outside {k} communities")));
                }
                state.tally(p, s, r, 1);
                state.assign[p] = Some((s, r));
            }
        }
        Ok(state)
    }

    pub fn mode(&self) -> CommunityMode {
        self.mode
    }

    /// Number of instantiated communities.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of selectable indices per indicator: `K`, or `K + 1` in hdp mode.
    pub fn slots(&self) -> usize {
        match self.mode {
            CommunityMode::Finite => self.k,
            CommunityMode::Hdp => self.k + 1,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn assignment(&self, p: usize) -> Option<(usize, usize)> {
        self.assign[p]
    }

    pub fn assignments(&self) -> &[Option<(usize, usize)>] {
        &self.assign
    }

    /// `N_ik`; zero for the new-community slot.
    pub fn node_count(&self, i: usize, k: usize) -> u32 {
        self.node[i].get(k).copied().unwrap_or(0)
    }

    pub fn node_counts(&self, i: usize) -> &[u32] {
        &self.node[i]
    }

    pub fn links(&self, k: usize, l: usize) -> u32 {
        if k < self.k && l < self.k {
            self.m1[k][l]
        } else {
            0
        }
    }

    pub fn non_links(&self, k: usize, l: usize) -> u32 {
        if k < self.k && l < self.k {
            self.m0[k][l]
        } else {
            0
        }
    }

    /// Total indicators pointing at community `k`.
    pub fn community_size(&self, k: usize) -> u32 {
        self.size[k]
    }

    fn tally(&mut self, p: usize, s: usize, r: usize, sign: i32) {
        let pair = self.pairs[p];
        let bump = |c: &mut u32| *c = c.wrapping_add_signed(sign);
        bump(&mut self.node[pair.sender][s]);
        bump(&mut self.node[pair.receiver][r]);
        bump(&mut self.size[s]);
        bump(&mut self.size[r]);
        if pair.link {
            bump(&mut self.m1[s][r]);
        } else {
            bump(&mut self.m0[s][r]);
        }
    }

    fn grow(&mut self) {
        self.k += 1;
        for row in &mut self.node {
            row.push(0);
        }
        for m in [&mut self.m1, &mut self.m0] {
            for row in m.iter_mut() {
                row.push(0);
            }
            m.push(vec![0; self.k]);
        }
        self.size.push(0);
    }

    fn delete(&mut self, c: usize) {
        self.k -= 1;
        for row in &mut self.node {
            row.remove(c);
        }
        for m in [&mut self.m1, &mut self.m0] {
            m.remove(c);
            for row in m.iter_mut() {
                row.remove(c);
            }
        }
        self.size.remove(c);
        let shift = |x: usize| if x > c { x - 1 } else { x };
        for a in self.assign.iter_mut().flatten() {
            *a = (shift(a.0), shift(a.1));
        }
    }

    /// Assign pair `p` to cell `(s, r)`. In hdp mode either index may be `K`,
    /// which instantiates a new community; the cell `(K, K + 1)` or
    /// `(K + 1, K)` instantiates two.
    pub fn add_pair(&mut self, p: usize, s: usize, r: usize) -> Result<()> {
        if self.assign.get(p).copied().flatten().is_some() || p >= self.pairs.len() {
            return Err(Error::consistency(format!("pair {p} is already assigned or unknown")));
        }
        let (lo, hi) = (s.min(r), s.max(r));
        let two_new = self.mode == CommunityMode::Hdp && hi == self.k + 1 && lo == self.k;
        if hi >= self.slots() && !two_new {
            return Err(Error::consistency(format!("cell ({s}, {r}) outside {} slots", self.slots())));
        }
        while hi >= self.k {
            self.grow();
        }
        self.tally(p, s, r, 1);
        self.assign[p] = Some((s, r));
        Ok(())
    }

    /// Take pair `p` out of the counts. In hdp mode communities left empty are
    /// deleted immediately.
    pub fn remove_pair(&mut self, p: usize) -> Result<Removal> {
        let (s, r) = self
            .assign
            .get(p)
            .copied()
            .flatten()
            .ok_or_else(|| Error::consistency(format!("pair {p} is not assigned")))?;
        self.tally(p, s, r, -1);
        self.assign[p] = None;
        let mut emptied = Vec::new();
        if self.mode == CommunityMode::Hdp {
            let (hi, lo) = (s.max(r), s.min(r));
            for c in [hi, lo] {
                if !emptied.contains(&c) && self.size[c] == 0 {
                    self.delete(c);
                    emptied.push(c);
                }
            }
        }
        Ok(Removal { cell: (s, r), emptied })
    }

    /// Delete every empty community (hdp mode only), returning the deleted
    /// indices in descending order.
    pub fn drop_empty(&mut self) -> Vec<usize> {
        let mut emptied = Vec::new();
        if self.mode == CommunityMode::Hdp {
            for c in (0..self.k).rev() {
                if self.size[c] == 0 {
                    self.delete(c);
                    emptied.push(c);
                }
            }
        }
        emptied
    }

    /// Exchange the labels of communities `a` and `b` everywhere.
    pub fn swap_labels(&mut self, a: usize, b: usize) -> Result<()> {
        if a >= self.k || b >= self.k {
            return Err(Error::consistency(format!("cannot swap communities {a} and {b} of {}", self.k)));
        }
        for row in &mut self.node {
            row.swap(a, b);
        }
        for m in [&mut self.m1, &mut self.m0] {
            m.swap(a, b);
            for row in m.iter_mut() {
                row.swap(a, b);
            }
        }
        self.size.swap(a, b);
        let flip = |x: usize| if x == a { b } else if x == b { a } else { x };
        for cell in self.assign.iter_mut().flatten() {
            *cell = (flip(cell.0), flip(cell.1));
        }
        Ok(())
    }

    /// Same indicators with new link values, counts rebuilt.
    pub fn with_links(&self, links: &[bool]) -> Result<Self> {
        if links.len() != self.pairs.len() {
            return Err(Error::consistency("link list does not match pair list"));
        }
        let pairs = self.pairs.iter().zip(links).map(|(p, &link)| Pair { link, ..*p }).collect();
        Self::from_assignments(self.mode, self.k, self.n, pairs, &self.assign)
    }

    /// Posterior predictive link probability of cell `(k, l)`, optionally
    /// with pair `exclude` taken out first. Indices at or beyond `K` are empty.
    pub fn predictive_edge_prob(&self, hp: &Hyperparams, k: usize, l: usize, exclude: Option<usize>) -> f64 {
        let (mut m1, mut m0) = (self.links(k, l) as f64, self.non_links(k, l) as f64);
        if let Some(p) = exclude {
            if self.assign[p] == Some((k, l)) {
                if self.pairs[p].link {
                    m1 -= 1.0;
                } else {
                    m0 -= 1.0;
                }
            }
        }
        (m1 + hp.lambda1) / (m1 + m0 + hp.lambda1 + hp.lambda2)
    }

    /// Log marginal likelihood of the observed links with every block
    /// probability integrated out.
    pub fn collapsed_edge_loglik(&self, hp: &Hyperparams) -> f64 {
        let prior = ln_beta_unchecked(hp.lambda1, hp.lambda2);
        let mut total = 0.0;
        for k in 0..self.k {
            for l in 0..self.k {
                let (a, b) = (self.m1[k][l], self.m0[k][l]);
                if a + b > 0 {
                    total += ln_beta_unchecked(a as f64 + hp.lambda1, b as f64 + hp.lambda2) - prior;
                }
            }
        }
        total
    }

    /// Compare against a from-scratch recount of the indicator arrays.
    pub fn check_consistency(&self) -> Result<()> {
        let fresh = Self::from_assignments(self.mode, self.k, self.n, self.pairs.clone(), &self.assign)?;
        if fresh != *self {
            return Err(Error::consistency("incremental counts drifted from the indicator arrays"));
        }
        if self.mode == CommunityMode::Hdp {
            if let Some(c) = self.size.iter().position(|&s| s == 0) {
                if self.assign.iter().any(Option::is_some) {
                    return Err(Error::consistency(format!("community {c} is empty but not compacted")));
                }
            }
        }
        Ok(())
    }
}

/// Index of the stick interval of `pi` containing `u`: the smallest `k` with
/// `π_0 + … + π_k ≥ u`. Values past the final breakpoint (round-off) map to
/// the last nonzero entry.
pub fn stick_invert(pi: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, p) in pi.iter().enumerate() {
        acc += p;
        if acc >= u {
            return k;
        }
    }
    pi.iter().rposition(|&p| p > 0.0).unwrap_or(pi.len().saturating_sub(1))
}
