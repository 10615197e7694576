use crate::error::{Error, Result};

/// Directed binary observations on `n` nodes. Entries are present, absent
/// (missing), or the diagonal, which is always missing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionMatrix {
    n: usize,
    cells: Vec<Option<bool>>,
}

impl InteractionMatrix {
    /// All entries missing.
    pub fn new(n: usize) -> Self {
        Self { n, cells: vec![None; n * n] }
    }

    pub fn from_entries<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, bool)>,
    {
        let mut m = Self::new(n);
        for (i, j, e) in entries {
            m.set(i, j, e)?;
        }
        Ok(m)
    }

    /// Every off-diagonal entry observed, values from `f(i, j)`.
    pub fn complete(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::new(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m.cells[i * n + j] = Some(f(i, j));
                }
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<bool> {
        if i >= self.n || j >= self.n {
            return None;
        }
        self.cells[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: bool) -> Result<()> {
        self.check_index(i, j)?;
        if i == j {
            return Err(Error::config(format!("self-pair ({i}, {i}) cannot be observed")));
        }
        self.cells[i * self.n + j] = Some(e);
        Ok(())
    }

    /// Mark an entry missing.
    pub fn clear(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_index(i, j)?;
        self.cells[i * self.n + j] = None;
        Ok(())
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::config(format!("pair ({i}, {j}) out of range for {} nodes", self.n)));
        }
        Ok(())
    }

    /// Observed entries in row-major order.
    pub fn observed(&self) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        let n = self.n;
        self.cells.iter().enumerate().filter_map(move |(idx, c)| c.map(|e| (idx / n, idx % n, e)))
    }

    pub fn observed_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn link_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Some(true)).count()
    }

    /// Copy with the listed entries made missing.
    pub fn without(&self, held_out: &[(usize, usize)]) -> Result<Self> {
        let mut m = self.clone();
        for &(i, j) in held_out {
            m.clear(i, j)?;
        }
        Ok(m)
    }
}

/// Subgroup label per ordered pair: 0 is independent, `d ≥ 1` selects the
/// d-th copula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupMap {
    n: usize,
    groups: usize,
    labels: Vec<u16>,
}

impl SubgroupMap {
    /// Every pair independent, with room for `groups` copula subgroups.
    pub fn new(n: usize, groups: usize) -> Result<Self> {
        if groups > u16::MAX as usize {
            return Err(Error::config(format!("too many subgroups: {groups}")));
        }
        Ok(Self { n, groups, labels: vec![0; n * n] })
    }

    pub fn independent(n: usize) -> Self {
        Self { n, groups: 0, labels: vec![0; n * n] }
    }

    /// One copula over every pair.
    pub fn full(n: usize) -> Self {
        let mut map = Self { n, groups: 1, labels: vec![1; n * n] };
        for i in 0..n {
            map.labels[i * n + i] = 0;
        }
        map
    }

    /// Pairs with both ends among the first `block` nodes get `inside`, every
    /// other pair gets `outside`.
    pub fn block(n: usize, block: usize, inside: usize, outside: usize) -> Result<Self> {
        let mut map = Self::new(n, inside.max(outside))?;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    map.set(i, j, if i < block && j < block { inside } else { outside })?;
                }
            }
        }
        Ok(map)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of copula subgroups `D`.
    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.labels[i * self.n + j] as usize
    }

    pub fn set(&mut self, i: usize, j: usize, d: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::config(format!("pair ({i}, {j}) out of range for {} nodes", self.n)));
        }
        if d > self.groups {
            return Err(Error::config(format!("subgroup {d} exceeds declared count {}", self.groups)));
        }
        if i == j && d != 0 {
            return Err(Error::config(format!("self-pair ({i}, {i}) cannot join a subgroup")));
        }
        self.labels[i * self.n + j] = d as u16;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_never_observed() {
        let mut m = InteractionMatrix::new(3);
        assert!(m.set(1, 1, true).is_err());
        let full = InteractionMatrix::complete(3, |_, _| true);
        assert_eq!(full.observed_count(), 6);
        assert_eq!(full.get(2, 2), None);
        m.set(0, 2, false).unwrap();
        assert_eq!(m.observed().collect::<Vec<_>>(), vec![(0, 2, false)]);
    }

    #[test]
    fn held_out_entries_disappear() {
        let full = InteractionMatrix::complete(4, |i, j| i < j);
        let train = full.without(&[(0, 1), (3, 2)]).unwrap();
        assert_eq!(train.observed_count(), 10);
        assert_eq!(train.get(0, 1), None);
        assert_eq!(train.link_count(), 5);
    }

    #[test]
    fn subgroup_shapes() {
        let full = SubgroupMap::full(3);
        assert_eq!((full.get(0, 1), full.get(1, 1)), (1, 0));
        let block = SubgroupMap::block(5, 2, 1, 2).unwrap();
        assert_eq!((block.get(0, 1), block.get(1, 2), block.get(4, 3)), (1, 2, 2));
        assert_eq!(block.groups(), 2);
        let mut m = SubgroupMap::new(2, 1).unwrap();
        assert!(m.set(0, 1, 2).is_err());
    }
}
