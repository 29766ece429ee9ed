//! Finite T0 spaces as posets.
//!
//! Open sets are up-sets, closed sets are down-sets. Every [`CellSet`] is
//! tagged with the poset it was created from, so mixing sets of different
//! posets is caught at the call boundary.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("cell set belongs to a different poset")]
    AmbientMismatch,
    #[error("element {0} is not in the poset")]
    ForeignElement(usize),
    #[error("order relation has a cycle through element {0}")]
    Cycle(usize),
    #[error("set is not contained in the reference subspace")]
    NotSubset,
    #[error("element {0} is not in the given set")]
    NotMember(usize),
}

/// Subset of a finite poset, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CellSet {
    ambient: u64,
    n: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for CellSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl CellSet {
    fn empty(ambient: u64, n: usize) -> Self {
        CellSet { ambient, n, bits: vec![0; n.div_ceil(64)] }
    }

    pub fn universe_len(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.n && self.bits[x / 64] >> (x % 64) & 1 == 1
    }

    /// Inserts `x`; panics when `x` is outside the ambient poset.
    pub fn insert(&mut self, x: usize) -> bool {
        assert!(x < self.n, "element {x} outside ambient poset");
        let had = self.contains(x);
        self.bits[x / 64] |= 1 << (x % 64);
        !had
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let had = self.contains(x);
        if had {
            self.bits[x / 64] &= !(1 << (x % 64));
        }
        had
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + t)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn same_ambient(&self, other: &CellSet) -> bool {
        self.ambient == other.ambient
    }

    fn zip(&self, other: &CellSet, f: impl Fn(u64, u64) -> u64) -> CellSet {
        assert!(self.same_ambient(other), "cell sets from different posets");
        CellSet { ambient: self.ambient, n: self.n, bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &CellSet) -> CellSet {
        self.zip(other, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.same_ambient(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &CellSet) -> bool {
        assert!(self.same_ambient(other), "cell sets from different posets");
        self.bits.iter().zip(&other.bits).any(|(&a, &b)| a & b != 0)
    }

    pub fn complement(&self) -> CellSet {
        let mut c = CellSet { ambient: self.ambient, n: self.n, bits: self.bits.iter().map(|w| !w).collect() };
        if !self.n.is_multiple_of(64) {
            let last = c.bits.len() - 1;
            c.bits[last] &= (1u64 << (self.n % 64)) - 1;
        }
        c
    }
}

/// Finite poset given by a generating relation, with cached down- and up-sets.
#[derive(Debug, Clone)]
pub struct FinitePoset {
    id: u64,
    below: Vec<Vec<usize>>,
    above: Vec<Vec<usize>>,
    down: Vec<Vec<usize>>,
    up: Vec<Vec<usize>>,
}

impl FinitePoset {
    /// Builds the poset on `0..n` from `below[x]`, the elements directly under `x`.
    /// The order is the reflexive-transitive closure of that relation.
    pub fn from_covers(below: Vec<Vec<usize>>) -> Result<Self, PosetError> {
        let n = below.len();
        let mut below = below;
        for (x, bs) in below.iter_mut().enumerate() {
            if let Some(&b) = bs.iter().find(|&&b| b >= n) {
                return Err(PosetError::ForeignElement(b));
            }
            if bs.contains(&x) {
                return Err(PosetError::Cycle(x));
            }
            bs.sort_unstable();
            bs.dedup();
        }
        // Kahn order from minimal elements upward.
        let mut above = vec![Vec::new(); n];
        for (x, bs) in below.iter().enumerate() {
            for &b in bs {
                above[b].push(x);
            }
        }
        let mut indeg: Vec<usize> = below.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&x| indeg[x] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &a in &above[x] {
                indeg[a] -= 1;
                if indeg[a] == 0 {
                    queue.push_back(a);
                }
            }
        }
        if order.len() < n {
            let x = (0..n).find(|&x| indeg[x] > 0).unwrap_or(0);
            return Err(PosetError::Cycle(x));
        }
        let mut down: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &x in &order {
            let mut d = vec![x];
            for &b in &below[x] {
                d.extend_from_slice(&down[b]);
            }
            d.sort_unstable();
            d.dedup();
            down[x] = d;
        }
        let mut up: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (x, d) in down.iter().enumerate() {
            for &y in d {
                up[y].push(x);
            }
        }
        Ok(FinitePoset { id: NEXT_ID.fetch_add(1, Ordering::Relaxed), below, above, down, up })
    }

    pub fn len(&self) -> usize {
        self.below.len()
    }

    pub fn is_empty(&self) -> bool {
        self.below.is_empty()
    }

    /// Elements given as generators directly below `x`.
    pub fn below(&self, x: usize) -> &[usize] {
        &self.below[x]
    }

    pub fn above(&self, x: usize) -> &[usize] {
        &self.above[x]
    }

    /// Sorted down-set of `x`, including `x`.
    pub fn down(&self, x: usize) -> &[usize] {
        &self.down[x]
    }

    /// Sorted up-set of `x`, including `x`.
    pub fn up(&self, x: usize) -> &[usize] {
        &self.up[x]
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.down[b].binary_search(&a).is_ok()
    }

    pub fn empty_set(&self) -> CellSet {
        CellSet::empty(self.id, self.len())
    }

    pub fn full_set(&self) -> CellSet {
        self.empty_set().complement()
    }

    pub fn set_of<I: IntoIterator<Item = usize>>(&self, items: I) -> Result<CellSet, PosetError> {
        let mut s = self.empty_set();
        for x in items {
            if x >= self.len() {
                return Err(PosetError::ForeignElement(x));
            }
            s.insert(x);
        }
        Ok(s)
    }

    /// Like [`set_of`](Self::set_of) but panics on out-of-range elements.
    pub fn set<I: IntoIterator<Item = usize>>(&self, items: I) -> CellSet {
        self.set_of(items).expect("element outside poset")
    }

    pub fn owns(&self, a: &CellSet) -> bool {
        a.ambient == self.id
    }

    fn check(&self, a: &CellSet) -> Result<(), PosetError> {
        if self.owns(a) {
            Ok(())
        } else {
            Err(PosetError::AmbientMismatch)
        }
    }

    pub fn closure(&self, a: &CellSet) -> Result<CellSet, PosetError> {
        self.check(a)?;
        Ok(self.cl(a))
    }

    pub fn opn(&self, a: &CellSet) -> Result<CellSet, PosetError> {
        self.check(a)?;
        Ok(self.star(a))
    }

    pub fn mouth(&self, a: &CellSet) -> Result<CellSet, PosetError> {
        self.check(a)?;
        Ok(self.mo(a))
    }

    pub fn is_locally_closed(&self, a: &CellSet) -> Result<bool, PosetError> {
        self.check(a)?;
        Ok(self.locally_closed(a))
    }

    /// Down-set of `a`. Panics on foreign sets.
    pub fn cl(&self, a: &CellSet) -> CellSet {
        assert!(self.owns(a), "cell set from a different poset");
        let mut s = self.empty_set();
        for x in a.iter() {
            if !s.contains(x) {
                for &y in &self.down[x] {
                    s.insert(y);
                }
            }
        }
        s
    }

    /// Up-set of `a`. Panics on foreign sets.
    pub fn star(&self, a: &CellSet) -> CellSet {
        assert!(self.owns(a), "cell set from a different poset");
        let mut s = self.empty_set();
        for x in a.iter() {
            if !s.contains(x) {
                for &y in &self.up[x] {
                    s.insert(y);
                }
            }
        }
        s
    }

    pub fn mo(&self, a: &CellSet) -> CellSet {
        self.cl(a).difference(a)
    }

    pub fn is_closed(&self, a: &CellSet) -> bool {
        a.iter().all(|x| self.down[x].iter().all(|&y| a.contains(y)))
    }

    pub fn is_open(&self, a: &CellSet) -> bool {
        a.iter().all(|x| self.up[x].iter().all(|&y| a.contains(y)))
    }

    pub fn locally_closed(&self, a: &CellSet) -> bool {
        self.is_closed(&self.mo(a))
    }

    fn neighbours<'a>(&'a self, x: usize, a: &'a CellSet) -> impl Iterator<Item = usize> + 'a {
        self.down[x].iter().chain(&self.up[x]).copied().filter(move |&y| y != x && a.contains(y))
    }

    /// Fence-connected components of `a`, ordered by their smallest element.
    pub fn connected_components(&self, a: &CellSet) -> Result<Vec<CellSet>, PosetError> {
        self.check(a)?;
        let mut seen = self.empty_set();
        let mut comps = Vec::new();
        for s in a.iter() {
            if seen.contains(s) {
                continue;
            }
            let mut comp = self.empty_set();
            let mut stack = vec![s];
            seen.insert(s);
            while let Some(x) = stack.pop() {
                comp.insert(x);
                for y in self.neighbours(x, a) {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            comps.push(comp);
        }
        Ok(comps)
    }

    pub fn is_connected(&self, a: &CellSet) -> bool {
        matches!(self.connected_components(a), Ok(c) if c.len() == 1)
    }

    /// Length of a shortest fence inside `a` from `s` to `t`; `None` when unreachable.
    pub fn fence_distance(&self, a: &CellSet, s: usize, t: usize) -> Result<Option<usize>, PosetError> {
        self.check(a)?;
        for x in [s, t] {
            if !a.contains(x) {
                return Err(PosetError::NotMember(x));
            }
        }
        Ok(self.fence_distances(a, &self.set([s]))[t])
    }

    /// Multi-source BFS distances inside `a` from the members of `sources`.
    pub fn fence_distances(&self, a: &CellSet, sources: &CellSet) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        for s in sources.iter().filter(|&s| a.contains(s)) {
            dist[s] = Some(0);
            queue.push_back(s);
        }
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap_or(0) + 1;
            for y in self.neighbours(x, a) {
                if dist[y].is_none() {
                    dist[y] = Some(d);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    fn check_rel(&self, r: &CellSet, b: &CellSet) -> Result<(), PosetError> {
        self.check(r)?;
        self.check(b)?;
        if b.is_subset(r) {
            Ok(())
        } else {
            Err(PosetError::NotSubset)
        }
    }

    /// Closure of `b` in the subspace `r`.
    pub fn cl_rel(&self, r: &CellSet, b: &CellSet) -> Result<CellSet, PosetError> {
        self.check_rel(r, b)?;
        Ok(self.cl(b).intersection(r))
    }

    pub fn opn_rel(&self, r: &CellSet, b: &CellSet) -> Result<CellSet, PosetError> {
        self.check_rel(r, b)?;
        Ok(self.star(b).intersection(r))
    }

    /// Interior of `b` in the subspace `r`.
    pub fn int_rel(&self, r: &CellSet, b: &CellSet) -> Result<CellSet, PosetError> {
        self.check_rel(r, b)?;
        let mut s = self.empty_set();
        for x in b.iter() {
            if self.up[x].iter().all(|&y| !r.contains(y) || b.contains(y)) {
                s.insert(x);
            }
        }
        Ok(s)
    }

    /// Boundary of `b` in the subspace `r`.
    pub fn bd_rel(&self, r: &CellSet, b: &CellSet) -> Result<CellSet, PosetError> {
        let c = self.cl_rel(r, b)?;
        let rest = r.difference(b);
        Ok(c.intersection(&self.cl(&rest).intersection(r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn edge() -> FinitePoset {
        // a=0, b=1, ab=2
        FinitePoset::from_covers(vec![vec![], vec![], vec![0, 1]]).unwrap()
    }

    // v0,v1,v2 = 0,1,2; e_i = 3+i joins v_i and v_{i+1}
    fn circle() -> FinitePoset {
        FinitePoset::from_covers(vec![vec![], vec![], vec![], vec![0, 1], vec![1, 2], vec![2, 0]]).unwrap()
    }

    #[test]
    fn edge_operators() {
        let p = edge();
        assert_eq!(p.cl(&p.set([2])).to_vec(), vec![0, 1, 2]);
        assert!(p.cl(&p.empty_set()).is_empty());
        assert_eq!(p.cl(&p.set([0])).to_vec(), vec![0]);
        assert_eq!(p.star(&p.set([0])).to_vec(), vec![0, 2]);
        assert_eq!(p.star(&p.set([2])).to_vec(), vec![2]);
        assert_eq!(p.mo(&p.set([2])).to_vec(), vec![0, 1]);
        assert!(p.mo(&p.set([0])).is_empty());
        assert_eq!(p.mo(&p.set([0, 2])).to_vec(), vec![1]);
        assert!(p.locally_closed(&p.set([2])));
        assert!(p.locally_closed(&p.set([0, 2])));
    }

    #[test]
    fn components() {
        let p = edge();
        assert_eq!(p.connected_components(&p.set([0, 1])).unwrap().len(), 2);
        assert_eq!(p.connected_components(&p.set([0, 1, 2])).unwrap().len(), 1);
        assert!(p.connected_components(&p.empty_set()).unwrap().is_empty());
    }

    #[test]
    fn fences_on_circle() {
        let p = circle();
        let all = p.full_set();
        assert_eq!(p.fence_distance(&all, 0, 0).unwrap(), Some(0));
        assert_eq!(p.fence_distance(&all, 0, 1).unwrap(), Some(2));
        let two = p.set([0, 1]);
        assert_eq!(p.fence_distance(&two, 0, 1).unwrap(), None);
        assert!(p.fence_distance(&two, 0, 4).is_err());
    }

    #[test]
    fn relative_operators_on_circle() {
        let p = circle();
        let r = p.full_set().difference(&p.set([1]));
        let b = p.set([0, 3]);
        assert_eq!(p.cl_rel(&r, &b).unwrap().to_vec(), vec![0, 3]);
        assert_eq!(p.int_rel(&r, &b).unwrap().to_vec(), vec![3]);
        assert_eq!(p.opn_rel(&r, &p.set([0])).unwrap().to_vec(), vec![0, 3, 5]);
        assert_eq!(p.bd_rel(&r, &b).unwrap().to_vec(), vec![0]);
        assert_eq!(p.cl_rel(&p.set([0]), &b), Err(PosetError::NotSubset));
    }

    #[test]
    fn locally_closed_scan() {
        // every subset of the circle is locally closed: mouths only hold vertices
        let p = circle();
        assert!((0u32..64).all(|m| p.locally_closed(&p.set((0..6).filter(|i| m >> i & 1 == 1)))));
        // triangle: v0,v1,v2, e01,e02,e12, t
        let t = FinitePoset::from_covers(vec![vec![], vec![], vec![], vec![0, 1], vec![0, 2], vec![1, 2], vec![3, 4, 5]]).unwrap();
        let witness = (0u32..128).map(|m| t.set((0..7).filter(|i| m >> i & 1 == 1))).find(|s| !t.locally_closed(s)).unwrap();
        assert_eq!(witness.to_vec(), vec![0, 6]);
    }

    #[test]
    fn foreign_sets_rejected() {
        let p = edge();
        let q = edge();
        assert_eq!(p.closure(&q.set([0])), Err(PosetError::AmbientMismatch));
        assert_eq!(p.set_of([7]), Err(PosetError::ForeignElement(7)));
    }

    #[test]
    fn cycle_rejected() {
        assert!(matches!(FinitePoset::from_covers(vec![vec![1], vec![0]]), Err(PosetError::Cycle(_))));
    }
}
