//! Combinatorial multivector fields and their dynamics.

use thiserror::Error;

use crate::complex::CellComplex;
use crate::fintop::CellSet;
use crate::homology::{conley_index_pair, BettiVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MvfViolation {
    UnknownCell(usize),
    Uncovered(usize),
    Overlap(usize),
    Empty(usize),
    NotLocallyClosed(usize),
}

impl std::fmt::Display for MvfViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MvfViolation::UnknownCell(c) => write!(f, "cell {c} is not in the complex"),
            MvfViolation::Uncovered(c) => write!(f, "cell {c} is in no multivector (partition)"),
            MvfViolation::Overlap(c) => write!(f, "cell {c} is in two multivectors (partition)"),
            MvfViolation::Empty(m) => write!(f, "multivector {m} is empty"),
            MvfViolation::NotLocallyClosed(m) => write!(f, "multivector {m} is not locally closed"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MvfError {
    #[error("invalid multivector field: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<MvfViolation>),
}

/// Checks that `mvs` partitions the cells into non-empty locally closed sets.
pub fn validate_mvf(c: &CellComplex, mvs: &[Vec<usize>]) -> Vec<MvfViolation> {
    let mut out = Vec::new();
    let mut owner = vec![usize::MAX; c.len()];
    for (m, v) in mvs.iter().enumerate() {
        if v.is_empty() {
            out.push(MvfViolation::Empty(m));
        }
        for &x in v {
            if x >= c.len() {
                out.push(MvfViolation::UnknownCell(x));
            } else if owner[x] != usize::MAX {
                out.push(MvfViolation::Overlap(x));
            } else {
                owner[x] = m;
            }
        }
    }
    out.extend(owner.iter().enumerate().filter(|(_, &o)| o == usize::MAX).map(|(x, _)| MvfViolation::Uncovered(x)));
    for (m, v) in mvs.iter().enumerate() {
        if v.iter().all(|&x| x < c.len()) && !c.poset().locally_closed(&c.poset().set(v.iter().copied())) {
            out.push(MvfViolation::NotLocallyClosed(m));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct MultivectorField {
    mv_of: Vec<usize>,
    mvs: Vec<Vec<usize>>,
    index: Vec<BettiVector>,
}

impl MultivectorField {
    pub fn new(c: &CellComplex, mvs: Vec<Vec<usize>>) -> Result<Self, MvfError> {
        let v = validate_mvf(c, &mvs);
        if !v.is_empty() {
            return Err(MvfError::Invalid(v));
        }
        let mut mvs = mvs;
        for m in &mut mvs {
            m.sort_unstable();
        }
        let mut mv_of = vec![0; c.len()];
        for (m, v) in mvs.iter().enumerate() {
            for &x in v {
                mv_of[x] = m;
            }
        }
        let idx = |v: &Vec<usize>| conley_index_pair(c, &c.poset().set(v.iter().copied())).expect("validated multivector is locally closed");
        #[cfg(feature = "parallel")]
        let index = {
            use rayon::prelude::*;
            mvs.par_iter().map(idx).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let index = mvs.iter().map(idx).collect();
        Ok(MultivectorField { mv_of, mvs, index })
    }

    /// Multivector field from cell-id lists.
    pub fn from_ids<S: AsRef<str>>(c: &CellComplex, mvs: &[Vec<S>]) -> Result<Self, crate::formats::FormatError> {
        let mut out = Vec::with_capacity(mvs.len());
        for m in mvs {
            let mut v = Vec::with_capacity(m.len());
            for id in m {
                let id = id.as_ref();
                v.push(c.index_of(id).ok_or_else(|| crate::formats::FormatError::UnknownCell(id.to_string()))?);
            }
            out.push(v);
        }
        Ok(Self::new(c, out)?)
    }

    pub fn len(&self) -> usize {
        self.mvs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mvs.is_empty()
    }

    pub fn multivector_of(&self, cell: usize) -> usize {
        self.mv_of[cell]
    }

    pub fn cells(&self, m: usize) -> &[usize] {
        &self.mvs[m]
    }

    pub fn multivectors(&self) -> &[Vec<usize>] {
        &self.mvs
    }

    /// Betti vector of `(cl V, Mo V)`.
    pub fn multivector_index(&self, m: usize) -> &BettiVector {
        &self.index[m]
    }

    pub fn is_critical(&self, m: usize) -> bool {
        !self.index[m].is_zero()
    }

    pub fn is_regular(&self, m: usize) -> bool {
        self.index[m].is_zero()
    }

    /// `[σ]_V` as a set.
    pub fn class(&self, c: &CellComplex, cell: usize) -> CellSet {
        c.poset().set(self.mvs[self.mv_of[cell]].iter().copied())
    }

    /// The unique toplex in the multivector of `cell`, if there is exactly one.
    pub fn ift(&self, c: &CellComplex, cell: usize) -> Option<usize> {
        let mut it = self.mvs[self.mv_of[cell]].iter().copied().filter(|&x| c.is_toplex(x));
        match (it.next(), it.next()) {
            (Some(t), None) => Some(t),
            _ => None,
        }
    }

    pub fn is_compatible(&self, s: &CellSet) -> bool {
        s.iter().all(|x| self.mvs[self.mv_of[x]].iter().all(|&y| s.contains(y)))
    }

    /// Smallest V-compatible superset.
    pub fn compatible_hull(&self, c: &CellComplex, s: &CellSet) -> CellSet {
        let mut out = c.poset().empty_set();
        for x in s.iter() {
            for &y in &self.mvs[self.mv_of[x]] {
                out.insert(y);
            }
        }
        out
    }

    /// Appends the successors `cl σ ∪ [σ]_V` of `cell` to `out`.
    pub fn successors(&self, c: &CellComplex, cell: usize, out: &mut Vec<usize>) {
        out.extend_from_slice(c.poset().down(cell));
        out.extend_from_slice(&self.mvs[self.mv_of[cell]]);
    }
}

/// `F_V(σ) = cl σ ∪ [σ]_V`.
pub fn fv(c: &CellComplex, v: &MultivectorField, cell: usize) -> CellSet {
    let mut out = Vec::new();
    v.successors(c, cell, &mut out);
    c.poset().set(out)
}

/// The dynamics digraph restricted to a set of cells, with its SCCs.
#[derive(Debug, Clone)]
pub struct DynGraph {
    pub nodes: Vec<usize>,
    local: Vec<usize>,
    pub adj: Vec<Vec<usize>>,
    pub comp_of: Vec<usize>,
    pub comps: Vec<Vec<usize>>,
}

impl DynGraph {
    pub fn new(c: &CellComplex, v: &MultivectorField, n: &CellSet) -> Self {
        let nodes: Vec<usize> = n.iter().collect();
        let mut local = vec![usize::MAX; c.len()];
        for (i, &x) in nodes.iter().enumerate() {
            local[x] = i;
        }
        let mut buf = Vec::new();
        let adj: Vec<Vec<usize>> = nodes
            .iter()
            .map(|&x| {
                buf.clear();
                v.successors(c, x, &mut buf);
                let mut a: Vec<usize> = buf.iter().filter(|&&y| y != x && local[y] != usize::MAX).map(|&y| local[y]).collect();
                a.sort_unstable();
                a.dedup();
                a
            })
            .collect();
        let (comp_of, comps) = tarjan(&adj);
        DynGraph { nodes, local, adj, comp_of, comps }
    }

    pub fn local(&self, cell: usize) -> Option<usize> {
        self.local.get(cell).copied().filter(|&i| i != usize::MAX)
    }

    /// Cells of each component, in ambient numbering.
    pub fn component_cells(&self, k: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.comps[k].iter().map(|&i| self.nodes[i]).collect();
        v.sort_unstable();
        v
    }

    pub fn is_essential(&self, v: &MultivectorField, k: usize) -> bool {
        let cells = &self.comps[k];
        let first = v.multivector_of(self.nodes[cells[0]]);
        cells.iter().any(|&i| v.is_critical(v.multivector_of(self.nodes[i]))) || cells.iter().any(|&i| v.multivector_of(self.nodes[i]) != first)
    }

    /// Local nodes reachable from `start` (inclusive).
    pub fn forward(&self, start: &[usize]) -> Vec<bool> {
        reach(&self.adj, start)
    }

    pub fn backward(&self, start: &[usize]) -> Vec<bool> {
        let mut radj = vec![Vec::new(); self.adj.len()];
        for (i, a) in self.adj.iter().enumerate() {
            for &j in a {
                radj[j].push(i);
            }
        }
        reach(&radj, start)
    }
}

fn reach(adj: &[Vec<usize>], start: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<usize> = start.to_vec();
    for &s in start {
        seen[s] = true;
    }
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

/// Iterative Tarjan. Components come out in reverse topological order
/// (sinks first); each component's members are sorted.
pub fn tarjan(adj: &[Vec<usize>]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp_of = vec![usize::MAX; n];
    let mut comps = Vec::new();
    let mut counter = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp_of[w] = comps.len();
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    (comp_of, comps)
}

#[derive(Debug, Clone)]
pub struct Component {
    pub cells: CellSet,
    pub essential: bool,
}

/// SCCs of the dynamics on `n`, ordered by smallest cell.
pub fn essential_components(c: &CellComplex, v: &MultivectorField, n: &CellSet) -> Vec<Component> {
    let g = DynGraph::new(c, v, n);
    let mut out: Vec<Component> =
        (0..g.comps.len()).map(|k| Component { cells: c.poset().set(g.component_cells(k)), essential: g.is_essential(v, k) }).collect();
    out.sort_by_key(|comp| comp.cells.iter().next());
    out
}

/// Cells on a path inside `n` from an essential component to an essential component.
pub fn invariant_part(c: &CellComplex, v: &MultivectorField, n: &CellSet) -> CellSet {
    let g = DynGraph::new(c, v, n);
    let seeds: Vec<usize> = (0..g.comps.len()).filter(|&k| g.is_essential(v, k)).flat_map(|k| g.comps[k].iter().copied()).collect();
    let f = g.forward(&seeds);
    let b = g.backward(&seeds);
    c.poset().set((0..g.nodes.len()).filter(|&i| f[i] && b[i]).map(|i| g.nodes[i]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolationReport {
    pub isolated: bool,
    pub diagnostics: Vec<String>,
}

/// Isolation check with isolating set `n` (default `cl s`).
pub fn is_isolated_invariant(c: &CellComplex, v: &MultivectorField, s: &CellSet, n: Option<&CellSet>) -> IsolationReport {
    let p = c.poset();
    let mut diagnostics = Vec::new();
    if !p.locally_closed(s) {
        diagnostics.push("not locally closed".to_string());
    }
    if !v.is_compatible(s) {
        diagnostics.push("not V-compatible".to_string());
    }
    let inv = invariant_part(c, v, s);
    if &inv != s {
        let missing: Vec<&str> = s.difference(&inv).iter().take(8).map(|x| c.id(x)).collect();
        diagnostics.push(format!("not invariant; cells without essential solution: {}", missing.join(",")));
    }
    let cl = p.cl(s);
    let n = n.cloned().unwrap_or_else(|| cl.clone());
    if !s.is_subset(&n) {
        diagnostics.push("isolating set does not contain the set".to_string());
    } else {
        // paths S -> (N \ S)+ -> S
        let g = DynGraph::new(c, v, &n);
        let mut exits = Vec::new();
        for x in s.iter() {
            let i = g.local(x).expect("member of isolating set");
            exits.extend(g.adj[i].iter().copied().filter(|&j| !s.contains(g.nodes[j])));
        }
        let mut restricted = g.adj.clone();
        for (i, a) in restricted.iter_mut().enumerate() {
            if s.contains(g.nodes[i]) {
                a.clear();
            }
        }
        let seen = reach(&restricted, &exits);
        let back = (0..g.nodes.len()).filter(|&i| seen[i] && !s.contains(g.nodes[i])).find(|&i| g.adj[i].iter().any(|&j| s.contains(g.nodes[j])));
        if let Some(i) = back {
            diagnostics.push(format!("path leaves the set and returns through {}", c.id(g.nodes[i])));
        }
    }
    IsolationReport { isolated: diagnostics.is_empty(), diagnostics }
}

#[derive(Debug, Clone)]
pub struct MorseSet {
    pub cells: CellSet,
    /// `None` when the set is not locally closed (possible when `n` is not).
    pub index: Option<BettiVector>,
    pub isolated: bool,
}

#[derive(Debug, Clone)]
pub struct MorseDecomposition {
    pub sets: Vec<MorseSet>,
    /// `(i, j)`: set `j` is reachable from set `i` (transitively reduced).
    pub edges: Vec<(usize, usize)>,
}

/// Morse sets are the essential SCCs of the dynamics on `n`.
pub fn morse_decomposition(c: &CellComplex, v: &MultivectorField, n: &CellSet) -> MorseDecomposition {
    let g = DynGraph::new(c, v, n);
    let mut ess: Vec<usize> = (0..g.comps.len()).filter(|&k| g.is_essential(v, k)).collect();
    ess.sort_by_key(|&k| g.component_cells(k)[0]);
    let pos: std::collections::HashMap<usize, usize> = ess.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let m = ess.len();
    // reach[k]: Morse sets reachable from component k (comps are sinks first)
    let words = m.div_ceil(64).max(1);
    let mut reach_from: Vec<Vec<u64>> = vec![vec![0; words]; g.comps.len()];
    for k in 0..g.comps.len() {
        let mut acc = vec![0u64; words];
        for &i in &g.comps[k] {
            for &j in &g.adj[i] {
                let kj = g.comp_of[j];
                if kj != k {
                    for w in 0..words {
                        acc[w] |= reach_from[kj][w];
                    }
                    if let Some(&t) = pos.get(&kj) {
                        acc[t / 64] |= 1 << (t % 64);
                    }
                }
            }
        }
        reach_from[k] = acc;
    }
    let reaches = |i: usize, j: usize| reach_from[ess[i]][j / 64] >> (j % 64) & 1 == 1;
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i != j && reaches(i, j) && !(0..m).any(|k| k != i && k != j && reaches(i, k) && reaches(k, j)) {
                edges.push((i, j));
            }
        }
    }
    let build = |k: usize| {
        let cells = c.poset().set(g.component_cells(k));
        let index = conley_index_pair(c, &cells).ok();
        let isolated = is_isolated_invariant(c, v, &cells, None).isolated;
        MorseSet { cells, index, isolated }
    };
    #[cfg(feature = "parallel")]
    let sets = {
        use rayon::prelude::*;
        ess.par_iter().map(|&k| build(k)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let sets = ess.iter().map(|&k| build(k)).collect();
    MorseDecomposition { sets, edges }
}
