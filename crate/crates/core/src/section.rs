//! Combinatorial Poincaré sections and their shift sequences.

use serde::Serialize;
use thiserror::Error;

use crate::complex::CellComplex;
use crate::fintop::CellSet;
use crate::mvf::{is_isolated_invariant, DynGraph, MultivectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionCondition {
    /// `H = cl(A ∩ Mo P)` is empty.
    EmptyH,
    /// `R = cl A \ H` is not fence-connected.
    RDisconnected,
    /// An essential component lives in `cl A \ (H ∪ Mo A)`.
    EssentialAvoidsH,
    /// `H` meets `cl Bd_R P̄`.
    BoundaryMeetsH,
    /// `Opn H \ cl P` is empty, so the threshold is undefined.
    NoThreshold,
    /// Some shift carries no toplex.
    ShiftWithoutToplex,
}

impl std::fmt::Display for SectionCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SectionCondition::EmptyH => "H is empty",
            SectionCondition::RDisconnected => "R is not connected",
            SectionCondition::EssentialAvoidsH => "an essential solution in cl A avoids H and Mo A",
            SectionCondition::BoundaryMeetsH => "H meets the closure of the relative boundary of P-bar",
            SectionCondition::NoThreshold => "Opn H minus cl P is empty",
            SectionCondition::ShiftWithoutToplex => "a shift contains no toplex",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SectionError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("section rejected: {condition} ({detail})")]
    Rejected { condition: SectionCondition, detail: String },
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

fn reject(condition: SectionCondition, detail: impl Into<String>) -> SectionError {
    SectionError::Rejected { condition, detail: detail.into() }
}

#[derive(Debug, Clone)]
pub struct SectionData {
    pub a: CellSet,
    pub p: CellSet,
    pub h: CellSet,
    pub r: CellSet,
    pub pbar: CellSet,
    /// Fence distance to `P̄` inside `R`, indexed by cell.
    pub dist: Vec<Option<usize>>,
    /// Lyapunov values on `R`, indexed by cell.
    pub lyap: Vec<Option<usize>>,
    pub nbar: usize,
    /// `L_0, ..., L_kmax`.
    pub levels: Vec<CellSet>,
    /// `A_0, ..., A_{kmax-1}`.
    pub shifts: Vec<CellSet>,
    pub kmax: usize,
}

impl SectionData {
    pub fn l(&self, cell: usize) -> Option<usize> {
        self.lyap[cell]
    }
}

/// Validates `p` as a section of `a` and runs the full shift construction.
pub fn build_section(c: &CellComplex, v: &MultivectorField, a: &CellSet, p: &CellSet) -> Result<SectionData, SectionError> {
    let pos = c.poset();
    if !pos.owns(a) || !pos.owns(p) {
        return Err(SectionError::Precondition("sets belong to another complex".into()));
    }
    if p.is_empty() {
        return Err(SectionError::Precondition("P is empty".into()));
    }
    if !p.is_subset(a) {
        return Err(SectionError::Precondition("P is not contained in A".into()));
    }
    if !pos.locally_closed(p) {
        return Err(SectionError::Precondition("P is not locally closed".into()));
    }
    if !v.is_compatible(p) {
        return Err(SectionError::Precondition("P is not V-compatible".into()));
    }
    let iso = is_isolated_invariant(c, v, a, None);
    if !iso.isolated {
        return Err(SectionError::Precondition(format!("A is not an isolated invariant set: {}", iso.diagnostics.join("; "))));
    }
    let cla = pos.cl(a);
    let h = pos.cl(&a.intersection(&pos.mo(p)));
    if h.is_empty() {
        return Err(reject(SectionCondition::EmptyH, "A ∩ Mo P is empty"));
    }
    let r = cla.difference(&h);
    if !pos.is_connected(&r) {
        return Err(reject(SectionCondition::RDisconnected, format!("{} components", pos.connected_components(&r).map(|c| c.len()).unwrap_or(0))));
    }
    let moa = pos.mo(a);
    let rest = cla.difference(&h.union(&moa));
    let g = DynGraph::new(c, v, &rest);
    if let Some(k) = (0..g.comps.len()).find(|&k| g.is_essential(v, k)) {
        return Err(reject(SectionCondition::EssentialAvoidsH, format!("component through {}", c.id(g.nodes[g.comps[k][0]]))));
    }
    let pbar = pos.cl(p).intersection(&r);
    let bd = pos.bd_rel(&r, &pbar).map_err(|e| SectionError::Internal(e.to_string()))?;
    let meet = pos.cl(&bd).intersection(&h);
    if let Some(x) = meet.iter().next() {
        return Err(reject(SectionCondition::BoundaryMeetsH, format!("at {}", c.id(x))));
    }
    let dist = pos.fence_distances(&r, &pbar);
    let mut sd =
        SectionData { a: a.clone(), p: p.clone(), h, r, pbar, dist, lyap: Vec::new(), nbar: 0, levels: Vec::new(), shifts: Vec::new(), kmax: 0 };
    sd.lyap = lyapunov(c, v, &sd);
    shifts(c, v, &mut sd)?;
    Ok(sd)
}

/// `L(τ)`: the largest distance to `P̄` met along dynamics paths in `R` from `τ`.
pub fn lyapunov(c: &CellComplex, v: &MultivectorField, sd: &SectionData) -> Vec<Option<usize>> {
    let g = DynGraph::new(c, v, &sd.r);
    let mut comp_val = vec![0usize; g.comps.len()];
    // Tarjan emits sinks first, so successors are final before their sources.
    for k in 0..g.comps.len() {
        let mut m = 0;
        for &i in &g.comps[k] {
            m = m.max(sd.dist[g.nodes[i]].unwrap_or(0));
            for &j in &g.adj[i] {
                if g.comp_of[j] != k {
                    m = m.max(comp_val[g.comp_of[j]]);
                }
            }
        }
        comp_val[k] = m;
    }
    let mut out = vec![None; c.len()];
    for (i, &x) in g.nodes.iter().enumerate() {
        out[x] = Some(comp_val[g.comp_of[i]]);
    }
    out
}

/// Level recursion and shifts; fills `nbar`, `levels`, `shifts`, `kmax`.
pub fn shifts(c: &CellComplex, _v: &MultivectorField, sd: &mut SectionData) -> Result<(), SectionError> {
    let pos = c.poset();
    let cla = pos.cl(&sd.a);
    let clp = pos.cl(&sd.p);
    let opn_h = pos.star(&sd.h).intersection(&cla).difference(&clp);
    let nbar = opn_h
        .iter()
        .map(|x| sd.lyap[x].ok_or_else(|| SectionError::Internal(format!("{} outside R", c.id(x)))))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .min()
        .ok_or_else(|| reject(SectionCondition::NoThreshold, "no cell above H outside cl P"))?;
    let mut levels = vec![pos.empty_set(), sd.pbar.clone()];
    let kmax;
    loop {
        let k = levels.len();
        let prev = &levels[k - 1];
        if prev == &sd.r {
            return Err(SectionError::Internal(format!("level {} already equals R before the stop rule", k - 1)));
        }
        let b: Vec<usize> = sd.r.difference(prev).iter().filter(|&x| pos.down(x).iter().any(|&y| prev.contains(y))).collect();
        let nk = b.iter().map(|&x| sd.lyap[x].unwrap_or(0)).max().ok_or_else(|| SectionError::Internal(format!("B_{k} is empty")))?;
        if nk >= nbar {
            levels.push(sd.r.clone());
            kmax = k;
            break;
        }
        let next = pos.set(sd.r.iter().filter(|&x| sd.lyap[x].is_some_and(|l| l <= nk)));
        levels.push(next);
    }
    let mut sh = Vec::with_capacity(kmax);
    for i in 0..kmax {
        let int = pos.int_rel(&sd.r, &levels[i]).map_err(|e| SectionError::Internal(e.to_string()))?;
        sh.push(levels[i + 1].difference(&int));
    }
    sd.nbar = nbar;
    sd.levels = levels;
    sd.shifts = sh;
    sd.kmax = kmax;
    Ok(())
}

/// `A^top_i = A_{kmax-1-i} ∩ toplexes`.
pub fn toplex_coarsening(c: &CellComplex, sd: &SectionData) -> Result<Vec<Vec<usize>>, SectionError> {
    let mut out = Vec::with_capacity(sd.kmax);
    for i in 0..sd.kmax {
        let j = sd.kmax - 1 - i;
        let t = c.toplexes_in(&sd.shifts[j]);
        if t.is_empty() {
            return Err(reject(SectionCondition::ShiftWithoutToplex, format!("A_{j}")));
        }
        out.push(t);
    }
    Ok(out)
}

/// Checks the structural properties of an accepted section; returns violations.
pub fn check_properties(c: &CellComplex, v: &MultivectorField, sd: &SectionData) -> Vec<String> {
    let pos = c.poset();
    let mut out = Vec::new();
    let g = DynGraph::new(c, v, &sd.r);
    for (i, a) in g.adj.iter().enumerate() {
        for &j in a {
            let (x, y) = (g.nodes[i], g.nodes[j]);
            if sd.lyap[y] > sd.lyap[x] {
                out.push(format!("L increases along {} -> {}", c.id(x), c.id(y)));
            }
        }
    }
    for k in 0..sd.kmax {
        let lk = &sd.levels[k];
        if &pos.cl(lk).intersection(&sd.r) != lk {
            out.push(format!("L_{k} is not closed in R"));
        }
        // compatibility relative to R: multivectors are cut by H
        for x in lk.iter() {
            if v.cells(v.multivector_of(x)).iter().any(|&y| sd.r.contains(y) && !lk.contains(y)) {
                out.push(format!("L_{k} is not V-compatible at {}", c.id(x)));
                break;
            }
        }
    }
    for k in 1..=sd.kmax {
        let int = pos.int_rel(&sd.r, &sd.levels[k]).expect("levels lie in R");
        if !sd.levels[k - 1].is_subset(&int) {
            out.push(format!("L_{} is not inside int_R L_{k}", k - 1));
        }
    }
    let kmax = sd.kmax;
    for i in 1..kmax.saturating_sub(1) {
        if pos.cl(&sd.shifts[i]).intersects(&sd.h) {
            out.push(format!("cl A_{i} meets H"));
        }
    }
    for i in 0..kmax {
        for j in i + 1..kmax {
            if sd.shifts[i].intersects(&sd.shifts[j]) && j != i + 1 {
                out.push(format!("A_{i} meets A_{j}"));
            }
        }
        let j = (i + 1) % kmax;
        if !pos.cl(&sd.shifts[i]).intersects(&pos.cl(&sd.shifts[j])) {
            out.push(format!("cl A_{i} misses cl A_{j}"));
        }
    }
    out
}

/// Smallest locally closed, V-compatible superset of `s` inside `a`.
pub fn section_hull(c: &CellComplex, v: &MultivectorField, a: &CellSet, s: &CellSet) -> CellSet {
    let pos = c.poset();
    let mut cur = s.intersection(a);
    loop {
        let comp = v.compatible_hull(c, &cur).intersection(a);
        let next = pos.cl(&comp).intersection(&pos.star(&comp)).intersection(a);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Outcome of an accepted, usable section.
#[derive(Debug, Clone)]
pub struct ProposedSection {
    pub data: SectionData,
    pub coarsening: Vec<Vec<usize>>,
}

/// Candidate sections: toplex-adjacency balls of growing radius around a
/// few seed toplexes, closed up to locally closed V-compatible sets.
pub fn candidate_sections(c: &CellComplex, v: &MultivectorField, a: &CellSet, max_radius: usize, max_seeds: usize) -> Vec<CellSet> {
    let pos = c.poset();
    let tops = c.toplexes_in(a);
    if tops.is_empty() {
        return Vec::new();
    }
    let step = tops.len().div_ceil(max_seeds.max(1)).max(1);
    let seeds: Vec<usize> = tops.iter().copied().step_by(step).collect();
    // toplex adjacency through shared cells inside cl A
    let cla = pos.cl(a);
    let top_set = pos.set(tops.iter().copied());
    let neighbours = |t: usize| -> Vec<usize> {
        let mut n: Vec<usize> = pos
            .down(t)
            .iter()
            .filter(|&&f| cla.contains(f))
            .flat_map(|&f| pos.up(f).iter().copied())
            .filter(|&u| u != t && top_set.contains(u))
            .collect();
        n.sort_unstable();
        n.dedup();
        n
    };
    let mut out: Vec<CellSet> = Vec::new();
    for radius in 0..=max_radius {
        for &s in &seeds {
            let mut seen = pos.set([s]);
            let mut frontier = vec![s];
            for _ in 0..radius {
                let mut nf = Vec::new();
                for &t in &frontier {
                    for u in neighbours(t) {
                        if seen.insert(u) {
                            nf.push(u);
                        }
                    }
                }
                frontier = nf;
            }
            let hull = section_hull(c, v, a, &seen);
            if !hull.is_empty() && &hull != a && !out.contains(&hull) {
                out.push(hull);
            }
        }
    }
    out
}

/// First candidate that yields an accepted section with `kmax ≥ 3`, a toplex
/// in every shift, and no property violations.
pub fn propose_section(c: &CellComplex, v: &MultivectorField, a: &CellSet) -> Result<ProposedSection, SectionError> {
    let mut last = SectionError::Precondition("no candidate section".into());
    // a single multivector is tried first
    let mut candidates: Vec<CellSet> = Vec::new();
    for t in c.toplexes_in(a).into_iter().take(4) {
        let h = section_hull(c, v, a, &v.class(c, t));
        if !candidates.contains(&h) {
            candidates.push(h);
        }
    }
    for h in candidate_sections(c, v, a, 12, 8) {
        if !candidates.contains(&h) {
            candidates.push(h);
        }
    }
    for p in candidates {
        match build_section(c, v, a, &p) {
            Ok(sd) => {
                if sd.kmax < 3 {
                    last = SectionError::Precondition(format!("kmax = {} < 3", sd.kmax));
                    continue;
                }
                match toplex_coarsening(c, &sd) {
                    Ok(coarsening) if check_properties(c, v, &sd).is_empty() => return Ok(ProposedSection { data: sd, coarsening }),
                    Ok(_) => last = SectionError::Internal("property violation".into()),
                    Err(e) => last = e,
                }
            }
            Err(SectionError::Precondition(m)) if m.starts_with("A is not") => return Err(SectionError::Precondition(m)),
            Err(e) => last = e,
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::CwCell;

    fn circle() -> (CellComplex, MultivectorField) {
        let mut cells: Vec<CwCell> = (0..3).map(|i| CwCell { id: format!("v{i}"), dim: 0, facets: vec![] }).collect();
        for i in 0..3 {
            cells.push(CwCell { id: format!("e{i}"), dim: 1, facets: vec![(format!("v{i}"), -1), (format!("v{}", (i + 1) % 3), 1)] });
        }
        let c = CellComplex::from_cw(cells).unwrap();
        let v = MultivectorField::from_ids(&c, &[vec!["v0", "e0"], vec!["v1", "e1"], vec!["v2", "e2"]]).unwrap();
        (c, v)
    }

    #[test]
    fn circle_trace() {
        let (c, v) = circle();
        let a = c.poset().full_set();
        let p = c.set_of_ids(&["v0", "e0"]).unwrap();
        let sd = build_section(&c, &v, &a, &p).unwrap();
        assert_eq!(c.ids_of(&sd.h), vec!["v1"]);
        assert_eq!(c.ids_of(&sd.pbar), vec!["v0", "e0"]);
        let l = |id: &str| sd.l(c.index_of(id).unwrap());
        assert_eq!([l("v0"), l("e0"), l("e2"), l("v2"), l("e1")], [Some(0), Some(0), Some(2), Some(2), Some(3)]);
        assert_eq!(sd.nbar, 3);
        assert_eq!(sd.kmax, 3);
        assert_eq!(c.ids_of(&sd.levels[2]), vec!["v0", "v2", "e0", "e2"]);
        let shifts: Vec<Vec<String>> = sd.shifts.iter().map(|s| c.ids_of(s)).collect();
        assert_eq!(shifts, vec![vec!["v0", "e0"], vec!["v0", "v2", "e2"], vec!["v2", "e1"]]);
        let co: Vec<Vec<&str>> = toplex_coarsening(&c, &sd).unwrap().iter().map(|f| f.iter().map(|&x| c.id(x)).collect()).collect();
        assert_eq!(co, vec![vec!["e1"], vec!["e2"], vec!["e0"]]);
        assert!(check_properties(&c, &v, &sd).is_empty());
    }

    #[test]
    fn whole_set_is_not_a_section() {
        let (c, v) = circle();
        let a = c.poset().full_set();
        let err = build_section(&c, &v, &a, &a).unwrap_err();
        assert!(matches!(err, SectionError::Rejected { condition: SectionCondition::EmptyH, .. }));
    }

    #[test]
    fn incompatible_section_is_precondition() {
        let (c, v) = circle();
        let a = c.poset().full_set();
        let p = c.set_of_ids(&["e0"]).unwrap();
        assert!(matches!(build_section(&c, &v, &a, &p), Err(SectionError::Precondition(_))));
    }

    #[test]
    fn proposal_on_circle() {
        let (c, v) = circle();
        let a = c.poset().full_set();
        let ps = propose_section(&c, &v, &a).unwrap();
        assert_eq!(ps.data.kmax, 3);
    }
}
