//! Random instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use cbricks::complex::{CellComplex, CwCell};
use cbricks::fintop::{CellSet, FinitePoset};
use cbricks::homology::{betti, BettiVector};
use cbricks::mvf::{fv, DynGraph, MultivectorField};
use cbricks::section::{build_section, candidate_sections, check_properties, section_hull, SectionData};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_poset<R: Rng>(rng: &mut R, max: usize) -> FinitePoset {
    let n = rng.gen_range(1..=max);
    let p = rng.gen_range(0.1..0.6);
    let below = (0..n).map(|x| (0..x).filter(|_| rng.gen_bool(p)).collect()).collect();
    FinitePoset::from_covers(below).expect("forward edges are acyclic")
}

pub fn random_subset<R: Rng>(rng: &mut R, p: &FinitePoset) -> CellSet {
    let q = rng.gen_range(0.0..1.0);
    p.set((0..p.len()).filter(|_| rng.gen_bool(q)))
}

/// Order relation by Warshall's algorithm on the generators.
pub fn order_matrix(p: &FinitePoset) -> Vec<Vec<bool>> {
    let n = p.len();
    let mut m = vec![vec![false; n]; n];
    for x in 0..n {
        m[x][x] = true;
        for &b in p.below(x) {
            m[b][x] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    m
}

pub fn brute_cl(m: &[Vec<bool>], a: &[usize]) -> Vec<usize> {
    (0..m.len()).filter(|&y| a.iter().any(|&x| m[y][x])).collect()
}

pub fn brute_opn(m: &[Vec<bool>], a: &[usize]) -> Vec<usize> {
    (0..m.len()).filter(|&y| a.iter().any(|&x| m[x][y])).collect()
}

/// Convexity: `a <= b <= c` with `a, c` in the set forces `b` in the set.
pub fn brute_locally_closed(m: &[Vec<bool>], a: &[usize]) -> bool {
    let n = m.len();
    a.iter().all(|&x| a.iter().all(|&z| (0..n).all(|y| !(m[x][y] && m[y][z]) || a.contains(&y))))
}

/// Simplicial complex on at most `max_v` vertices with at most `max_cells` cells.
pub fn random_simplicial<R: Rng>(rng: &mut R, max_v: usize, max_cells: usize) -> CellComplex {
    loop {
        let nv = rng.gen_range(2..=max_v);
        let k = rng.gen_range(1..=4);
        let mut tops = Vec::new();
        for _ in 0..k {
            let mut vs: Vec<usize> = (0..nv).collect();
            vs.shuffle(rng);
            let d = rng.gen_range(2..=nv.min(4));
            let mut s = vs[..d].to_vec();
            s.sort_unstable();
            tops.push(s);
        }
        let c = CellComplex::from_simplices(nv, &tops).expect("valid simplices");
        if c.len() <= max_cells {
            return c;
        }
    }
}

/// Cycle of `n` vertices and `n` edges.
pub fn cycle(n: usize) -> CellComplex {
    let mut cells: Vec<CwCell> = (0..n).map(|i| CwCell { id: format!("v{i}"), dim: 0, facets: vec![] }).collect();
    for i in 0..n {
        cells.push(CwCell { id: format!("e{i}"), dim: 1, facets: vec![(format!("v{i}"), -1), (format!("v{}", (i + 1) % n), 1)] });
    }
    CellComplex::from_cw(cells).expect("cycle is a valid complex")
}

/// Random partition into locally closed classes, grown by merging
/// neighbouring classes.
pub fn random_mvf<R: Rng>(rng: &mut R, c: &CellComplex) -> MultivectorField {
    let p = c.poset();
    let n = c.len();
    let mut class: Vec<usize> = (0..n).collect();
    let merges = rng.gen_range(0..=n);
    for _ in 0..merges {
        let x = rng.gen_range(0..n);
        let below = p.below(x);
        if below.is_empty() {
            continue;
        }
        let y = below[rng.gen_range(0..below.len())];
        let (cx, cy) = (class[x], class[y]);
        if cx == cy {
            continue;
        }
        let merged = p.set((0..n).filter(|&z| class[z] == cx || class[z] == cy));
        if p.locally_closed(&merged) {
            for z in class.iter_mut() {
                if *z == cy {
                    *z = cx;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen = std::collections::BTreeMap::new();
    for (x, &k) in class.iter().enumerate() {
        let g = *seen.entry(k).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(x);
    }
    MultivectorField::new(c, groups).expect("classes are locally closed")
}

/// Cycle with a rotating field: every vertex paired with its outgoing edge,
/// except a few left critical.
pub fn random_cycle_field<R: Rng>(rng: &mut R) -> (CellComplex, MultivectorField) {
    let n = rng.gen_range(3..=6);
    let c = cycle(n);
    let fwd = rng.gen_bool(0.5);
    let mut mvs = Vec::new();
    for i in 0..n {
        let v = c.index_of(&format!("v{i}")).unwrap();
        let e = if fwd { format!("e{i}") } else { format!("e{}", (i + n - 1) % n) };
        let e = c.index_of(&e).unwrap();
        if rng.gen_bool(0.85) {
            mvs.push(vec![v, e]);
        } else {
            mvs.push(vec![v]);
            mvs.push(vec![e]);
        }
    }
    (c.clone(), MultivectorField::new(&c, mvs).expect("pairs are convex"))
}

/// Rank over the rationals by fraction-free elimination in `i128`.
pub fn bareiss_rank(mut m: Vec<Vec<i128>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        for r in rank + 1..rows {
            for k in col + 1..cols {
                m[r][k] = (m[rank][col] * m[r][k] - m[r][col] * m[rank][k]) / prev;
            }
            m[r][col] = 0;
        }
        prev = m[rank][col];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Betti numbers of `(a, b)` from dense boundary matrices.
pub fn oracle_betti(c: &CellComplex, a: &CellSet, b: &CellSet) -> Vec<usize> {
    let cells: Vec<usize> = a.difference(b).iter().collect();
    let dims = c.max_dim() + 1;
    let by_dim: Vec<Vec<usize>> = (0..dims).map(|d| cells.iter().copied().filter(|&x| c.dim(x) == d).collect()).collect();
    let rank = |k: usize| -> usize {
        if k == 0 || k >= dims {
            return 0;
        }
        let rows = &by_dim[k - 1];
        let m: Vec<Vec<i128>> = rows
            .iter()
            .map(|&r| by_dim[k].iter().map(|&col| c.facets(col).iter().filter(|&&(f, _)| f == r).map(|&(_, s)| s as i128).sum()).collect())
            .collect();
        bareiss_rank(m)
    };
    (0..dims).map(|k| by_dim[k].len() - rank(k) - rank(k + 1)).collect()
}

/// `∂∂ = 0` computed from facet lists alone.
pub fn boundary_squares_to_zero(c: &CellComplex) -> bool {
    (0..c.len()).all(|x| {
        let mut acc = std::collections::BTreeMap::<usize, i64>::new();
        for &(f, s) in c.facets(x) {
            for &(g, t) in c.facets(f) {
                *acc.entry(g).or_default() += s * t;
            }
        }
        acc.values().all(|&v| v == 0)
    })
}

pub fn library_betti(c: &CellComplex, a: &CellSet, b: &CellSet) -> BettiVector {
    betti(&c.chain_complex(a, b).expect("pair is valid")).expect("chain complex is valid")
}

/// `L` by explicit reachability from every cell of `R`.
pub fn oracle_lyapunov(c: &CellComplex, v: &MultivectorField, sd: &SectionData) -> Vec<Option<usize>> {
    let mut out = vec![None; c.len()];
    for x in sd.r.iter() {
        let mut seen = vec![false; c.len()];
        let mut stack = vec![x];
        seen[x] = true;
        let mut best = 0;
        while let Some(y) = stack.pop() {
            best = best.max(sd.dist[y].expect("R is connected"));
            for z in fv(c, v, y).iter() {
                if sd.r.contains(z) && !seen[z] {
                    seen[z] = true;
                    stack.push(z);
                }
            }
        }
        out[x] = Some(best);
    }
    out
}

/// Outcome of checking every accepted section of a random instance.
#[derive(Debug, Default)]
pub struct SectionTally {
    pub accepted: usize,
    pub failures: Vec<String>,
}

/// Runs the section construction on every isolated Morse set of `(c, v)`
/// for a handful of candidate sections and checks the structural properties.
pub fn section_suite(c: &CellComplex, v: &MultivectorField, tally: &mut SectionTally) {
    let all = c.poset().full_set();
    let md = cbricks::mvf::morse_decomposition(c, v, &all);
    for s in md.sets.iter().filter(|s| s.isolated) {
        let mut cands = candidate_sections(c, v, &s.cells, 2, 6);
        for m in v.multivectors() {
            let h = section_hull(c, v, &s.cells, &c.poset().set(m.iter().copied()));
            if !h.is_empty() && h != s.cells && !cands.contains(&h) {
                cands.push(h);
            }
        }
        for p in cands {
            let Ok(sd) = build_section(c, v, &s.cells, &p) else { continue };
            tally.accepted += 1;
            for msg in check_properties(c, v, &sd) {
                tally.failures.push(msg);
            }
            if oracle_lyapunov(c, v, &sd) != sd.lyap {
                tally.failures.push("L disagrees with reachability oracle".into());
            }
            let g = DynGraph::new(c, v, &sd.r);
            for (i, succ) in g.adj.iter().enumerate() {
                for &j in succ {
                    if sd.lyap[g.nodes[j]] > sd.lyap[g.nodes[i]] {
                        tally.failures.push("L increases along a dynamics edge".into());
                    }
                }
            }
        }
    }
}

/// Counts sampled contradictions of determined verdicts: edge normal signs,
/// entered triangles, zero-free triangles and vertex sectors.
pub fn sample_contradictions<R: Rng>(
    mesh: &cbricks::pipeline::TriMesh,
    f: &cbricks::pipeline::VectorField,
    rep: &cbricks::pipeline::TransversalityReport,
    samples: usize,
    rng: &mut R,
) -> (usize, Vec<String>) {
    use cbricks::pipeline::Crossing;
    let mut checked = 0;
    let mut bad = Vec::new();
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    for (e, chk) in rep.edges.iter().enumerate() {
        if !chk.verdict.is_determined() {
            continue;
        }
        checked += 1;
        let [a, b] = mesh.edges[e];
        let (pa, pb) = (mesh.point(a), mesh.point(b));
        let n = [pa[1] - pb[1], pb[0] - pa[0]];
        for _ in 0..samples {
            let t: f64 = rng.gen();
            let (x, y) = (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]));
            let (fx, fy) = f.eval(x, y);
            let s = n[0] * fx + n[1] * fy;
            if s == 0.0 || (s > 0.0) != (chk.sign > 0) {
                bad.push(format!("edge {a}-{b} at t={t}"));
                break;
            }
        }
        if let Crossing::Enters(t) = chk.verdict {
            let o = mesh.opposite(t, e);
            if (orient(pa, pb, mesh.point(o)) > 0.0) != (chk.sign > 0) {
                bad.push(format!("edge {a}-{b} enters the wrong triangle"));
            }
        }
    }
    for (t, chk) in rep.triangles.iter().enumerate() {
        if !chk.verified {
            continue;
        }
        checked += 1;
        let p = mesh.triangles[t].map(|v| mesh.point(v));
        for _ in 0..samples {
            let (mut u, mut w): (f64, f64) = (rng.gen(), rng.gen());
            if u + w > 1.0 {
                (u, w) = (1.0 - u, 1.0 - w);
            }
            let x = p[0][0] + u * (p[1][0] - p[0][0]) + w * (p[2][0] - p[0][0]);
            let y = p[0][1] + u * (p[1][1] - p[0][1]) + w * (p[2][1] - p[0][1]);
            if f.eval(x, y) == (0.0, 0.0) {
                bad.push(format!("triangle {t} vanishes at ({x}, {y})"));
                break;
            }
        }
    }
    for (v, verdict) in rep.vertices.iter().enumerate() {
        let p = mesh.point(v);
        let (fx, fy) = f.eval(p[0], p[1]);
        let d = [p[0] + fx, p[1] + fy];
        let strictly_in = |t: usize| {
            let o: Vec<[f64; 2]> = mesh.triangles[t].iter().filter(|&&w| w != v).map(|&w| mesh.point(w)).collect();
            let (mut u, mut w) = (o[0], o[1]);
            if orient(p, u, w) < 0.0 {
                std::mem::swap(&mut u, &mut w);
            }
            orient(p, u, d) > 0.0 && orient(p, d, w) > 0.0
        };
        match verdict {
            Crossing::Enters(t) => {
                checked += 1;
                if !strictly_in(*t) {
                    bad.push(format!("vertex {v} does not enter triangle {t}"));
                }
            }
            Crossing::Outflow => {
                checked += 1;
                if mesh.vertex_tris[v].iter().any(|&t| strictly_in(t)) {
                    bad.push(format!("outflow vertex {v} enters a triangle"));
                }
            }
            Crossing::Undetermined => {}
        }
    }
    (checked, bad)
}
