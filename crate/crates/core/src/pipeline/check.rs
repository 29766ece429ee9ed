//! Rigorous transversality checks and the induced multivector field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::VectorField;
use super::interval::Interval;
use super::mesh::{orient, TriMesh};
use crate::complex::CellComplex;
use crate::fintop::CellSet;
use crate::mvf::{MultivectorField, MvfError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("undetermined cells: {}", .0.join(", "))]
    Undetermined(Vec<String>),
    #[error("toplexes {0} and {1} share no cell")]
    Disjoint(String, String),
    #[error(transparent)]
    Mvf(#[from] MvfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Maximal bisection depth for edges and triangles.
    pub depth: u32,
    /// Required distance of a determining enclosure from zero.
    pub eps: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { depth: 8, eps: 0.0 }
    }
}

/// Where the flow goes from a mesh entity: into a triangle (mesh index),
/// out of the mesh, or unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Enters(usize),
    Outflow,
    Undetermined,
}

impl Crossing {
    pub fn is_determined(self) -> bool {
        self != Crossing::Undetermined
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCheck {
    pub verdict: Crossing,
    /// Sign of `n · f` with `n` the left normal of the edge from its lower to
    /// its higher vertex; `0` when undetermined.
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleCheck {
    pub verified: bool,
    /// Sub-box on which neither component was proven nonzero.
    pub witness: Option<[Interval; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransversalityReport {
    pub edges: Vec<EdgeCheck>,
    pub triangles: Vec<TriangleCheck>,
    pub vertices: Vec<Crossing>,
}

fn ipt(p: [f64; 2]) -> [Interval; 2] {
    [Interval::point(p[0]), Interval::point(p[1])]
}

fn cross(u: [Interval; 2], w: [Interval; 2]) -> Interval {
    u[0] * w[1] - u[1] * w[0]
}

fn sub(a: [Interval; 2], b: [Interval; 2]) -> [Interval; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn seg_sign(f: &VectorField, p0: [Interval; 2], d: [Interval; 2], n: [Interval; 2], t: (f64, f64), depth: u32, eps: f64) -> i8 {
    let at = |s: f64| {
        let s = Interval::point(s);
        [p0[0] + s * d[0], p0[1] + s * d[1]]
    };
    let (a, b) = (at(t.0), at(t.1));
    let (fx, fy) = f.eval_box(a[0].hull(b[0]), a[1].hull(b[1]));
    let s = (n[0] * fx + n[1] * fy).strict_sign(eps);
    if s != 0 || depth == 0 {
        return s;
    }
    let m = 0.5 * (t.0 + t.1);
    let l = seg_sign(f, p0, d, n, (t.0, m), depth - 1, eps);
    if l == 0 {
        return 0;
    }
    if seg_sign(f, p0, d, n, (m, t.1), depth - 1, eps) == l {
        l
    } else {
        0
    }
}

/// Sign of the flow across edge `e` (left normal of its sorted direction).
pub fn edge_sign(mesh: &TriMesh, f: &VectorField, e: usize, cfg: &CheckConfig) -> i8 {
    let [a, b] = mesh.edges[e];
    let (p0, p1) = (ipt(mesh.point(a)), ipt(mesh.point(b)));
    let d = sub(p1, p0);
    let n = [-d[1], d[0]];
    seg_sign(f, p0, d, n, (0.0, 1.0), cfg.depth, cfg.eps)
}

pub fn check_edge(mesh: &TriMesh, f: &VectorField, e: usize, cfg: &CheckConfig) -> EdgeCheck {
    let sign = edge_sign(mesh, f, e, cfg);
    if sign == 0 {
        return EdgeCheck { verdict: Crossing::Undetermined, sign };
    }
    let [a, b] = mesh.edges[e];
    let (pa, pb) = (ipt(mesh.point(a)), ipt(mesh.point(b)));
    let mut verdict = Crossing::Outflow;
    for &t in &mesh.edge_tris[e] {
        let c = ipt(mesh.point(mesh.opposite(t, e)));
        let side = cross(sub(pb, pa), sub(c, pa)).strict_sign(0.0);
        if side == 0 {
            return EdgeCheck { verdict: Crossing::Undetermined, sign: 0 };
        }
        if side == sign {
            verdict = Crossing::Enters(t);
        }
    }
    EdgeCheck { verdict, sign }
}

fn box_outside(tri: [[f64; 2]; 3], bx: Interval, by: Interval) -> bool {
    let corners = [[bx.lo, by.lo], [bx.hi, by.lo], [bx.lo, by.hi], [bx.hi, by.hi]];
    for k in 0..3 {
        let (a, b, c) = (ipt(tri[k]), ipt(tri[(k + 1) % 3]), ipt(tri[(k + 2) % 3]));
        let inside = cross(sub(b, a), sub(c, a)).strict_sign(0.0);
        if inside != 0 && corners.iter().all(|&q| cross(sub(b, a), sub(ipt(q), a)).strict_sign(0.0) == -inside) {
            return true;
        }
    }
    false
}

fn tri_box(f: &VectorField, tri: [[f64; 2]; 3], bx: Interval, by: Interval, depth: u32, eps: f64) -> Option<[Interval; 2]> {
    if box_outside(tri, bx, by) {
        return None;
    }
    let (fx, fy) = f.eval_box(bx, by);
    if fx.strict_sign(eps) != 0 || fy.strict_sign(eps) != 0 {
        return None;
    }
    if depth == 0 {
        return Some([bx, by]);
    }
    let (mx, my) = (bx.mid(), by.mid());
    for (x, y) in [
        (Interval::new(bx.lo, mx), Interval::new(by.lo, my)),
        (Interval::new(mx, bx.hi), Interval::new(by.lo, my)),
        (Interval::new(bx.lo, mx), Interval::new(my, by.hi)),
        (Interval::new(mx, bx.hi), Interval::new(my, by.hi)),
    ] {
        if let Some(w) = tri_box(f, tri, x, y, depth - 1, eps) {
            return Some(w);
        }
    }
    None
}

/// Verifies that `f` has no zero on triangle `t`.
pub fn check_triangle(mesh: &TriMesh, f: &VectorField, t: usize, cfg: &CheckConfig) -> TriangleCheck {
    let tri = mesh.triangles[t].map(|v| mesh.point(v));
    let lo = |k: usize| tri.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
    let hi = |k: usize| tri.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
    let witness = tri_box(f, tri, Interval::new(lo(0), hi(0)), Interval::new(lo(1), hi(1)), cfg.depth, cfg.eps);
    TriangleCheck { verified: witness.is_none(), witness }
}

/// Triangle whose open sector at `v` strictly contains the flow direction.
pub fn vertex_ift(mesh: &TriMesh, f: &VectorField, v: usize, cfg: &CheckConfig) -> Crossing {
    let p = ipt(mesh.point(v));
    let (fx, fy) = f.eval_box(p[0], p[1]);
    if fx.strict_sign(cfg.eps) == 0 && fy.strict_sign(cfg.eps) == 0 {
        return Crossing::Undetermined;
    }
    let d = [fx, fy];
    let mut inside = None;
    let mut all_outside = true;
    for &t in &mesh.vertex_tris[v] {
        let others: Vec<usize> = mesh.triangles[t].iter().copied().filter(|&w| w != v).collect();
        let mut u = sub(ipt(mesh.point(others[0])), p);
        let mut w = sub(ipt(mesh.point(others[1])), p);
        match cross(u, w).strict_sign(0.0) {
            0 => return Crossing::Undetermined,
            -1 => std::mem::swap(&mut u, &mut w),
            _ => {}
        }
        let s1 = cross(u, d).strict_sign(cfg.eps);
        let s2 = cross(d, w).strict_sign(cfg.eps);
        if s1 > 0 && s2 > 0 {
            if inside.is_some() {
                return Crossing::Undetermined;
            }
            inside = Some(t);
        } else if !(s1 < 0 || s2 < 0) {
            all_outside = false;
        }
    }
    match inside {
        Some(t) => Crossing::Enters(t),
        None if all_outside && is_boundary_vertex(mesh, v) => Crossing::Outflow,
        None => Crossing::Undetermined,
    }
}

fn is_boundary_vertex(mesh: &TriMesh, v: usize) -> bool {
    mesh.vertex_tris[v].iter().any(|&t| {
        mesh.triangles[t].iter().filter(|&&w| w != v).any(|&w| {
            let e = mesh.edges.binary_search(&[v.min(w), v.max(w)]).expect("edge of triangle");
            mesh.is_boundary_edge(e)
        })
    })
}

fn pmap<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs every check; results are ordered by mesh index.
pub fn check_mesh(mesh: &TriMesh, f: &VectorField, cfg: &CheckConfig) -> TransversalityReport {
    let edges = pmap(mesh.edges.len(), |e| check_edge(mesh, f, e, cfg));
    let triangles = pmap(mesh.triangles.len(), |t| check_triangle(mesh, f, t, cfg));
    let vertices = pmap(mesh.vertices.len(), |v| vertex_ift(mesh, f, v, cfg));
    TransversalityReport { edges, triangles, vertices }
}

impl TransversalityReport {
    /// Edges and vertices all determined (triangles are reported separately).
    pub fn is_determined(&self) -> bool {
        self.edges.iter().all(|e| e.verdict.is_determined()) && self.vertices.iter().all(|v| v.is_determined())
    }

    pub fn undetermined_cells(&self, mesh: &TriMesh) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.verdict.is_determined())
            .map(|(e, _)| mesh.edge_cell[e])
            .chain(self.vertices.iter().enumerate().filter(|(_, v)| !v.is_determined()).map(|(v, _)| mesh.vertex_cell[v]))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn unverified_triangles(&self, mesh: &TriMesh) -> Vec<usize> {
        self.triangles.iter().enumerate().filter(|(_, t)| !t.verified).map(|(t, _)| mesh.tri_cell[t]).collect()
    }

    /// Number of undetermined edges and vertices.
    pub fn score(&self) -> usize {
        self.edges.iter().filter(|e| !e.verdict.is_determined()).count() + self.vertices.iter().filter(|v| !v.is_determined()).count()
    }

    /// Immediate future of a cell: a toplex cell, `None` for outflow.
    pub fn ift(&self, mesh: &TriMesh, cell: usize) -> Result<Option<usize>, PipelineError> {
        use super::mesh::MeshCell;
        let c = match mesh.cell_ref[cell] {
            MeshCell::Triangle(_) => return Ok(Some(cell)),
            MeshCell::Edge(e) => self.edges[e].verdict,
            MeshCell::Vertex(v) => self.vertices[v],
        };
        match c {
            Crossing::Enters(t) => Ok(Some(mesh.tri_cell[t])),
            Crossing::Outflow => Ok(None),
            Crossing::Undetermined => Err(PipelineError::Undetermined(vec![mesh.complex.id(cell).to_string()])),
        }
    }
}

/// The multivector field `V_σ = {τ : ift(τ) = σ}` plus outflow singletons.
#[derive(Debug, Clone)]
pub struct FlowModel {
    pub report: TransversalityReport,
    pub mvf: MultivectorField,
    /// Cells whose flow leaves the mesh.
    pub outflow: CellSet,
    /// Triangles not proven free of zeros of the field.
    pub unverified: CellSet,
}

impl FlowModel {
    /// Cells on which the combinatorial dynamics is studied.
    pub fn domain(&self, c: &CellComplex) -> CellSet {
        c.poset().full_set().difference(&self.outflow)
    }
}

pub fn build_mvf(mesh: &TriMesh, report: &TransversalityReport) -> Result<FlowModel, PipelineError> {
    let bad = report.undetermined_cells(mesh);
    if !bad.is_empty() {
        return Err(PipelineError::Undetermined(bad.iter().map(|&c| mesh.complex.id(c).to_string()).collect()));
    }
    let c = &mesh.complex;
    let mut mvs: Vec<Vec<usize>> = mesh.tri_cell.iter().map(|&t| vec![t]).collect();
    let mut outflow = c.poset().empty_set();
    let mut assign = |cell: usize, verdict: Crossing| match verdict {
        Crossing::Enters(t) => mvs[t].push(cell),
        _ => {
            outflow.insert(cell);
        }
    };
    for (e, chk) in report.edges.iter().enumerate() {
        assign(mesh.edge_cell[e], chk.verdict);
    }
    for (v, &chk) in report.vertices.iter().enumerate() {
        assign(mesh.vertex_cell[v], chk);
    }
    mvs.extend(outflow.iter().map(|x| vec![x]));
    let mvf = MultivectorField::new(c, mvs)?;
    let unverified = c.poset().set(report.unverified_triangles(mesh));
    Ok(FlowModel { report: report.clone(), mvf, outflow, unverified })
}

pub fn analyze(mesh: &TriMesh, f: &VectorField, cfg: &CheckConfig) -> Result<FlowModel, PipelineError> {
    build_mvf(mesh, &check_mesh(mesh, f, cfg))
}

/// Random vertex jitter around undetermined cells; keeps the best mesh seen.
pub fn perturb_mesh(mesh: &TriMesh, f: &VectorField, cfg: &CheckConfig, seed: u64, rounds: usize, fraction: f64) -> TriMesh {
    let mut best = mesh.clone();
    if rounds == 0 {
        return best;
    }
    let mut best_score = check_mesh(&best, f, cfg).score();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..rounds {
        if best_score == 0 {
            break;
        }
        let report = check_mesh(&best, f, cfg);
        let mut movers: Vec<usize> = Vec::new();
        for (e, chk) in report.edges.iter().enumerate() {
            if !chk.verdict.is_determined() {
                movers.extend(best.edges[e]);
            }
        }
        for (v, chk) in report.vertices.iter().enumerate() {
            if !chk.is_determined() {
                movers.push(v);
            }
        }
        movers.sort_unstable();
        movers.dedup();
        let mut verts = best.vertices.clone();
        for &v in &movers {
            let h = best
                .edges
                .iter()
                .filter(|e| e.contains(&v))
                .map(|&[a, b]| ((verts[a][0] - verts[b][0]).powi(2) + (verts[a][1] - verts[b][1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            let r = fraction * h * rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            let old = verts[v];
            verts[v] = [old[0] + r * th.cos(), old[1] + r * th.sin()];
            let flips = best.vertex_tris[v].iter().any(|&t| {
                let [a, b, c] = best.triangles[t];
                let before = orient(best.vertices[a], best.vertices[b], best.vertices[c]);
                let after = orient(verts[a], verts[b], verts[c]);
                before.signum() != after.signum() || after.abs() < 1e-3 * before.abs()
            });
            if flips {
                verts[v] = old;
            }
        }
        if let Ok(m) = TriMesh::new(verts, best.triangles.clone()) {
            let s = check_mesh(&m, f, cfg).score();
            if s < best_score {
                best = m;
                best_score = s;
            }
        }
    }
    best
}

/// True when two toplexes sharing cells are crossed in both directions.
pub fn detect_circular_intersection(c: &CellComplex, v: &MultivectorField, s: usize, t: usize) -> Result<bool, PipelineError> {
    let p = c.poset();
    let shared = p.cl(&p.set([s])).intersection(&p.cl(&p.set([t])));
    if shared.is_empty() {
        return Err(PipelineError::Disjoint(c.id(s).to_string(), c.id(t).to_string()));
    }
    let to_t = shared.iter().any(|x| v.ift(c, x) == Some(t));
    let to_s = shared.iter().any(|x| v.ift(c, x) == Some(s));
    Ok(to_t && to_s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> TriMesh {
        // lower-right triangle (0,1,2), upper-left (0,2,3)
        TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    fn field(t: &str) -> VectorField {
        VectorField::parse(t).unwrap()
    }

    #[test]
    fn constant_field_across_vertical_edge() {
        let m = TriMesh::new(vec![[0.0, 0.0], [1.0, -1.0], [1.0, 1.0], [2.0, 0.0]], vec![[0, 1, 2], [1, 2, 3]]).unwrap();
        let e = m.edges.iter().position(|e| e == &[1, 2]).unwrap();
        let chk = check_edge(&m, &field("1; 0"), e, &CheckConfig::default());
        let right = m.triangles.iter().position(|t| t == &[1, 2, 3]).unwrap();
        assert_eq!(chk.verdict, Crossing::Enters(right));
    }

    #[test]
    fn rotation_on_axis_edge() {
        let m = TriMesh::new(vec![[1.0, 0.0], [2.0, 0.0], [1.5, 1.0]], vec![[0, 1, 2]]).unwrap();
        let e = m.edges.iter().position(|e| e == &[0, 1]).unwrap();
        let f = field("y; -x");
        // n·f = -x < 0 on the edge: flow goes to the right side, away from the triangle
        assert_eq!(check_edge(&m, &f, e, &CheckConfig::default()).verdict, Crossing::Outflow);
        let m = TriMesh::new(vec![[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let e = m.edges.iter().position(|e| e == &[0, 1]).unwrap();
        assert_eq!(check_edge(&m, &f, e, &CheckConfig::default()).verdict, Crossing::Undetermined);
    }

    #[test]
    fn triangles() {
        let m = TriMesh::new(vec![[-1.0, -1.0], [1.0, -1.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        assert!(check_triangle(&m, &field("1; 0"), 0, &CheckConfig::default()).verified);
        let circles = field("-y + x*(x^2+y^2-4)*(x^2+y^2-1); x + y*(x^2+y^2-4)*(x^2+y^2-1)");
        assert!(!check_triangle(&m, &circles, 0, &CheckConfig::default()).verified);
        let thin = TriMesh::new(vec![[1.45, 0.0], [1.55, 0.0], [1.5, 0.1]], vec![[0, 1, 2]]).unwrap();
        assert!(check_triangle(&thin, &circles, 0, &CheckConfig::default()).verified);
    }

    #[test]
    fn vertex_sectors() {
        // vertex 0 at origin with a triangle spanning (-45°, 45°)
        let m = TriMesh::new(vec![[0.0, 0.0], [1.0, -1.0], [1.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        assert_eq!(vertex_ift(&m, &field("1; 0"), 0, &CheckConfig::default()), Crossing::Enters(0));
        assert_eq!(vertex_ift(&m, &field("1; 1"), 0, &CheckConfig::default()), Crossing::Undetermined);
        assert_eq!(vertex_ift(&m, &field("-1; 0"), 0, &CheckConfig::default()), Crossing::Outflow);
        assert_eq!(vertex_ift(&m, &field("x; y"), 0, &CheckConfig::default()), Crossing::Undetermined);
    }

    #[test]
    fn rightward_square_mvf() {
        let m = square();
        let f = field("1; 0.25");
        let model = analyze(&m, &f, &CheckConfig::default()).unwrap();
        let c = &m.complex;
        let lower = c.index_of("0-1-2").unwrap();
        let v = &model.mvf;
        let cls = |id: &str| c.ids_of(&v.class(c, c.index_of(id).unwrap()));
        // the diagonal is crossed from the upper-left into the lower-right triangle
        assert_eq!(cls("0-2"), vec!["0", "0-1", "0-2", "0-1-2"]);
        assert_eq!(cls("0-3"), vec!["0-3", "0-2-3"]);
        assert_eq!(v.ift(c, c.index_of("0").unwrap()), Some(lower));
        assert!(model.outflow.contains(c.index_of("1-2").unwrap()));
        assert!(model.outflow.contains(c.index_of("2").unwrap()));
        for t in c.toplexes().iter() {
            let vt = v.class(c, t);
            assert_eq!(c.poset().cl(&vt), c.poset().cl(&c.poset().set([t])));
        }
    }

    #[test]
    fn undetermined_refused() {
        let m = TriMesh::new(vec![[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let err = analyze(&m, &field("y; -x"), &CheckConfig::default()).unwrap_err();
        assert!(matches!(err, PipelineError::Undetermined(ref v) if v.contains(&"0-1".to_string())));
    }

    #[test]
    fn perturb_identity_cases() {
        let m = square();
        let f = field("1; 0.25");
        let same = perturb_mesh(&m, &f, &CheckConfig::default(), 7, 10, 0.1);
        assert_eq!(same.vertices, m.vertices);
        let tangent = TriMesh::new(vec![[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        let g = field("1; 0");
        assert_eq!(perturb_mesh(&tangent, &g, &CheckConfig::default(), 7, 0, 0.1).vertices, tangent.vertices);
        let fixed = perturb_mesh(&tangent, &g, &CheckConfig::default(), 7, 50, 0.2);
        assert!(check_mesh(&fixed, &g, &CheckConfig::default()).score() < check_mesh(&tangent, &g, &CheckConfig::default()).score());
    }

    #[test]
    fn circular_intersections() {
        let m = square();
        let model = analyze(&m, &field("1; 0.25"), &CheckConfig::default()).unwrap();
        let c = &m.complex;
        let (a, b) = (c.index_of("0-1-2").unwrap(), c.index_of("0-2-3").unwrap());
        assert!(!detect_circular_intersection(c, &model.mvf, a, b).unwrap());
    }
}
