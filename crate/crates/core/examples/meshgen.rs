//! Regenerates the bundled meshes.
//!
//! ```text
//! cargo run --release -p cbricks --example meshgen -- crates/core/data
//! ```

use std::f64::consts::{PI, TAU};
use std::path::Path;

use cbricks::mvf::morse_decomposition;
use cbricks::pipeline::check::{analyze, check_mesh, perturb_mesh, CheckConfig};
use cbricks::pipeline::{TriMesh, VectorField};

/// Ring of `n` vertices at radius `r`, first vertex at angle `offset / 96` turns.
#[derive(Clone, Copy, Debug)]
struct Ring {
    r: f64,
    n: usize,
    offset: usize,
}

const UNITS: usize = 96;

impl Ring {
    fn step(&self) -> usize {
        UNITS / self.n
    }
    fn angle_units(&self, j: usize) -> usize {
        self.offset + j * self.step()
    }
}

fn g_circles(r: f64) -> f64 {
    (r * r - 4.0) * (r * r - 1.0)
}

/// Largest gap width starting at `r` (direction `dir`) that keeps slanted
/// edges with angular offset `dth` crossed radially.
fn radial_step(r: f64, dir: f64, dth: f64, margin: f64) -> f64 {
    let mut h = 0.5;
    loop {
        let ok = (0..=20).all(|k| {
            let rho = r + dir * h * k as f64 / 20.0;
            margin * g_circles(rho).abs() * rho * dth > h
        });
        if ok || h < 1e-4 {
            return h;
        }
        h *= 0.9;
    }
}

fn gap_ok(lo: f64, hi: f64, dth: f64, margin: f64) -> bool {
    (0..=20).all(|k| {
        let rho = lo + (hi - lo) * k as f64 / 20.0;
        margin * g_circles(rho).abs() * rho * dth > hi - lo
    })
}

/// Radii strictly between `a` and `b` marched from both ends with `n_a`,
/// `n_b` vertices; returns (radii from a, radii from b reversed).
fn march(a: f64, b: f64, n_a: usize, n_b: usize, margin: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut lo, mut hi) = (a, b);
    let (mut from_a, mut from_b) = (Vec::new(), Vec::new());
    let dth_join = PI / n_a.min(n_b) as f64;
    while !gap_ok(lo, hi, dth_join, margin) {
        let sa = radial_step(lo, 1.0, PI / n_a as f64, margin);
        let sb = radial_step(hi, -1.0, PI / n_b as f64, margin);
        if sa >= sb {
            lo += sa;
            from_a.push(lo);
        } else {
            hi -= sb;
            from_b.push(hi);
        }
        assert!(lo < hi, "march crossed over");
    }
    from_b.reverse();
    (from_a, from_b)
}

fn circles_rings() -> Vec<(f64, usize)> {
    let m: f64 = std::env::var("RING_MARGIN").ok().and_then(|s| s.parse().ok()).unwrap_or(0.6);
    let mut rings: Vec<(f64, usize)> = vec![(0.15, 3), (0.3, 6), (0.45, 12), (0.6, 24)];
    let (x, y) = march(0.6, 0.95, 24, 24, m);
    rings.extend(x.into_iter().chain(y).map(|r| (r, 24)));
    rings.push((0.95, 24));
    rings.push((1.05, 24));
    let (x, y) = march(1.05, 1.97, 24, 48, m);
    rings.extend(x.into_iter().map(|r| (r, 24)));
    rings.extend(y.into_iter().map(|r| (r, 48)));
    rings.push((1.97, 48));
    rings.push((2.03, 48));
    let mut r = 2.03;
    while r < 2.4 {
        r += radial_step(r, 1.0, PI / 48.0, m);
        rings.push((r, 48));
    }
    rings
}

fn build_polar(spec: &[(f64, usize)]) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut rings: Vec<Ring> = Vec::new();
    for (k, &(r, n)) in spec.iter().enumerate() {
        let offset = match rings.last() {
            None => 0,
            Some(prev) if prev.n == n => (prev.offset + prev.step() / 2) % (UNITS / n),
            Some(prev) => prev.offset % (UNITS / n.max(prev.n)),
        };
        let _ = k;
        rings.push(Ring { r, n, offset });
    }
    let mut verts = Vec::new();
    let mut base = Vec::new();
    for ring in &rings {
        base.push(verts.len());
        for j in 0..ring.n {
            let th = TAU * ring.angle_units(j) as f64 / UNITS as f64;
            verts.push([ring.r * th.cos(), ring.r * th.sin()]);
        }
    }
    let mut tris = vec![[0, 1, 2]];
    for k in 0..rings.len() - 1 {
        let (a, b) = (rings[k], rings[k + 1]);
        // zip two rings by angle, inner vertex first on ties
        let ang_a = |i: usize| a.angle_units(i % a.n) + UNITS * (i / a.n);
        let ang_b = |j: usize| b.angle_units(j % b.n) + UNITS * (j / b.n);
        let mut j0 = 0;
        while ang_b(j0 + 1) <= ang_a(0) {
            j0 += 1;
        }
        // outer start must not exceed the inner start
        let (mut i, mut j) = (0usize, j0);
        let idx_a = |i: usize| base[k] + i % a.n;
        let idx_b = |j: usize| base[k + 1] + j % b.n;
        if ang_b(j) > ang_a(0) {
            // every outer vertex lies after the inner start: wrap back one
            j = j0 + b.n - 1;
            i += a.n;
        }
        for _ in 0..a.n + b.n {
            if ang_a(i + 1) <= ang_b(j + 1) {
                tris.push([idx_a(i), idx_a(i + 1), idx_b(j)]);
                i += 1;
            } else {
                tris.push([idx_a(i), idx_b(j), idx_b(j + 1)]);
                j += 1;
            }
        }
    }
    (verts, tris)
}

/// One period of the attracting cycle of the van der Pol field rotated by
/// `alpha`, sampled by RK4. The unrotated field crosses it at angle `alpha`.
fn vdp_orbit(alpha: f64) -> Vec<[f64; 2]> {
    let (c, s) = (alpha.cos(), alpha.sin());
    let f = |p: [f64; 2]| {
        let v = [p[1], (1.0 - p[0] * p[0]) * p[1] - p[0]];
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    };
    let rk4 = |p: [f64; 2], h: f64| {
        let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
        let k1 = f(p);
        let k2 = f(add(p, k1, h / 2.0));
        let k3 = f(add(p, k2, h / 2.0));
        let k4 = f(add(p, k3, h));
        [p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]), p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])]
    };
    let h = 1e-3;
    let mut p = [2.0, 0.0];
    for _ in 0..100_000 {
        p = rk4(p, h);
    }
    // one period between downward crossings of y = 0 at x > 0 (the orbit is clockwise)
    let crossing = |p: [f64; 2], q: [f64; 2]| p[1] > 0.0 && q[1] <= 0.0 && q[0] > 0.0;
    loop {
        let q = rk4(p, h);
        let hit = crossing(p, q);
        p = q;
        if hit {
            break;
        }
    }
    let mut pts = vec![p];
    loop {
        let q = rk4(p, h);
        if crossing(p, q) {
            break;
        }
        pts.push(q);
        p = q;
    }
    pts
}

fn vdp_field(p: [f64; 2]) -> [f64; 2] {
    [p[1], (1.0 - p[0] * p[0]) * p[1] - p[0]]
}

/// Parameter `t` where `p + t n` meets the closed polyline, smallest `|t|`
/// with the sign of `side`.
fn hit(poly: &[[f64; 2]], p: [f64; 2], n: [f64; 2], side: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for k in 0..poly.len() {
        let (q0, q1) = (poly[k], poly[(k + 1) % poly.len()]);
        let d = [q1[0] - q0[0], q1[1] - q0[1]];
        let den = n[0] * (-d[1]) - n[1] * (-d[0]);
        if den.abs() < 1e-300 {
            continue;
        }
        let r = [q0[0] - p[0], q0[1] - p[1]];
        let t = (r[0] * (-d[1]) - r[1] * (-d[0])) / den;
        let u = (n[0] * r[1] - n[1] * r[0]) / den;
        if (0.0..=1.0).contains(&u) && t * side > 0.0 && best.is_none_or(|b: f64| t.abs() < b.abs()) {
            best = Some(t);
        }
    }
    best
}

fn build_vdp(lines: usize, alpha: f64, turn_weight: f64) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let base = vdp_orbit(0.0);
    let ra = vdp_orbit(alpha);
    let rb = vdp_orbit(-alpha);
    let mean_r = |o: &[[f64; 2]]| o.iter().map(|p| p[0].hypot(p[1])).sum::<f64>() / o.len() as f64;
    let (inner, outer) = if mean_r(&ra) < mean_r(&rb) { (ra, rb) } else { (rb, ra) };
    let normal = |p: [f64; 2]| {
        let v = vdp_field(p);
        let s = v[0].hypot(v[1]);
        [-v[1] / s, v[0] / s] // left normal: outward for a clockwise orbit
    };
    // radial lines spaced by arc length plus weighted turning, then refined
    // until every chord is crossed with a sampled margin
    let mut cum = vec![0.0];
    for k in 1..base.len() {
        let (p, q) = (base[k], base[k - 1]);
        let (n, m) = (normal(p), normal(q));
        let ds = (p[0] - q[0]).hypot(p[1] - q[1]);
        let dturn = (n[0] * m[1] - n[1] * m[0]).abs();
        cum.push(cum[k - 1] + ds + turn_weight * dturn);
    }
    let total = *cum.last().unwrap();
    let mut at: Vec<usize> = Vec::new();
    let mut k = 0;
    for l in 0..lines {
        let target = total * l as f64 / lines as f64;
        while cum[k] < target {
            k += 1;
        }
        at.push(k);
    }
    let line = |k: usize| {
        let (p, n) = (base[k], normal(base[k]));
        let ti = hit(&inner, p, n, -1.0).expect("inner ring inside");
        let to = hit(&outer, p, n, 1.0).expect("outer ring outside");
        ([p[0] + ti * n[0], p[1] + ti * n[1]], [p[0] + to * n[0], p[1] + to * n[1]], n)
    };
    // sampled crossing margin of the flow through segment a-b towards `toward`
    let margin = |a: [f64; 2], b: [f64; 2], toward: [f64; 2]| {
        let mut nc = [-(b[1] - a[1]), b[0] - a[0]];
        if nc[0] * toward[0] + nc[1] * toward[1] < 0.0 {
            nc = [-nc[0], -nc[1]];
        }
        let len = nc[0].hypot(nc[1]);
        (0..=32)
            .map(|k| {
                let t = k as f64 / 32.0;
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let v = vdp_field(x);
                (v[0] * nc[0] + v[1] * nc[1]) / (len * v[0].hypot(v[1]))
            })
            .fold(f64::INFINITY, f64::min)
    };
    let need = 0.35 * alpha.sin();
    for _ in 0..12 {
        let mut next = Vec::new();
        let mut changed = false;
        for l in 0..at.len() {
            let (k0, k1) = (at[l], at[(l + 1) % at.len()]);
            next.push(k0);
            let (i0, o0, n0) = line(k0);
            let (i1, o1, _) = line(k1);
            let ok = margin(i0, i1, n0) > need && margin(o0, o1, [-n0[0], -n0[1]]) > need;
            let span = (k1 + base.len() - k0) % base.len();
            if !ok && span > 1 {
                next.push((k0 + span / 2) % base.len());
                changed = true;
            }
        }
        at = next;
        if !changed {
            break;
        }
    }
    let lines = at.len();
    let mut verts = Vec::new();
    for &k in &at {
        let (i, o, _) = line(k);
        verts.push(i);
        verts.push(o);
    }
    let mut tris = Vec::new();
    for l in 0..lines {
        let (i0, o0) = (2 * l, 2 * l + 1);
        let (i1, o1) = ((2 * l + 2) % (2 * lines), (2 * l + 3) % (2 * lines));
        tris.push([i0, i1, o1]);
        tris.push([i0, o1, o0]);
    }
    let signs: Vec<bool> = tris.iter().map(|t| cbricks::pipeline::mesh::orient(verts[t[0]], verts[t[1]], verts[t[2]]) > 0.0).collect();
    assert!(signs.iter().all(|&s| s == signs[0]), "folded annulus");
    (verts, tris)
}

fn report(name: &str, mesh: &TriMesh, f: &VectorField) {
    let cfg = CheckConfig::default();
    let rep = check_mesh(mesh, f, &cfg);
    eprintln!(
        "{name}: {} vertices, {} triangles, {} undetermined, {} unverified triangles",
        mesh.vertices.len(),
        mesh.triangles.len(),
        rep.score(),
        rep.unverified_triangles(mesh).len()
    );
    if let Ok(model) = analyze(mesh, f, &cfg) {
        let md = morse_decomposition(&mesh.complex, &model.mvf, &model.domain(&mesh.complex));
        for s in &md.sets {
            eprintln!("  set: {} cells, index {:?}, isolated {}", s.cells.len(), s.index, s.isolated);
            if std::env::var("CERTIFY").is_ok() {
                let t = std::time::Instant::now();
                let ev = cbricks::certify::FlowEvidence { field_text: &f.text, outflow: &model.outflow, unverified: &model.unverified };
                let cert = cbricks::certify(&mesh.complex, &model.mvf, &s.cells, None, Some(&ev));
                eprintln!("    certified {} in {:?}; failed {:?}", cert.certified, t.elapsed(), cert.failed().collect::<Vec<_>>());
            }
        }
    }
}

fn write(dir: &Path, name: &str, mesh: &TriMesh) {
    let text = serde_json::to_string(&mesh.to_file()).unwrap();
    std::fs::write(dir.join(name), text + "\n").unwrap();
}

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "crates/core/data".into());
    let dir = Path::new(&dir);
    let cfg = CheckConfig::default();

    let circles = VectorField::parse(include_str!("../data/circles.field")).unwrap();
    let rings = circles_rings();
    let (v, t) = build_polar(&rings);
    let mesh = TriMesh::new(v, t).unwrap();
    report("circles", &mesh, &circles);
    let mesh = perturb_mesh(&mesh, &circles, &cfg, 1, 40, 0.05);
    report("circles (perturbed)", &mesh, &circles);
    write(dir, "circles.mesh.json", &mesh);

    let vdp = VectorField::parse(include_str!("../data/vdp.field")).unwrap();
    let lines: usize = std::env::var("VDP_LINES").ok().and_then(|s| s.parse().ok()).unwrap_or(40);
    let env = |k: &str, d: f64| std::env::var(k).ok().and_then(|s| s.parse().ok()).unwrap_or(d);
    let (v, t) = build_vdp(lines, env("VDP_ALPHA", 0.1), env("VDP_TURN", 1.0));
    let mesh = TriMesh::new(v, t).unwrap();
    report("vdp", &mesh, &vdp);
    let rep = check_mesh(&mesh, &vdp, &cfg);
    for c in rep.undetermined_cells(&mesh) {
        eprint!("{} ", mesh.complex.id(c));
    }
    eprintln!();
    let mesh = perturb_mesh(&mesh, &vdp, &cfg, 1, 40, 0.05);
    report("vdp (perturbed)", &mesh, &vdp);
    write(dir, "vdp.mesh.json", &mesh);
}
