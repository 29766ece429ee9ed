//! Deterministic SVG drawings of meshes, crossing ticks and invariant sets.

use std::fmt::Write;

use crate::fintop::CellSet;
use crate::pipeline::check::{Crossing, TransversalityReport};
use crate::pipeline::mesh::TriMesh;

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2"];

#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub width: f64,
    pub show_mesh: bool,
    /// Tick length as a fraction of the edge length.
    pub tick: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { width: 800.0, show_mesh: true, tick: 0.25 }
    }
}

struct Frame {
    lo: [f64; 2],
    hi: [f64; 2],
    scale: f64,
    margin: f64,
}

impl Frame {
    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (self.margin + (p[0] - self.lo[0]) * self.scale, self.margin + (self.hi[1] - p[1]) * self.scale)
    }
}

/// Renders the mesh with one tick per edge (pointing where the flow goes)
/// and one shaded polygon per triangle of each set.
pub fn render_svg(mesh: &TriMesh, report: Option<&TransversalityReport>, sets: &[CellSet], opts: &RenderOptions) -> String {
    let (lo, hi) = mesh.bounding_box();
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let margin = 10.0;
    let scale = (opts.width - 2.0 * margin) / span;
    let fr = Frame { lo, hi, scale, margin };
    let w = 2.0 * margin + (hi[0] - lo[0]) * scale;
    let h = 2.0 * margin + (hi[1] - lo[1]) * scale;
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (k, set) in sets.iter().enumerate() {
        writeln!(s, r#"<g id="set-{k}" fill="{}" fill-opacity="0.45" stroke="none">"#, PALETTE[k % PALETTE.len()]).unwrap();
        for (t, &cell) in mesh.tri_cell.iter().enumerate() {
            if set.contains(cell) {
                let pts: Vec<String> = mesh.triangles[t]
                    .iter()
                    .map(|&v| {
                        let (x, y) = fr.map(mesh.point(v));
                        format!("{x:.2},{y:.2}")
                    })
                    .collect();
                writeln!(s, r#"<polygon class="set" data-cell="{}" points="{}"/>"#, mesh.complex.id(cell), pts.join(" ")).unwrap();
            }
        }
        writeln!(s, "</g>").unwrap();
    }
    if opts.show_mesh {
        writeln!(s, r##"<g id="mesh" stroke="#999999" stroke-width="0.5">"##).unwrap();
        for &[a, b] in &mesh.edges {
            let (x1, y1) = fr.map(mesh.point(a));
            let (x2, y2) = fr.map(mesh.point(b));
            writeln!(s, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#).unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    if let Some(rep) = report {
        writeln!(s, r#"<g id="ticks" stroke-width="1.2">"#).unwrap();
        for (e, chk) in rep.edges.iter().enumerate() {
            let [a, b] = mesh.edges[e];
            let (pa, pb) = (mesh.point(a), mesh.point(b));
            let m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            // left normal scaled by the tick fraction and the flow sign
            let sg = f64::from(chk.sign);
            let end = [m[0] - sg * opts.tick * d[1], m[1] + sg * opts.tick * d[0]];
            let (x1, y1) = fr.map(m);
            let (x2, y2) = fr.map(end);
            let (class, colour) = match chk.verdict {
                Crossing::Enters(_) => ("tick", "#222222"),
                Crossing::Outflow => ("tick outflow", "#1f77b4"),
                Crossing::Undetermined => ("tick undetermined", "#d62728"),
            };
            writeln!(
                s,
                r#"<line class="{class}" data-cell="{}" stroke="{colour}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#,
                mesh.complex.id(mesh.edge_cell[e])
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::check::{check_mesh, CheckConfig};
    use crate::pipeline::expr::VectorField;

    #[test]
    fn counts_and_determinism() {
        let m = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        let f = VectorField::parse("1; 0.25").unwrap();
        let rep = check_mesh(&m, &f, &CheckConfig::default());
        let set = m.complex.poset().set([m.tri_cell[0]]);
        let svg = render_svg(&m, Some(&rep), std::slice::from_ref(&set), &RenderOptions::default());
        assert_eq!(svg.matches(r#"class="tick"#).count(), m.edges.len());
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg, render_svg(&m, Some(&rep), &[set], &RenderOptions::default()));
    }
}
