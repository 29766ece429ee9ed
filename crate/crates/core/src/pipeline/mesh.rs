//! Planar triangle meshes and their induced simplicial complexes.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{simplex_id, CellComplex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("triangle {0} references a missing vertex")]
    BadIndex(usize),
    #[error("triangle {0} is degenerate")]
    Degenerate(usize),
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("edge {0}-{1} has more than two triangles")]
    NonManifold(usize, usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

/// Mesh entity behind a complex cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshCell {
    Vertex(usize),
    Edge(usize),
    Triangle(usize),
}

/// Triangle mesh with edge adjacency and the cell numbering of its complex.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Sorted vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Sorted vertex pairs.
    pub edges: Vec<[usize; 2]>,
    pub edge_tris: Vec<Vec<usize>>,
    pub vertex_tris: Vec<Vec<usize>>,
    pub complex: CellComplex,
    pub vertex_cell: Vec<usize>,
    pub edge_cell: Vec<usize>,
    pub tri_cell: Vec<usize>,
    pub cell_ref: Vec<MeshCell>,
}

pub fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

impl TriMesh {
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let n = vertices.len();
        for (i, v) in vertices.iter().enumerate() {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(MeshError::NonFinite(i));
            }
        }
        let mut seen: BTreeMap<(u64, u64), usize> = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            let key = ((v[0] + 0.0).to_bits(), (v[1] + 0.0).to_bits());
            if let Some(&j) = seen.get(&key) {
                return Err(MeshError::DuplicateVertex(j, i));
            }
            seen.insert(key, i);
        }
        let mut tris = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(MeshError::BadIndex(t));
            }
            let mut s = *tri;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] || orient(vertices[s[0]], vertices[s[1]], vertices[s[2]]) == 0.0 {
                return Err(MeshError::Degenerate(t));
            }
            tris.push(s);
        }
        let mut uniq = HashSet::new();
        tris.retain(|t| uniq.insert(*t));
        tris.sort_unstable();
        let mut edge_map: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (t, s) in tris.iter().enumerate() {
            for e in [[s[0], s[1]], [s[0], s[2]], [s[1], s[2]]] {
                edge_map.entry(e).or_default().push(t);
            }
        }
        let mut edges = Vec::with_capacity(edge_map.len());
        let mut edge_tris = Vec::with_capacity(edge_map.len());
        for (e, ts) in edge_map {
            if ts.len() > 2 {
                return Err(MeshError::NonManifold(e[0], e[1]));
            }
            edges.push(e);
            edge_tris.push(ts);
        }
        let mut vertex_tris = vec![Vec::new(); n];
        for (t, s) in tris.iter().enumerate() {
            for &v in s {
                vertex_tris[v].push(t);
            }
        }
        let cells: Vec<Vec<usize>> = tris.iter().map(|t| t.to_vec()).collect();
        let complex = CellComplex::from_simplices(n, &cells).expect("validated triangles");
        let look = |vs: &[usize]| complex.index_of(&simplex_id(vs)).expect("cell present");
        let vertex_cell: Vec<usize> = (0..n).map(|v| look(&[v])).collect();
        let edge_cell: Vec<usize> = edges.iter().map(|e| look(e)).collect();
        let tri_cell: Vec<usize> = tris.iter().map(|t| look(t)).collect();
        let mut cell_ref = vec![MeshCell::Vertex(0); complex.len()];
        for (v, &c) in vertex_cell.iter().enumerate() {
            cell_ref[c] = MeshCell::Vertex(v);
        }
        for (e, &c) in edge_cell.iter().enumerate() {
            cell_ref[c] = MeshCell::Edge(e);
        }
        for (t, &c) in tri_cell.iter().enumerate() {
            cell_ref[c] = MeshCell::Triangle(t);
        }
        Ok(TriMesh { vertices, triangles: tris, edges, edge_tris, vertex_tris, complex, vertex_cell, edge_cell, tri_cell, cell_ref })
    }

    pub fn from_file(f: &MeshFile) -> Result<Self, MeshError> {
        Self::new(f.vertices.clone(), f.triangles.clone())
    }

    pub fn parse(text: &str) -> Result<Self, MeshError> {
        let f: MeshFile = serde_json::from_str(text).map_err(|e| MeshError::Json(e.to_string()))?;
        Self::from_file(&f)
    }

    pub fn to_file(&self) -> MeshFile {
        MeshFile { vertices: self.vertices.clone(), triangles: self.triangles.clone() }
    }

    pub fn point(&self, v: usize) -> [f64; 2] {
        self.vertices[v]
    }

    /// Third vertex of triangle `t` opposite the edge `e`.
    pub fn opposite(&self, t: usize, e: usize) -> usize {
        let [a, b] = self.edges[e];
        *self.triangles[t].iter().find(|&&v| v != a && v != b).expect("triangle contains edge")
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e].len() == 1
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Mesh triangle index of a toplex cell.
    pub fn triangle_of_cell(&self, cell: usize) -> Option<usize> {
        match self.cell_ref[cell] {
            MeshCell::Triangle(t) => Some(t),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square() {
        let m = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        assert_eq!(m.edges.len(), 5);
        assert_eq!(m.complex.len(), 4 + 5 + 2);
        let diag = m.edges.iter().position(|e| e == &[0, 2]).unwrap();
        assert!(!m.is_boundary_edge(diag));
        assert_eq!(m.edge_tris[diag].len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]]), Err(MeshError::Degenerate(0))));
        assert!(matches!(TriMesh::new(vec![[0.0, 0.0], [0.0, 0.0]], vec![]), Err(MeshError::DuplicateVertex(0, 1))));
        assert!(matches!(TriMesh::new(vec![[0.0, 0.0]], vec![[0, 1, 2]]), Err(MeshError::BadIndex(0))));
    }
}
