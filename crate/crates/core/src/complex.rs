//! Cell complexes as graded posets with signed facet incidences.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::fintop::{CellSet, FinitePoset, PosetError};
use crate::homology::ChainComplex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("empty or degenerate simplex {0:?}")]
    BadSimplex(Vec<usize>),
    #[error("duplicate cell id {0}")]
    DuplicateId(String),
    #[error("unknown cell id {0}")]
    UnknownId(String),
    #[error("set is not closed")]
    NotClosed,
    #[error("subcomplex pair is not nested")]
    NotNested,
    #[error("complex has dangling facets; no boundary operator available")]
    Unsupported,
    #[error(transparent)]
    Poset(#[from] PosetError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    MissingFace,
    Grading,
    BoundarySquare,
    FaceLattice,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub cell: String,
    pub detail: String,
}

/// One cell of a CW input: id, dimension and signed facets by id.
#[derive(Debug, Clone)]
pub struct CwCell {
    pub id: String,
    pub dim: usize,
    pub facets: Vec<(String, i64)>,
}

#[derive(Debug, Clone)]
pub struct CellComplex {
    poset: FinitePoset,
    dims: Vec<usize>,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    facets: Vec<Vec<(usize, i64)>>,
    simplices: Option<Vec<Vec<usize>>>,
    n_vertices: usize,
    dangling: Vec<(usize, String)>,
}

pub fn simplex_id(vs: &[usize]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
}

impl CellComplex {
    /// Simplicial complex on vertices `0..n_vertices` generated by `cells`
    /// (all faces are added). Every vertex is a cell.
    pub fn from_simplices(n_vertices: usize, cells: &[Vec<usize>]) -> Result<Self, ComplexError> {
        let mut all: BTreeSet<(usize, Vec<usize>)> = (0..n_vertices).map(|v| (0, vec![v])).collect();
        for c in cells {
            let mut s = c.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.len() != c.len() {
                return Err(ComplexError::BadSimplex(c.clone()));
            }
            if let Some(&v) = s.iter().find(|&&v| v >= n_vertices) {
                return Err(ComplexError::VertexOutOfRange(v));
            }
            let k = s.len();
            for mask in 1u64..(1u64 << k) {
                let face: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
                all.insert((face.len() - 1, face));
            }
        }
        let simplices: Vec<Vec<usize>> = all.into_iter().map(|(_, s)| s).collect();
        let index: HashMap<Vec<usize>, usize> = simplices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut facets = Vec::with_capacity(simplices.len());
        for s in &simplices {
            let mut f = Vec::new();
            if s.len() > 1 {
                for i in 0..s.len() {
                    let mut face = s.clone();
                    face.remove(i);
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    f.push((index[&face], sign));
                }
            }
            facets.push(f);
        }
        let dims = simplices.iter().map(|s| s.len() - 1).collect();
        let ids: Vec<String> = simplices.iter().map(|s| simplex_id(s)).collect();
        Self::assemble(ids, dims, facets, Some(simplices), n_vertices, Vec::new())
    }

    /// Abstract CW complex from explicit signed incidences. Facets naming
    /// unknown ids are kept as dangling references and reported by [`validate`](Self::validate).
    pub fn from_cw(cells: Vec<CwCell>) -> Result<Self, ComplexError> {
        let mut index = HashMap::new();
        for (i, c) in cells.iter().enumerate() {
            if index.insert(c.id.clone(), i).is_some() {
                return Err(ComplexError::DuplicateId(c.id.clone()));
            }
        }
        let mut facets = Vec::with_capacity(cells.len());
        let mut dangling = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            let mut f = Vec::new();
            for (fid, sign) in &c.facets {
                match index.get(fid) {
                    Some(&j) => f.push((j, *sign)),
                    None => dangling.push((i, fid.clone())),
                }
            }
            facets.push(f);
        }
        let dims = cells.iter().map(|c| c.dim).collect();
        let n_vertices = cells.iter().filter(|c| c.dim == 0).count();
        let ids = cells.into_iter().map(|c| c.id).collect();
        Self::assemble(ids, dims, facets, None, n_vertices, dangling)
    }

    fn assemble(
        ids: Vec<String>,
        dims: Vec<usize>,
        facets: Vec<Vec<(usize, i64)>>,
        simplices: Option<Vec<Vec<usize>>>,
        n_vertices: usize,
        dangling: Vec<(usize, String)>,
    ) -> Result<Self, ComplexError> {
        let below = facets.iter().map(|f| f.iter().map(|&(j, _)| j).collect()).collect();
        let poset = FinitePoset::from_covers(below)?;
        let index = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(CellComplex { poset, dims, ids, index, facets, simplices, n_vertices, dangling })
    }

    pub fn poset(&self) -> &FinitePoset {
        &self.poset
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, c: usize) -> usize {
        self.dims[c]
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    pub fn id(&self, c: usize) -> &str {
        &self.ids[c]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn set_of_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<CellSet, ComplexError> {
        let mut s = self.poset.empty_set();
        for id in ids {
            let id = id.as_ref();
            s.insert(self.index_of(id).ok_or_else(|| ComplexError::UnknownId(id.to_string()))?);
        }
        Ok(s)
    }

    pub fn ids_of(&self, s: &CellSet) -> Vec<String> {
        s.iter().map(|c| self.ids[c].clone()).collect()
    }

    pub fn facets(&self, c: usize) -> &[(usize, i64)] {
        &self.facets[c]
    }

    pub fn is_simplicial(&self) -> bool {
        self.simplices.is_some()
    }

    /// Sorted vertex list of a simplicial cell.
    pub fn simplex(&self, c: usize) -> Option<&[usize]> {
        self.simplices.as_ref().map(|s| s[c].as_slice())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn is_toplex(&self, c: usize) -> bool {
        self.poset.up(c).len() == 1
    }

    pub fn toplexes(&self) -> CellSet {
        self.poset.set((0..self.len()).filter(|&c| self.is_toplex(c)))
    }

    pub fn frame(&self) -> CellSet {
        self.toplexes().complement()
    }

    pub fn toplexes_in(&self, s: &CellSet) -> Vec<usize> {
        s.iter().filter(|&c| self.is_toplex(c)).collect()
    }

    /// Sub-complex of cells of dimension at most `k`, keeping cell ids.
    pub fn skeleton(&self, k: usize) -> CellComplex {
        let keep: Vec<usize> = (0..self.len()).filter(|&c| self.dims[c] <= k).collect();
        let remap: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let facets = keep.iter().map(|&c| self.facets[c].iter().filter_map(|&(f, s)| remap.get(&f).map(|&g| (g, s))).collect()).collect();
        let ids = keep.iter().map(|&c| self.ids[c].clone()).collect();
        let dims = keep.iter().map(|&c| self.dims[c]).collect();
        let simplices = self.simplices.as_ref().map(|s| keep.iter().map(|&c| s[c].clone()).collect());
        let dangling = self.dangling.iter().filter_map(|(c, id)| remap.get(c).map(|&g| (g, id.clone()))).collect();
        Self::assemble(ids, dims, facets, simplices, self.n_vertices, dangling).expect("skeleton of a valid complex is valid")
    }

    /// Relative cellular chain complex of the closed pair `(a, b)`.
    pub fn chain_complex(&self, a: &CellSet, b: &CellSet) -> Result<ChainComplex, ComplexError> {
        if !self.poset.owns(a) || !self.poset.owns(b) {
            return Err(PosetError::AmbientMismatch.into());
        }
        if !self.poset.is_closed(a) || !self.poset.is_closed(b) {
            return Err(ComplexError::NotClosed);
        }
        if !b.is_subset(a) {
            return Err(ComplexError::NotNested);
        }
        if !self.dangling.is_empty() {
            return Err(ComplexError::Unsupported);
        }
        let top = self.max_dim();
        let mut pos = vec![usize::MAX; self.len()];
        let mut sizes = vec![0usize; top + 1];
        for c in a.difference(b).iter() {
            pos[c] = sizes[self.dims[c]];
            sizes[self.dims[c]] += 1;
        }
        let mut cols: Vec<Vec<Vec<(usize, i64)>>> = sizes.iter().map(|&n| vec![Vec::new(); n]).collect();
        for c in a.difference(b).iter() {
            let k = self.dims[c];
            if k == 0 {
                continue;
            }
            let col = &mut cols[k][pos[c]];
            for &(f, s) in &self.facets[c] {
                if pos[f] != usize::MAX && self.dims[f] + 1 == k {
                    col.push((pos[f], s));
                }
            }
            col.sort_unstable();
        }
        Ok(ChainComplex::from_columns(sizes, cols))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (c, id) in &self.dangling {
            out.push(Violation { kind: ViolationKind::MissingFace, cell: self.ids[*c].clone(), detail: format!("facet {id} is not a cell") });
        }
        for c in 0..self.len() {
            for &(f, _) in &self.facets[c] {
                if self.dims[f] + 1 != self.dims[c] {
                    out.push(Violation {
                        kind: ViolationKind::Grading,
                        cell: self.ids[c].clone(),
                        detail: format!("facet {} has dim {}, cell has dim {}", self.ids[f], self.dims[f], self.dims[c]),
                    });
                }
            }
            if self.dims[c] > 0 && self.facets[c].is_empty() {
                out.push(Violation {
                    kind: ViolationKind::MissingFace,
                    cell: self.ids[c].clone(),
                    detail: "positive-dimensional cell without facets".into(),
                });
            }
        }
        if let Some(simplices) = &self.simplices {
            for (c, s) in simplices.iter().enumerate() {
                if s.len() > 1 && self.facets[c].len() != s.len() {
                    out.push(Violation {
                        kind: ViolationKind::FaceLattice,
                        cell: self.ids[c].clone(),
                        detail: "facet count differs from vertex count".into(),
                    });
                }
            }
        }
        // boundary of boundary, cell by cell
        for c in 0..self.len() {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for &(f, s) in &self.facets[c] {
                for &(g, t) in &self.facets[f] {
                    *acc.entry(g).or_default() += s * t;
                }
            }
            let mut bad: Vec<usize> = acc.into_iter().filter(|&(_, v)| v != 0).map(|(g, _)| g).collect();
            bad.sort_unstable();
            if let Some(&g) = bad.first() {
                out.push(Violation {
                    kind: ViolationKind::BoundarySquare,
                    cell: self.ids[c].clone(),
                    detail: format!("boundary of boundary has nonzero coefficient at {}", self.ids[g]),
                });
            }
        }
        out
    }
}
