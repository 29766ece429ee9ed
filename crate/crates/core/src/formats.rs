//! JSON file formats and content hashes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::complex::{CellComplex, ComplexError, CwCell};
use crate::homology::BettiVector;
use crate::mvf::{MorseDecomposition, MultivectorField, MvfError};
use crate::pipeline::{Crossing, TransversalityReport, TriMesh};
use crate::section::SectionData;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown cell id {0}")]
    UnknownCell(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Mvf(#[from] MvfError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetRef {
    pub id: String,
    pub sign: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CwCellFile {
    pub id: String,
    pub dim: usize,
    #[serde(default)]
    pub facets: Vec<FacetRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComplexFile {
    Simplicial { vertices: usize, cells: Vec<Vec<usize>> },
    Cw { cells: Vec<CwCellFile> },
}

impl ComplexFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<CellComplex, FormatError> {
        Ok(match self {
            ComplexFile::Simplicial { vertices, cells } => CellComplex::from_simplices(*vertices, cells)?,
            ComplexFile::Cw { cells } => CellComplex::from_cw(
                cells
                    .iter()
                    .map(|c| CwCell { id: c.id.clone(), dim: c.dim, facets: c.facets.iter().map(|f| (f.id.clone(), f.sign)).collect() })
                    .collect(),
            )?,
        })
    }

    /// Canonical description: toplexes for simplicial input, all cells for CW.
    pub fn describe(c: &CellComplex) -> Self {
        if c.is_simplicial() {
            let cells = c.toplexes().iter().filter(|&t| c.dim(t) > 0).map(|t| c.simplex(t).expect("simplicial").to_vec()).collect();
            ComplexFile::Simplicial { vertices: c.n_vertices(), cells }
        } else {
            ComplexFile::Cw {
                cells: (0..c.len())
                    .map(|x| CwCellFile {
                        id: c.id(x).to_string(),
                        dim: c.dim(x),
                        facets: c.facets(x).iter().map(|&(f, s)| FacetRef { id: c.id(f).to_string(), sign: s }).collect(),
                    })
                    .collect(),
            }
        }
    }
}

pub fn parse_complex(text: &str) -> Result<CellComplex, FormatError> {
    ComplexFile::parse(text)?.build()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn complex_hash(c: &CellComplex) -> String {
    sha256_hex(serde_json::to_string(&ComplexFile::describe(c)).expect("serializable").as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MvfFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex: Option<String>,
    pub multivectors: Vec<Vec<String>>,
}

impl MvfFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self, c: &CellComplex) -> Result<MultivectorField, FormatError> {
        MultivectorField::from_ids(c, &self.multivectors)
    }

    pub fn describe(c: &CellComplex, v: &MultivectorField) -> Self {
        MvfFile { complex: None, multivectors: v.multivectors().iter().map(|m| m.iter().map(|&x| c.id(x).to_string()).collect()).collect() }
    }
}

pub fn mvf_hash(c: &CellComplex, v: &MultivectorField) -> String {
    sha256_hex(serde_json::to_string(&MvfFile::describe(c, v)).expect("serializable").as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseSetFile {
    pub id: usize,
    pub cells: Vec<String>,
    pub toplexes: usize,
    pub betti: Option<BettiVector>,
    pub isolated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseGraphFile {
    pub sets: Vec<MorseSetFile>,
    pub edges: Vec<(usize, usize)>,
}

impl MorseGraphFile {
    pub fn describe(c: &CellComplex, md: &MorseDecomposition) -> Self {
        MorseGraphFile {
            sets: md
                .sets
                .iter()
                .enumerate()
                .map(|(i, s)| MorseSetFile {
                    id: i,
                    cells: c.ids_of(&s.cells),
                    toplexes: c.toplexes_in(&s.cells).len(),
                    betti: s.index.clone(),
                    isolated: s.isolated,
                })
                .collect(),
            edges: md.edges.clone(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph morse {\n");
        for m in &self.sets {
            s.push_str(&format!(
                "  m{} [label=\"M{} {} ({} cells)\"];\n",
                m.id,
                m.id,
                m.betti.as_ref().map_or("?".to_string(), |b| b.to_string()),
                m.cells.len()
            ));
        }
        for (a, b) in &self.edges {
            s.push_str(&format!("  m{a} -> m{b};\n"));
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionFile {
    pub a: Vec<String>,
    pub p: Vec<String>,
    pub h: Vec<String>,
    pub r: Vec<String>,
    pub pbar: Vec<String>,
    pub lyapunov: BTreeMap<String, usize>,
    pub nbar: usize,
    pub kmax: usize,
    pub levels: Vec<Vec<String>>,
    pub shifts: Vec<Vec<String>>,
    pub coarsening: Vec<Vec<String>>,
}

impl SectionFile {
    pub fn describe(c: &CellComplex, sd: &SectionData, coarsening: &[Vec<usize>]) -> Self {
        SectionFile {
            a: c.ids_of(&sd.a),
            p: c.ids_of(&sd.p),
            h: c.ids_of(&sd.h),
            r: c.ids_of(&sd.r),
            pbar: c.ids_of(&sd.pbar),
            lyapunov: sd.r.iter().filter_map(|x| sd.lyap[x].map(|l| (c.id(x).to_string(), l))).collect(),
            nbar: sd.nbar,
            kmax: sd.kmax,
            levels: sd.levels.iter().map(|l| c.ids_of(l)).collect(),
            shifts: sd.shifts.iter().map(|l| c.ids_of(l)).collect(),
            coarsening: coarsening.iter().map(|f| f.iter().map(|&x| c.id(x).to_string()).collect()).collect(),
        }
    }
}

/// Verdict for one mesh edge or vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictFile {
    pub cell: String,
    /// `enters`, `outflow` or `undetermined`.
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enters: Option<String>,
    /// Sign of the flow across an edge against its left normal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    pub determined: bool,
    pub undetermined: Vec<String>,
    pub unverified_triangles: Vec<String>,
    pub edges: Vec<VerdictFile>,
    pub vertices: Vec<VerdictFile>,
}

impl ReportFile {
    pub fn describe(mesh: &TriMesh, rep: &TransversalityReport) -> Self {
        let c = &mesh.complex;
        let verdict = |cell: usize, x: Crossing, sign: Option<i8>| {
            let (name, enters) = match x {
                Crossing::Enters(t) => ("enters", Some(c.id(mesh.tri_cell[t]).to_string())),
                Crossing::Outflow => ("outflow", None),
                Crossing::Undetermined => ("undetermined", None),
            };
            VerdictFile { cell: c.id(cell).to_string(), verdict: name.to_string(), enters, sign }
        };
        let ids = |v: Vec<usize>| v.into_iter().map(|x| c.id(x).to_string()).collect();
        ReportFile {
            determined: rep.is_determined(),
            undetermined: ids(rep.undetermined_cells(mesh)),
            unverified_triangles: ids(rep.unverified_triangles(mesh)),
            edges: rep.edges.iter().enumerate().map(|(e, k)| verdict(mesh.edge_cell[e], k.verdict, Some(k.sign))).collect(),
            vertices: rep.vertices.iter().enumerate().map(|(v, &k)| verdict(mesh.vertex_cell[v], k, None)).collect(),
        }
    }
}
