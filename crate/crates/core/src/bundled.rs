//! Datasets shipped with the crate.

use crate::complex::CellComplex;
use crate::formats::{parse_complex, MvfFile};
use crate::mvf::MultivectorField;
use crate::pipeline::{TriMesh, VectorField};

pub const CIRCLES_FIELD: &str = include_str!("../data/circles.field");
pub const CIRCLES_MESH: &str = include_str!("../data/circles.mesh.json");
pub const VDP_FIELD: &str = include_str!("../data/vdp.field");
pub const VDP_MESH: &str = include_str!("../data/vdp.mesh.json");
pub const CLORENZ_COMPLEX: &str = include_str!("../data/clorenz.complex.json");
pub const CLORENZ_MVF: &str = include_str!("../data/clorenz.mvf.json");
pub const CIRCLE3_COMPLEX: &str = include_str!("../data/circle3.complex.json");
pub const CIRCLE3_MVF: &str = include_str!("../data/circle3.mvf.json");
pub const LORENZ3D_COMPLEX: &str = include_str!("../data/lorenz3d.complex.json");

/// A planar flow with its flow-transverse mesh.
pub struct FlowExample {
    pub field: VectorField,
    pub mesh: TriMesh,
}

fn flow(field: &str, mesh: &str) -> FlowExample {
    FlowExample { field: VectorField::parse(field).expect("bundled field parses"), mesh: TriMesh::parse(mesh).expect("bundled mesh is valid") }
}

fn combinatorial(complex: &str, mvf: &str) -> (CellComplex, MultivectorField) {
    let c = parse_complex(complex).expect("bundled complex is valid");
    let v = MvfFile::parse(mvf).and_then(|f| f.build(&c)).expect("bundled field is valid");
    (c, v)
}

/// Two concentric limit cycles, at radius 1 (attracting) and 2 (repelling).
pub fn circles() -> FlowExample {
    flow(CIRCLES_FIELD, CIRCLES_MESH)
}

/// Van der Pol oscillator with mu = 1.
pub fn vdp() -> FlowExample {
    flow(VDP_FIELD, VDP_MESH)
}

/// Branched surface with two triangle loops meeting at one branch edge.
///
/// Vertices 0, 1, 2 span the shared triangle; `0-1` is the branch edge and
/// `2-6` the critical edge.
pub fn clorenz() -> (CellComplex, MultivectorField) {
    combinatorial(CLORENZ_COMPLEX, CLORENZ_MVF)
}

/// Three vertices, three edges, one cyclic orbit.
pub fn circle3() -> (CellComplex, MultivectorField) {
    combinatorial(CIRCLE3_COMPLEX, CIRCLE3_MVF)
}

/// Cubical block complex: a middle column of three cubes shared by two
/// rings of cubes, i.e. a genus two handlebody.
pub fn lorenz3d() -> CellComplex {
    parse_complex(LORENZ3D_COMPLEX).expect("bundled complex is valid")
}
