//! From a polynomial planar vector field and a triangle mesh to a multivector field.

pub mod check;
pub mod expr;
pub mod interval;
pub mod mesh;

pub use check::{analyze, build_mvf, check_mesh, CheckConfig, Crossing, FlowModel, PipelineError, TransversalityReport};
pub use expr::{ParseError, VectorField};
pub use interval::Interval;
pub use mesh::{MeshError, MeshFile, TriMesh};
