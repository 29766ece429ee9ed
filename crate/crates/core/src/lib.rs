//! Computer-assisted existence proofs for periodic orbits of planar flows.
//!
//! The crate builds a combinatorial multivector field from a flow-transverse
//! triangulation, isolates invariant sets, computes their Conley indices over
//! the rationals, and checks the hypotheses of the brick-decomposition
//! periodic orbit criterion through combinatorial Poincaré sections.

pub mod bundled;
pub mod certify;
pub mod complex;
pub mod fintop;
pub mod formats;
pub mod homology;
pub mod mvf;
pub mod pipeline;
pub mod render;
pub mod section;

pub use certify::{certify, Certificate};
pub use complex::CellComplex;
pub use fintop::{CellSet, FinitePoset};
pub use homology::{BettiVector, ChainComplex};
pub use mvf::MultivectorField;
pub use section::SectionData;
