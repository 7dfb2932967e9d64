//! Executable Hadamard-space geometry: CAT(0) model spaces, equivariant maps
//! of graphs with their energy, length and width functionals, equivariant
//! harmonic maps, and a list-conjugacy solver for free and matrix groups.

pub mod conjugacy;
pub mod error;
pub mod equivariant;
pub mod groups;
pub mod harmonic;
pub mod numeric;
pub mod spaces;

pub use error::{Error, Result};
