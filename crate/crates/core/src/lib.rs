//! Kicked homogeneous central-spin models in the collective spin basis:
//! Floquet dynamics, Krylov fragmentation, scar diagnostics, closed-form
//! oracles and a product-basis cross-check.

pub mod cg;
pub mod dynamics;
pub mod error;
pub mod full_basis;
pub mod krylov;
pub mod matrix;
pub mod operators;
pub mod oracles;
pub mod params;
pub mod scar;
pub mod sector;
pub mod selfcheck;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use matrix::{hermitian_expm, CMatrix, CVector, HermitianMatrix, UnitaryMatrix};
pub use params::{Interaction, ModelParams};
pub use sector::{Label, SectorBasis, Sigma};
