//! Numerical laboratory for virial identities, spectral stability and
//! smoothing estimates of the Dirac operator H_D + V in d dimensions.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! below fix `f64`.

pub mod clifford;
pub mod corpus;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod io;
pub mod matrix;
pub mod multipliers;
pub mod norms;
pub mod operators;
pub mod potentials;
pub mod scalar;

pub use clifford::{build_dirac_matrices, verify_clifford, CliffordRep};
pub use error::{Error, Result};
pub use grid::{Grid, GridSpec, SpinorField};
pub use multipliers::MultiplierProfile;
pub use potentials::PotentialSpec;
pub use scalar::{Real, C};

/// Double-precision spinor field.
pub type Field = SpinorField<f64>;
/// Double-precision grid.
pub type Grid64 = Grid<f64>;
/// Double-precision Clifford representation.
pub type Rep = CliffordRep<f64>;
/// Double-precision complex number.
pub type Complex64 = C<f64>;
