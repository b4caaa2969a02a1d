//! Unitary propagation of i∂_tψ = (H_D + V)ψ, interior eigenpairs, and
//! diagnostics along the flow.

mod eigen;
mod genid;
mod propagate;
mod run;
mod zitter;

pub use eigen::*;
pub use genid::*;
pub use propagate::*;
pub use run::*;
pub use zitter::*;
