//! Conditional thermal states and quantum thermometry.
//!
//! The crate builds conditional thermal states (Gibbs-weighted mixtures of a
//! measurement's pointer projectors), measures how precisely they encode the inverse
//! temperature compared with Gibbs states, relates that precision to
//! Wigner-Yanase-Dyson skew information, and analyzes unitary work protocols
//! (dissipative work, the thermodynamic triangle equality, J-divergence as quantum
//! heat). Units follow `k_B = ħ = 1`.
//!
//! Modules, bottom-up:
//!
//! * [`linalg`]: dense complex linear algebra.
//! * [`states`]: Gibbs and conditional thermal states, entropies.
//! * [`metrology`]: quantum Fisher information by three routes, optimal measurement.
//! * [`asymmetry`]: skew information and the covariance bound on the Fisher information.
//! * [`thermo`]: work, dissipation, triangle equality, J-divergence, ergotropy.
//! * [`estimation`]: Monte Carlo check of the Cramér-Rao bound.
//!
//! [`io`], [`sweep`] and [`verify`] back the command-line front end.

// `!(x > y)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymmetry;
pub mod error;
pub mod estimation;
pub mod io;
pub mod linalg;
pub mod metrology;
pub mod random;
pub mod states;
pub mod sweep;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition, HermitianOperator};
pub use states::{ConditionalThermalState, Density, PointerBasis, SeparableCts};
