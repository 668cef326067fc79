//! Dense complex operator arithmetic, matrix functions and spectral quantities.
//!
//! Everything here is a pure function of its inputs.

pub mod equations;
pub mod expm;
pub mod json;
pub mod linalg;
pub mod semigroup;
pub mod spectral;
pub mod tridiag;

pub use equations::{solve_lyapunov, solve_stein};
pub use expm::{expm, expm_semigroup};
pub use json::MatrixJson;
pub use linalg::{validate, ComplexMatrix, Scalar};
pub use semigroup::{Descriptor, MatrixSemigroup, SemigroupKind, SnapReport};
pub use spectral::{
    eigenvalues, growth_bound, min_singular_value, numerical_abscissa, operator_norm, resolvent,
    spectral_radius, weight_kappa, weighted_norm,
};
