//! Similarity of finite-dimensional operator semigroups to contraction,
//! quasi-contraction and isometric semigroups.
//!
//! The crate is organised bottom-up:
//!
//! * [`opcore`]: dense complex matrices, exponentials, spectra and weighted norms.
//! * [`weightsolve`]: condition-number-minimal Hermitian weights under Stein or
//!   Lyapunov inequalities, with certificates.
//! * [`gallery`]: grid discretisations of explicit example semigroups.
//! * [`criteria`]: trichotomy classification, limit characterisations,
//!   renorming constructions and bound audits.
//! * [`control`]: Gramians, defect observation operators, duality and the
//!   resolvent-integral criterion for isometric similarity.
//! * [`cli`]: configuration, file I/O and command orchestration for the
//!   `simgroup` binary.

// Negated comparisons such as `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod control;
pub mod criteria;
pub mod error;
pub mod gallery;
pub mod opcore;
pub mod weightsolve;

pub use error::{Result, SimError};
