//! Grid discretisations of the explicit example semigroups.
//!
//! Every construction is exposed as a [`MatrixSemigroup`](crate::opcore::MatrixSemigroup)
//! (or a plain matrix family) whose evaluation times snap to the grid. Shift-type
//! samplers are permutation-like and satisfy their algebraic identities exactly
//! on aligned times; discretisation error only enters through quadrature
//! (integration functionals, weights and the Riemann-Liouville kernel).

pub mod bhat;
pub mod dilation;
pub mod grid;
pub mod lemerdy;
pub mod packel;
pub mod riemann;
pub mod suite;
pub mod wsemi;

pub use bhat::{
    bhat_skeide, bhat_skeide_envelope, bhat_skeide_matrix, bhat_skeide_weight,
    identity_tensor_power,
};
pub use dilation::{
    compress_to_h, leftzero_idempotents, schaeffer_dilation, HolbrookFactorization,
};
pub use grid::{
    block_gram, evolution_semigroup, indicator_embedding, integration_functional, left_shift,
    left_shift_matrix, right_shift, right_shift_matrix, GridSpace,
};
pub use lemerdy::{lemerdy_eval, lemerdy_generator, lemerdy_semigroup, LeMerdyBasis};
pub use packel::{
    nilpotent_lower_bound_oracle, packel_nilpotent_compression, packel_nilpotent_default,
    packel_reflection, packel_semigroup, reflection_matrix, DyadicSequence, IndexSet,
    NilpotentOracle,
};
pub use riemann::{riemann_liouville, riemann_liouville_semigroup};
pub use suite::{bhat_suite, law_suite, packel_suite, w_suite, IdentityCheck, SuiteReport};
pub use wsemi::{
    int_q_exact, int_q_value, lambda_i_weight, periodic_shift, w_matrix, w_semigroup, wrap_fill,
};
