//! Executable forms of the similarity characterisations: limit curves,
//! trichotomy classification, renorming constructions and bound audits.
//!
//! Everything here is assembled from [`weightsolve`](crate::weightsolve)
//! verdicts. At a fixed finite dimension a semigroup with a finite joint
//! constant is always classified as similar to a contraction semigroup; the
//! infinite-dimensional alternatives only show up as divergence across a
//! family of truncations.

pub mod audit;
pub mod limits;
pub mod renorm;

pub use audit::{
    certificate_factorization, holbrook_bound_audit, holbrook_certificate_audit,
    local_commutation_slope, semigroup_simconst_audit, simconst_bound_audit, simconst_rhs,
    AuditInputs, AuditStatus, BoundAudit, SlopeReport, AUDIT_TOL,
};
pub use limits::{
    classify, default_lambda_grid, default_time_grid, resolvent_constants, small_time_constants,
    time_constants, ClassifyInput, ConstantCurve, CurvePoint, FamilyCurve, FamilyPoint,
    PointStatus, TrichotomyCase, TrichotomyReport, VerdictSummary,
};
pub use renorm::{
    average_renorm, is_bounded_group, liapunov_renorm, nagy_isometry_test, orbit_sup, post_widder,
    AverageRenorm, LiapunovRenorm, NagyReport,
};
