//! Centralized numeric tolerances.
//!
//! Every threshold used by the solvers and their instrumentation lives here,
//! so the relationships between them stay visible: inner solves sit two
//! orders below the outer stopping tolerance, projection error sits well
//! below both, and invariant slacks absorb only accumulated rounding.

/// Iterate-change tolerance for Dykstra's cyclic projection.
pub const TOL_PROJ: f64 = 1e-10;

/// Per-member feasibility tolerance for set membership checks.
pub const TOL_FEAS: f64 = 1e-9;

/// Sweep cap for Dykstra's cyclic projection.
pub const MAX_DYKSTRA_ITERS: usize = 10_000;

/// Slack for the variational characterization of a projection,
/// `<x - p, y - p> <= TOL_VI` for feasible probes `y`.
pub const TOL_VI: f64 = 1e-10;

/// Fixed-point residual tolerance for the strongly convex inner solves.
pub const INNER_TOL: f64 = 1e-10;

/// Iteration cap for the projected-gradient inner solver.
pub const MAX_INNER_ITERS: usize = 5_000;

/// Default outer stopping tolerance.
pub const TOL_STOP: f64 = 1e-8;

/// Default outer iteration cap.
pub const MAX_OUTER_ITERS: usize = 20_000;

/// Slack for the per-iteration distance-decrease inequality of the
/// extragradient step (quadratic form, hence the looser bound).
pub const SLACK_FEJER: f64 = 1e-8;

/// Slack for the subgradient-step decrease inequality (quadratic form).
pub const SLACK_DESCENT: f64 = 1e-8;

/// Slack for quasi-nonexpansive step bounds on `t^k` and `u^k`.
pub const SLACK_QNE: f64 = 1e-10;

/// Residual bound for containment of a reference solution in the
/// constructed halfspaces.
pub const SLACK_CONTAIN: f64 = 1e-9;

/// Slack for monotonicity of the distance to the starting point.
pub const SLACK_MONOTONE: f64 = 1e-10;

/// Residuals recorded on a convergent run must end below this.
pub const RESIDUAL_VANISH: f64 = 1e-6;

/// Acceptance bound for the sampled hybrid-mapping inequality.
pub const CERTIFY_TOL: f64 = 1e-9;

/// A candidate fixed point must reproduce itself to this accuracy.
pub const FIXED_POINT_TOL: f64 = 1e-10;

/// Threshold under which a subgradient is treated as zero.
pub const ZERO_SUBGRAD_TOL: f64 = 1e-14;

/// Eigenvalue floor when certifying positive semidefiniteness.
pub const PSD_EIG_FLOOR: f64 = -1e-10;

/// Floor applied to estimated Lipschitz-type constants.
pub const LIPSCHITZ_FLOOR: f64 = 1e-6;
