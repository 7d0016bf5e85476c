//! Fixed-point mappings `T : C -> C` and their sampled certificates.
//!
//! The solvers only need `T` to be quasi-nonexpansive with `I - T`
//! demiclosed at zero. Membership in the symmetric generalized hybrid class
//! with admissible parameters implies both, so the certifier here checks the
//! defining inequality
//!
//! `a ||Tx-Ty||^2 + b (||x-Ty||^2 + ||y-Tx||^2) + c ||x-y||^2
//!   + d (||x-Tx||^2 + ||y-Ty||^2) <= 0`
//!
//! on a sampled grid of pairs, together with the side conditions
//! `a + 2b + c >= 0`, `a + b > 0`, `d >= 0`. A passing report is sampled
//! evidence, not a proof.

use crate::error::Error;
use crate::geometry::ConvexSet;
use crate::linalg::{Matrix, Vector};
use crate::sampling::Sampler;
use crate::tol;

/// Parameters of the symmetric generalized hybrid inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl HybridParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        HybridParams { alpha, beta, gamma, delta }
    }

    /// The nonexpansive instance `(1, 0, -1, 0)`.
    pub fn nonexpansive() -> Self {
        HybridParams::new(1.0, 0.0, -1.0, 0.0)
    }

    /// `alpha + 2 beta + gamma >= 0`.
    pub fn condition_sum(&self) -> bool {
        self.alpha + 2.0 * self.beta + self.gamma >= 0.0
    }

    /// `alpha + beta > 0`.
    pub fn condition_pair(&self) -> bool {
        self.alpha + self.beta > 0.0
    }

    /// `delta >= 0`.
    pub fn condition_delta(&self) -> bool {
        self.delta >= 0.0
    }

    pub fn admissible(&self) -> bool {
        self.condition_sum() && self.condition_pair() && self.condition_delta()
    }
}

/// A self-mapping of the constraint set with a nonempty fixed-point set.
#[derive(Clone, Debug)]
pub enum FixedPointMap {
    Identity,
    /// `x -> c x` with `|c| <= 1`.
    Scaling { factor: f64 },
    /// The metric projection onto a closed convex target.
    ProjectionOnto { set: ConvexSet },
    /// `x -> A x + b` with `||A||_2 <= 1`.
    AffineContraction { a: Matrix, b: Vector },
}

impl FixedPointMap {
    pub fn scaling(factor: f64) -> Result<Self, Error> {
        if !(factor.abs() <= 1.0) {
            return Err(Error::InvalidMapping("scaling factor must satisfy |c| <= 1"));
        }
        Ok(FixedPointMap::Scaling { factor })
    }

    /// Skips the `|c| <= 1` check; the certifier is expected to reject the
    /// result when the factor is genuinely expansive.
    pub fn scaling_unchecked(factor: f64) -> Self {
        FixedPointMap::Scaling { factor }
    }

    pub fn projection_onto(set: ConvexSet) -> Self {
        FixedPointMap::ProjectionOnto { set }
    }

    pub fn affine_contraction(a: Matrix, b: Vector) -> Result<Self, Error> {
        if !a.is_square() {
            return Err(Error::InvalidMapping("affine map matrix must be square"));
        }
        b.check_dim(a.rows())?;
        if a.spectral_norm() > 1.0 + 1e-9 {
            return Err(Error::InvalidMapping("affine map must have ||A|| <= 1"));
        }
        Ok(FixedPointMap::AffineContraction { a, b })
    }

    pub fn affine_unchecked(a: Matrix, b: Vector) -> Self {
        FixedPointMap::AffineContraction { a, b }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector, Error> {
        match self {
            FixedPointMap::Identity => Ok(x.clone()),
            FixedPointMap::Scaling { factor } => Ok(x.scale(*factor)),
            FixedPointMap::ProjectionOnto { set } => set.project(x),
            FixedPointMap::AffineContraction { a, b } => {
                x.check_dim(a.cols())?;
                Ok(&a.matvec(x) + b)
            }
        }
    }

    /// Produces one fixed point when a computable one exists.
    ///
    /// `hint` seeds the search: the identity fixes everything (returns the
    /// hint), projections fix their target set (returns the projected hint),
    /// strict contractions are iterated to their unique fixed point.
    pub fn some_fixed_point(&self, hint: &Vector) -> Result<Option<Vector>, Error> {
        match self {
            FixedPointMap::Identity => Ok(Some(hint.clone())),
            FixedPointMap::Scaling { factor } => {
                if *factor == 1.0 {
                    Ok(Some(hint.clone()))
                } else {
                    Ok(Some(Vector::zeros(hint.dim())))
                }
            }
            FixedPointMap::ProjectionOnto { set } => Ok(Some(set.project(hint)?)),
            FixedPointMap::AffineContraction { a, .. } => {
                if a.spectral_norm() >= 1.0 - 1e-12 {
                    return Ok(None);
                }
                let mut x = hint.clone();
                for _ in 0..100_000 {
                    let next = self.apply(&x)?;
                    if next.dist(&x) <= 1e-15 {
                        return Ok(Some(next));
                    }
                    x = next;
                }
                Ok(None)
            }
        }
    }
}

/// Outcome of sampling the hybrid inequality over `C x C`.
#[derive(Clone, Debug)]
pub struct CertifyReport {
    /// Largest observed left-hand side; nonpositive means the inequality held.
    pub max_lhs: f64,
    /// The sampled pair attaining `max_lhs`.
    pub worst_pair: (Vector, Vector),
    pub condition_sum: bool,
    pub condition_pair: bool,
    pub condition_delta: bool,
    pub samples: usize,
}

impl CertifyReport {
    /// The sampled inequality held everywhere (up to tolerance).
    pub fn inequality_holds(&self) -> bool {
        self.max_lhs <= tol::CERTIFY_TOL
    }

    /// Inequality and all three parameter conditions.
    pub fn passes(&self) -> bool {
        self.inequality_holds() && self.condition_sum && self.condition_pair && self.condition_delta
    }
}

/// Evaluates the hybrid inequality on `samples` sampled pairs (a quarter of
/// the points come from corners and boundaries). Requires `samples >= 1000`.
pub fn certify_hybrid(
    map: &FixedPointMap,
    params: &HybridParams,
    set: &ConvexSet,
    samples: usize,
    seed: u64,
) -> Result<CertifyReport, Error> {
    if samples < 1000 {
        return Err(Error::InvalidParams("certification needs at least 1000 sample pairs"));
    }
    let mut sampler = Sampler::new(seed);
    let mut max_lhs = f64::NEG_INFINITY;
    let mut worst = None;
    for _ in 0..samples {
        let (x, y) = sampler.pair_in(set, true);
        let tx = map.apply(&x)?;
        let ty = map.apply(&y)?;
        let lhs = params.alpha * tx.dist_sq(&ty)
            + params.beta * (x.dist_sq(&ty) + y.dist_sq(&tx))
            + params.gamma * x.dist_sq(&y)
            + params.delta * (x.dist_sq(&tx) + y.dist_sq(&ty));
        if lhs > max_lhs {
            max_lhs = lhs;
            worst = Some((x, y));
        }
    }
    let worst_pair = worst.expect("samples >= 1000");
    Ok(CertifyReport {
        max_lhs,
        worst_pair,
        condition_sum: params.condition_sum(),
        condition_pair: params.condition_pair(),
        condition_delta: params.condition_delta(),
        samples,
    })
}

/// Checks `||Tx - p|| <= ||x - p||` on sampled `x` for a verified fixed
/// point `p`. Errs when `p` does not reproduce itself to `1e-10`.
pub fn check_quasi_nonexpansive(
    map: &FixedPointMap,
    fixed_point: &Vector,
    set: &ConvexSet,
    samples: usize,
    seed: u64,
) -> Result<bool, Error> {
    let image = map.apply(fixed_point)?;
    let residual = image.dist(fixed_point);
    if residual > tol::FIXED_POINT_TOL {
        return Err(Error::NotAFixedPoint { residual });
    }
    let mut sampler = Sampler::new(seed);
    for _ in 0..samples {
        let x = sampler.point_in(set);
        let tx = map.apply(&x)?;
        if tx.dist(fixed_point) > x.dist(fixed_point) + tol::SLACK_QNE {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Finite-dimensional surrogate for demiclosedness of `I - T` at zero: if a
/// numerically convergent trajectory has vanishing displacement residuals,
/// its limit must be fixed.
///
/// The trajectory must have settled (its final step below `1e-8`), otherwise
/// [`Error::NonConvergentTrajectory`] is returned. The verdict is
/// `||T(x_last) - x_last|| <= 1e-8`.
pub fn check_demiclosed_at_zero(
    map: &FixedPointMap,
    trajectory: &[Vector],
) -> Result<bool, Error> {
    let last = trajectory
        .last()
        .ok_or(Error::NonConvergentTrajectory { last_step: f64::INFINITY })?;
    if trajectory.len() >= 2 {
        let prev = &trajectory[trajectory.len() - 2];
        let last_step = prev.dist(last);
        if last_step >= 1e-8 {
            return Err(Error::NonConvergentTrajectory { last_step });
        }
    }
    let image = map.apply(last)?;
    Ok(image.dist(last) <= 1e-8)
}
