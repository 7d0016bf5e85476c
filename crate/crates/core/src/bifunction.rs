//! Equilibrium bifunctions `f(x, y)` with `f(x, x) = 0`.
//!
//! Two smooth families are provided. `ViInduced` wraps an operator `F` as
//! `f(x, y) = <F(x), y - x>`, which turns the equilibrium problem into the
//! variational inequality for `F`. `QuadraticSaddle` is the classic
//! quadratic family `f(x, y) = <P x + Q y + q, y - x>` with symmetric `P`,
//! `Q` and positive semidefinite `Q`, so `f(x, .)` is convex.
//!
//! Both families are differentiable in the second argument, making the
//! partial subgradient a singleton; selection steps downstream are therefore
//! deterministic.

use crate::error::Error;
use crate::geometry::ConvexSet;
use crate::linalg::{Matrix, Vector};
use crate::sampling::Sampler;
use crate::tol;

/// An operator `R^n -> R^n` for the variational-inequality bifunction.
#[derive(Clone, Debug)]
pub enum Operator {
    Identity,
    /// `x -> A x + b`.
    Affine { a: Matrix, b: Vector },
    /// Planar rotation by `theta` applied to consecutive coordinate pairs;
    /// a trailing odd coordinate is left unchanged.
    Rotation { theta: f64 },
}

impl Operator {
    pub fn affine(a: Matrix, b: Vector) -> Result<Self, Error> {
        if !a.is_square() {
            return Err(Error::InvalidSet("affine operator matrix must be square"));
        }
        b.check_dim(a.rows())?;
        Ok(Operator::Affine { a, b })
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector, Error> {
        match self {
            Operator::Identity => Ok(x.clone()),
            Operator::Affine { a, b } => {
                x.check_dim(a.cols())?;
                Ok(&a.matvec(x) + b)
            }
            Operator::Rotation { theta } => {
                let (c, s) = (libm::cos(*theta), libm::sin(*theta));
                let xs = x.as_slice();
                let mut out = xs.to_vec();
                let mut i = 0;
                while i + 1 < xs.len() {
                    out[i] = c * xs[i] - s * xs[i + 1];
                    out[i + 1] = s * xs[i] + c * xs[i + 1];
                    i += 2;
                }
                Ok(Vector::from_raw(out))
            }
        }
    }

    /// A Lipschitz constant of the operator.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Operator::Identity | Operator::Rotation { .. } => 1.0,
            Operator::Affine { a, .. } => a.spectral_norm(),
        }
    }
}

/// Lipschitz-type constants `(L1, L2)` for the three-point inequality
/// `f(x,y) + f(y,z) >= f(x,z) - L1 ||x-y||^2 - L2 ||y-z||^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzConstants {
    pub l1: f64,
    pub l2: f64,
}

impl LipschitzConstants {
    pub fn new(l1: f64, l2: f64) -> Result<Self, Error> {
        if !(l1 > 0.0 && l2 > 0.0) || !l1.is_finite() || !l2.is_finite() {
            return Err(Error::InvalidParams("Lipschitz constants must be positive"));
        }
        Ok(LipschitzConstants { l1, l2 })
    }

    /// The admissible upper bound `min(1/(2 L1), 1/(2 L2))` on the prox
    /// stepsize of the fixed-step extragradient scheme.
    pub fn rho_bound(&self) -> f64 {
        (1.0 / (2.0 * self.l1)).min(1.0 / (2.0 * self.l2))
    }
}

/// An equilibrium bifunction together with cached spectral data.
#[derive(Clone, Debug)]
pub enum Bifunction {
    ViInduced {
        op: Operator,
    },
    QuadraticSaddle {
        p: Matrix,
        q: Matrix,
        lin: Vector,
        /// `||Q||_2`, cached at construction for inner-solve step sizes.
        q_norm: f64,
        /// `||P - Q||_2 / 2`, the analytic Lipschitz-type constant.
        analytic_lipschitz: f64,
    },
}

impl Bifunction {
    pub fn vi_induced(op: Operator) -> Self {
        Bifunction::ViInduced { op }
    }

    /// Builds `f(x, y) = <P x + Q y + lin, y - x>`.
    ///
    /// `P` and `Q` must be symmetric and `Q` positive semidefinite (up to an
    /// eigenvalue floor), otherwise `f(x, .)` would not be convex and the
    /// prox subproblems downstream would lose their unique minimizers.
    pub fn quadratic_saddle(p: Matrix, q: Matrix, lin: Vector) -> Result<Self, Error> {
        if !p.is_square() || !q.is_square() || p.rows() != q.rows() {
            return Err(Error::InvalidSet("saddle matrices must be square, same size"));
        }
        lin.check_dim(p.rows())?;
        if !p.is_symmetric(1e-9) || !q.is_symmetric(1e-9) {
            return Err(Error::NotSymmetric);
        }
        let min_eig = q.min_eigenvalue()?;
        if min_eig < tol::PSD_EIG_FLOOR {
            return Err(Error::NonConvexInY { min_eigenvalue: min_eig });
        }
        let q_norm = q.spectral_norm();
        let analytic_lipschitz = p.sub(&q).spectral_norm() / 2.0;
        Ok(Bifunction::QuadraticSaddle { p, q, lin, q_norm, analytic_lipschitz })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Bifunction::ViInduced { op } => match op {
                Operator::Affine { a, .. } => Some(a.rows()),
                _ => None,
            },
            Bifunction::QuadraticSaddle { p, .. } => Some(p.rows()),
        }
    }

    /// `f(x, y)`.
    pub fn evaluate(&self, x: &Vector, y: &Vector) -> Result<f64, Error> {
        x.check_dim(y.dim())?;
        let diff = y - x;
        match self {
            Bifunction::ViInduced { op } => Ok(op.apply(x)?.dot(&diff)),
            Bifunction::QuadraticSaddle { p, q, lin, .. } => {
                x.check_dim(p.rows())?;
                let inner = &(&p.matvec(x) + &q.matvec(y)) + lin;
                Ok(inner.dot(&diff))
            }
        }
    }

    /// The gradient of the convex function `f(z, .)` at `x`.
    ///
    /// Both families are smooth in the second argument, so the subgradient
    /// set is this singleton.
    pub fn partial_subgradient(&self, z: &Vector, x: &Vector) -> Result<Vector, Error> {
        z.check_dim(x.dim())?;
        match self {
            Bifunction::ViInduced { op } => op.apply(z),
            Bifunction::QuadraticSaddle { p, q, lin, .. } => {
                z.check_dim(p.rows())?;
                // d/dy <P z + Q y + lin, y - z> at y = x is
                // P z + lin + Q (2x - z) for symmetric Q.
                let two_x_minus_z = Vector::combine(2.0, x, -1.0, z);
                Ok(&(&p.matvec(z) + &q.matvec(&two_x_minus_z)) + lin)
            }
        }
    }

    /// Curvature bound of `y -> f(a, y)`: zero for the affine family,
    /// `2 ||Q||_2` for the quadratic one.
    pub fn curvature_in_y(&self) -> f64 {
        match self {
            Bifunction::ViInduced { .. } => 0.0,
            Bifunction::QuadraticSaddle { q_norm, .. } => 2.0 * q_norm,
        }
    }

    /// The analytic Lipschitz-type constant `||P - Q||_2 / 2` when one
    /// exists for this family.
    pub fn analytic_lipschitz(&self) -> Option<f64> {
        match self {
            Bifunction::ViInduced { .. } => None,
            Bifunction::QuadraticSaddle { analytic_lipschitz, .. } => Some(*analytic_lipschitz),
        }
    }
}

/// Checks the three-point inequality with the given constants on sampled
/// triples from `set`.
pub fn validate_lipschitz(
    f: &Bifunction,
    set: &ConvexSet,
    constants: &LipschitzConstants,
    samples: usize,
    seed: u64,
) -> Result<bool, Error> {
    let mut sampler = Sampler::new(seed);
    for _ in 0..samples {
        let (x, y, z) = sampler.triple_in(set);
        let lhs = f.evaluate(&x, &y)? + f.evaluate(&y, &z)?;
        let rhs = f.evaluate(&x, &z)?
            - constants.l1 * x.dist_sq(&y)
            - constants.l2 * y.dist_sq(&z);
        if lhs < rhs - 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Grid of candidate constants: 1, 2, 5 per decade from the floor upward.
fn candidate_grid() -> impl Iterator<Item = f64> {
    (-6..=6).flat_map(|exp| {
        [1.0, 2.0, 5.0]
            .into_iter()
            .map(move |m| m * libm::pow(10.0, exp as f64))
    })
}

/// Estimates Lipschitz-type constants by sampled violation ratios.
///
/// The empirical requirement is the largest ratio
/// `(f(x,z) - f(x,y) - f(y,z)) / (||x-y||^2 + ||y-z||^2)` over sampled
/// triples; the returned value is the smallest grid candidate at or above
/// 1.5 times that requirement (safety margin), floored at `1e-6`. For the
/// quadratic family the analytic value `||P - Q||_2 / 2` is tried first and
/// returned unchanged when it survives the same sampled validation.
pub fn estimate_lipschitz(
    f: &Bifunction,
    set: &ConvexSet,
    samples: usize,
    seed: u64,
) -> Result<LipschitzConstants, Error> {
    if samples < 100 {
        return Err(Error::InvalidParams("need at least 100 samples"));
    }
    let mut sampler = Sampler::new(seed);
    let mut required: f64 = 0.0;
    for _ in 0..samples {
        let (x, y, z) = sampler.triple_in(set);
        let violation = f.evaluate(&x, &z)? - f.evaluate(&x, &y)? - f.evaluate(&y, &z)?;
        let denom = x.dist_sq(&y) + y.dist_sq(&z);
        if denom > 1e-24 {
            // Same slack as `validate_lipschitz`, so a candidate at exactly
            // `required` passes that check.
            required = required.max((violation - 1e-9) / denom);
        }
    }
    required = required.max(0.0);
    if let Some(analytic) = f.analytic_lipschitz() {
        let value = analytic.max(tol::LIPSCHITZ_FLOOR);
        if value >= required {
            return LipschitzConstants::new(value, value);
        }
    }
    let target = (1.5 * required).max(tol::LIPSCHITZ_FLOOR);
    for candidate in candidate_grid() {
        if candidate >= target {
            return LipschitzConstants::new(candidate, candidate);
        }
    }
    Err(Error::ValidationFailed(
        "no candidate Lipschitz constant passed the sampled inequality",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(coords: &[f64]) -> Vector {
        Vector::new(coords.to_vec()).unwrap()
    }

    fn saddle(p: Matrix, q: Matrix, lin: Vector) -> Bifunction {
        Bifunction::quadratic_saddle(p, q, lin).unwrap()
    }

    #[test]
    fn vanishes_on_the_diagonal() {
        let f = Bifunction::vi_induced(Operator::Identity);
        let x = v(&[1.3, -2.0, 0.25]);
        assert_eq!(f.evaluate(&x, &x).unwrap(), 0.0);

        let g = saddle(
            Matrix::scaled_identity(2, 2.0),
            Matrix::identity(2),
            Vector::zeros(2),
        );
        let y = v(&[0.7, -0.1]);
        assert_eq!(g.evaluate(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn identity_vi_example() {
        let f = Bifunction::vi_induced(Operator::Identity);
        let value = f.evaluate(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert_eq!(value, -1.0);
    }

    #[test]
    fn saddle_matches_explicit_matvec() {
        // Recomputed by hand: P x = (2, 2), Q y = (0, 0), so
        // f = <(2, 2), (-1, -1)> = -4.
        let f = saddle(
            Matrix::scaled_identity(2, 2.0),
            Matrix::identity(2),
            Vector::zeros(2),
        );
        let value = f.evaluate(&v(&[1.0, 1.0]), &v(&[0.0, 0.0])).unwrap();
        assert_eq!(value, -4.0);
    }

    #[test]
    fn vi_subgradient_is_operator_at_z() {
        let f = Bifunction::vi_induced(Operator::Rotation { theta: 0.5 });
        let z = v(&[1.0, 2.0]);
        let w = f.partial_subgradient(&z, &v(&[-3.0, 4.0])).unwrap();
        let fz = Operator::Rotation { theta: 0.5 }.apply(&z).unwrap();
        assert_eq!(w.as_slice(), fz.as_slice());
    }

    #[test]
    fn affine_saddle_subgradient_is_constant() {
        let f = saddle(
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 2),
            v(&[3.0, -1.0]),
        );
        let w = f
            .partial_subgradient(&v(&[0.5, 0.5]), &v(&[9.0, 9.0]))
            .unwrap();
        assert_eq!(w.as_slice(), &[3.0, -1.0]);
    }

    #[test]
    fn non_psd_q_is_rejected() {
        let q = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let err = Bifunction::quadratic_saddle(q.clone(), q, Vector::zeros(2));
        assert!(matches!(err, Err(Error::NonConvexInY { .. })));
    }

    #[test]
    fn analytic_constant_degenerates_when_p_equals_q() {
        let f = saddle(Matrix::identity(2), Matrix::identity(2), Vector::zeros(2));
        assert!(f.analytic_lipschitz().unwrap().abs() < 1e-15);
        let set = ConvexSet::box_set(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let est = estimate_lipschitz(&f, &set, 200, 11).unwrap();
        // Floored at 1e-6.
        assert_eq!(est.l1, tol::LIPSCHITZ_FLOOR);
        assert_eq!(est.l2, tol::LIPSCHITZ_FLOOR);
    }

    #[test]
    fn singleton_domain_returns_smallest_candidate() {
        let f = Bifunction::vi_induced(Operator::Identity);
        let point = v(&[0.4]);
        let set = ConvexSet::box_set(point.clone(), point).unwrap();
        let est = estimate_lipschitz(&f, &set, 150, 5).unwrap();
        assert_eq!(est.l1, tol::LIPSCHITZ_FLOOR);
    }

    #[test]
    fn identity_vi_half_passes_on_unit_box() {
        let f = Bifunction::vi_induced(Operator::Identity);
        let set = ConvexSet::box_set(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let half = LipschitzConstants::new(0.5, 0.5).unwrap();
        assert!(validate_lipschitz(&f, &set, &half, 3000, 20).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let f = Bifunction::vi_induced(Operator::Identity);
        assert!(matches!(
            f.evaluate(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
