//! The strongly convex inner subproblem
//! `min { rho f(a, y) + 1/2 ||y - x||^2 : y in C }`.
//!
//! The quadratic term makes the objective 1-strongly convex, so the
//! minimizer is unique. For the variational-inequality family `f(a, .)` is
//! affine and the solution is a single projection `P_C(x - rho F(a))`; the
//! quadratic family is solved by projected gradient with a fixed step, which
//! contracts linearly under strong convexity. Either way the result carries
//! a fixed-point residual certificate `||y - P_C(y - g(y))|| <= tol`.

use crate::bifunction::Bifunction;
use crate::error::Error;
use crate::geometry::ConvexSet;
use crate::linalg::Vector;
use crate::tol;

/// One prox subproblem: `anchor_f` is the frozen first argument of `f`,
/// `anchor_prox` the center of the quadratic term.
#[derive(Clone, Debug)]
pub struct ProxSubproblem<'a> {
    pub f: &'a Bifunction,
    pub set: &'a ConvexSet,
    pub anchor_f: &'a Vector,
    pub anchor_prox: &'a Vector,
    pub rho: f64,
}

/// Controls for the projected-gradient path.
#[derive(Clone, Copy, Debug)]
pub struct InnerOpts {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for InnerOpts {
    fn default() -> Self {
        InnerOpts {
            tol: tol::INNER_TOL,
            max_iters: tol::MAX_INNER_ITERS,
        }
    }
}

impl<'a> ProxSubproblem<'a> {
    pub fn new(
        f: &'a Bifunction,
        set: &'a ConvexSet,
        anchor_f: &'a Vector,
        anchor_prox: &'a Vector,
        rho: f64,
    ) -> Self {
        ProxSubproblem { f, set, anchor_f, anchor_prox, rho }
    }

    /// Gradient of the objective at `y`:
    /// `rho * grad_y f(a, y) + (y - x)`.
    fn gradient(&self, y: &Vector) -> Result<Vector, Error> {
        let grad_f = self.f.partial_subgradient(self.anchor_f, y)?;
        Ok(Vector::combine(1.0, y, -1.0, self.anchor_prox).add_scaled(self.rho, &grad_f))
    }

    /// Fixed-point residual `||y - P_C(y - g(y))||` certifying optimality.
    pub fn residual(&self, y: &Vector) -> Result<f64, Error> {
        let g = self.gradient(y)?;
        let step = self.set.project(&(y - &g))?;
        Ok(step.dist(y))
    }

    /// Solves the subproblem with default tolerances, taking the single
    /// projection shortcut for the affine family.
    pub fn solve(&self) -> Result<Vector, Error> {
        self.solve_with(&InnerOpts::default())
    }

    pub fn solve_with(&self, opts: &InnerOpts) -> Result<Vector, Error> {
        match self.f {
            Bifunction::ViInduced { op } => {
                let fa = op.apply(self.anchor_f)?;
                let target = self.anchor_prox.add_scaled(-self.rho, &fa);
                self.set.project(&target)
            }
            Bifunction::QuadraticSaddle { p, q, lin, .. } => {
                // The unconstrained minimizer solves
                // (I + 2 rho Q) y = x - rho ((P - Q) a + lin); when it is
                // feasible it is the constrained solution, exactly.
                let n = self.anchor_prox.dim();
                if p.rows() == n {
                    let mut system = q.clone();
                    for i in 0..n {
                        for j in 0..n {
                            let v = 2.0 * self.rho * system.get(i, j);
                            system.set(i, j, if i == j { 1.0 + v } else { v });
                        }
                    }
                    let pa = p.matvec(self.anchor_f);
                    let qa = q.matvec(self.anchor_f);
                    let drift = &(&pa - &qa) + lin;
                    let rhs = self.anchor_prox.add_scaled(-self.rho, &drift);
                    if let Some(candidate) = system.solve_spd(&rhs) {
                        if self.set.violation(&candidate) <= 1e-13 {
                            return Ok(candidate);
                        }
                    }
                }
                self.solve_projected_gradient(opts)
            }
        }
    }

    /// The generic projected-gradient path, usable for every family.
    pub fn solve_generic(&self, opts: &InnerOpts) -> Result<Vector, Error> {
        self.solve_projected_gradient(opts)
    }

    fn solve_projected_gradient(&self, opts: &InnerOpts) -> Result<Vector, Error> {
        // Step 1/(1 + rho * curvature): with unit strong convexity this keeps
        // the iteration a contraction.
        let step = 1.0 / (1.0 + self.rho * self.f.curvature_in_y());
        let mut y = self.set.project(self.anchor_prox)?;
        let mut residual = f64::INFINITY;
        for iter in 0..opts.max_iters {
            let g = self.gradient(&y)?;
            let unit_step = self.set.project(&(&y - &g))?;
            residual = unit_step.dist(&y);
            if residual <= opts.tol {
                return Ok(y);
            }
            y = if step == 1.0 {
                unit_step
            } else {
                self.set.project(&y.add_scaled(-step, &g))?
            };
            if !y.is_finite() {
                return Err(Error::NonFiniteValue);
            }
            let _ = iter;
        }
        Err(Error::InnerNoConvergence {
            iters: opts.max_iters,
            residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifunction::Operator;
    use crate::linalg::Matrix;
    use alloc::vec;

    fn v(coords: &[f64]) -> Vector {
        Vector::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn vi_fast_path_is_a_projection() {
        let f = Bifunction::vi_induced(Operator::Identity);
        let set = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let a = v(&[0.5, 0.0]);
        let x = v(&[0.5, 0.0]);
        let prox = ProxSubproblem::new(&f, &set, &a, &x, 0.9);
        let y = prox.solve().unwrap();
        // P_C(x - rho F(a)) = 0.1 * x here.
        assert!(y.dist(&v(&[0.05, 0.0])) < 1e-15);
        assert!(prox.residual(&y).unwrap() < 1e-12);
    }

    #[test]
    fn tiny_rho_recovers_plain_projection() {
        let f = Bifunction::vi_induced(Operator::Rotation { theta: 1.0 });
        let set = ConvexSet::box_set(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let a = v(&[0.4, 0.6]);
        let x = v(&[2.0, -1.0]);
        let prox = ProxSubproblem::new(&f, &set, &a, &x, 1e-12);
        let y = prox.solve().unwrap();
        let plain = set.project(&x).unwrap();
        assert!(y.dist(&plain) < 1e-10);
    }

    #[test]
    fn quadratic_saddle_on_box_matches_separable_solution() {
        // f((2,2), y) = <a + y, y - a>; the prox objective separates per
        // coordinate and each coordinate solves min 0.1 y^2 + (y-2)^2/2 on
        // [0,1], whose minimizer saturates at 1.
        let f = Bifunction::quadratic_saddle(
            Matrix::identity(2),
            Matrix::identity(2),
            Vector::zeros(2),
        )
        .unwrap();
        let set = ConvexSet::box_set(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let a = v(&[2.0, 2.0]);
        let prox = ProxSubproblem::new(&f, &set, &a, &a, 0.1);
        let y = prox.solve().unwrap();
        assert!(y.dist(&v(&[1.0, 1.0])) < 1e-9, "{y:?}");
    }

    #[test]
    fn fast_path_agrees_with_generic_path() {
        let f = Bifunction::vi_induced(Operator::Rotation { theta: 0.3 });
        let set = ConvexSet::ball(v(&[0.2, -0.1]), 0.8).unwrap();
        let a = v(&[0.3, 0.3]);
        let x = v(&[0.5, -0.2]);
        let prox = ProxSubproblem::new(&f, &set, &a, &x, 0.7);
        let fast = prox.solve().unwrap();
        let generic = prox.solve_generic(&InnerOpts::default()).unwrap();
        assert!(fast.dist(&generic) <= 1e-10);
    }

    #[test]
    fn exhausted_budget_is_reported() {
        // Anisotropic curvature keeps the fixed-step iteration from landing
        // exactly, so a zero tolerance must exhaust the budget.
        let q = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.25]]).unwrap();
        let f = Bifunction::quadratic_saddle(q.clone(), q, Vector::zeros(2)).unwrap();
        let set = ConvexSet::box_set(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let a = v(&[0.6, 0.6]);
        let prox = ProxSubproblem::new(&f, &set, &a, &a, 0.1);
        let opts = InnerOpts { tol: 0.0, max_iters: 3 };
        assert!(matches!(
            prox.solve_with(&opts),
            Err(Error::InnerNoConvergence { .. })
        ));
    }
}
