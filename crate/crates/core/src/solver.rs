//! The two outer iterations and their shared hybrid-projection machinery.
//!
//! Both algorithms keep three nested constraints per iteration: the bisector
//! cut `C_k = {v : ||v - u^k|| <= ||v - x^k||}`, the anchored cut
//! `Q_k = {v : <v - x^k, x_g - x^k> <= 0}`, and the feasible set `C` itself.
//! The next iterate is the projection of the *starting* point onto
//! `C_k /\ Q_k /\ C`, which is what forces strong convergence of the whole
//! sequence to the feasible point nearest the start.
//!
//! The extragradient variant ([`Algorithm::Extragradient`]) computes the
//! predictor/corrector pair `y^k, z^k` from two prox solves and needs
//! Lipschitz-type constants to bound its stepsize. The linesearch variant
//! ([`Algorithm::Linesearch`]) replaces the corrector solve with a
//! backtracking search along `[x^k, y^k]` followed by a projected subgradient
//! step, and needs no Lipschitz data at all.
//!
//! Instrumentation is first-class: every inequality the iterates are
//! supposed to satisfy can be measured per iteration against a reference
//! solution, and violations are counted in the returned trace.

use alloc::vec::Vec;

use crate::bifunction::{Bifunction, LipschitzConstants};
use crate::error::Error;
use crate::geometry::{project_set_with_cuts, ConvexSet, DykstraOpts, Halfspace};
use crate::inner::{InnerOpts, ProxSubproblem};
use crate::linalg::Vector;
use crate::mapping::FixedPointMap;
use crate::tol;

/// Which outer iteration to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Extragradient,
    Linesearch,
}

/// A scalar sequence `k -> value`, restricted to the shapes the solvers
/// actually need so that configurations stay serializable and runs stay
/// reproducible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// `1 - 1/(k + offset)`, climbing toward one.
    ApproachOne { offset: f64 },
}

impl Schedule {
    pub fn value(&self, k: usize) -> f64 {
        match self {
            Schedule::Constant(c) => *c,
            Schedule::ApproachOne { offset } => 1.0 - 1.0 / (k as f64 + offset),
        }
    }

    pub fn lower_bound(&self) -> f64 {
        match self {
            Schedule::Constant(c) => *c,
            Schedule::ApproachOne { offset } => 1.0 - 1.0 / offset,
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match self {
            Schedule::Constant(c) => *c,
            Schedule::ApproachOne { .. } => 1.0,
        }
    }
}

/// Parameters of both outer iterations.
#[derive(Clone, Debug)]
pub struct SolverParams {
    /// Prox stepsizes `rho_k`; for the extragradient variant the whole range
    /// must stay below the Lipschitz bound `min(1/(2 L1), 1/(2 L2))`.
    pub rho: Schedule,
    /// Averaging weights `alpha_k` in `[0, 1]`, required to approach one.
    pub alpha: Schedule,
    /// Averaging weights `beta_k` in `[0, beta_bar]` with `beta_bar < 1`.
    pub beta: Schedule,
    /// Relaxation factors `gamma_k` in a closed subinterval of `(0, 2)`;
    /// linesearch variant only.
    pub gamma: Schedule,
    /// Backtracking ratio in `(0, 1)`.
    pub eta: f64,
    /// Sufficient-decrease factor in `(0, 1)`.
    pub mu: f64,
    /// Largest linesearch exponent before giving up.
    pub m_max: u32,
    pub tol_stop: f64,
    pub max_outer_iters: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            rho: Schedule::Constant(1.0),
            alpha: Schedule::ApproachOne { offset: 2.0 },
            beta: Schedule::Constant(0.5),
            gamma: Schedule::Constant(1.0),
            eta: 0.5,
            mu: 0.4,
            m_max: 60,
            tol_stop: tol::TOL_STOP,
            max_outer_iters: tol::MAX_OUTER_ITERS,
        }
    }
}

impl SolverParams {
    /// Defaults for the extragradient variant: constant
    /// `rho = 0.9 * min(1/(2 L1), 1/(2 L2))`.
    pub fn extragradient_defaults(constants: &LipschitzConstants) -> Self {
        SolverParams {
            rho: Schedule::Constant(0.9 * constants.rho_bound()),
            ..SolverParams::default()
        }
    }

    fn validate(&self, algorithm: Algorithm, lipschitz: Option<&LipschitzConstants>) -> Result<(), Error> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParams("eta must lie in (0, 1)"));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidParams("mu must lie in (0, 1)"));
        }
        if self.m_max == 0 {
            return Err(Error::InvalidParams("m_max must be at least 1"));
        }
        if !(self.tol_stop >= 0.0) {
            return Err(Error::InvalidParams("tol_stop must be nonnegative"));
        }
        if self.rho.lower_bound() <= 0.0 {
            return Err(Error::InvalidParams("rho must stay positive"));
        }
        if self.alpha.lower_bound() < 0.0 || self.alpha.upper_bound() > 1.0 {
            return Err(Error::InvalidParams("alpha must stay in [0, 1]"));
        }
        if self.beta.lower_bound() < 0.0 || self.beta.upper_bound() >= 1.0 {
            return Err(Error::InvalidParams("beta must stay in [0, 1)"));
        }
        match algorithm {
            Algorithm::Extragradient => {
                let constants = lipschitz.ok_or(Error::InvalidParams(
                    "extragradient needs Lipschitz-type constants",
                ))?;
                if self.rho.upper_bound() >= constants.rho_bound() {
                    return Err(Error::InvalidParams(
                        "rho must stay below min(1/(2 L1), 1/(2 L2))",
                    ));
                }
            }
            Algorithm::Linesearch => {
                if self.gamma.lower_bound() <= 0.0 || self.gamma.upper_bound() >= 2.0 {
                    return Err(Error::InvalidParams("gamma must stay inside (0, 2)"));
                }
            }
        }
        Ok(())
    }
}

/// The problem data both algorithms consume.
#[derive(Clone, Debug)]
pub struct ProblemDef {
    pub set: ConvexSet,
    pub f: Bifunction,
    pub map: FixedPointMap,
    pub lipschitz: Option<LipschitzConstants>,
}

/// Everything iteration `k` produced, including the next iterate.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub k: usize,
    /// Current iterate `x^k`.
    pub x: Vector,
    /// Prox predictor `y^k`.
    pub y: Vector,
    /// Corrector `z^k` (extragradient) or linesearch point (linesearch,
    /// absent when the short-circuit branch fired).
    pub z: Option<Vector>,
    /// `t^k = alpha_k x^k + (1 - alpha_k) T x^k`.
    pub t: Vector,
    /// `u^k = beta_k t^k + (1 - beta_k) T s` with `s = z^k` or `v^k`.
    pub u: Vector,
    /// Projected subgradient point `v^k` (linesearch only).
    pub v: Option<Vector>,
    /// Selected subgradient `w^k` (linesearch only).
    pub w: Option<Vector>,
    /// `sigma_k = f(z^k, x^k) / ||w^k||^2` (linesearch only).
    pub sigma: Option<f64>,
    /// `eta_k = eta^{m_k}` (linesearch only).
    pub eta_k: Option<f64>,
    /// Accepted linesearch exponent (linesearch only).
    pub m_k: Option<u32>,
    /// The stepsize `rho_k` used this iteration.
    pub rho_k: f64,
    /// The relaxation `gamma_k` used this iteration (linesearch only).
    pub gamma_k: Option<f64>,
    pub c_k: Halfspace,
    pub q_k: Halfspace,
    /// `x^{k+1}`, the projection of the start onto `C_k /\ Q_k /\ C`.
    pub x_next: Vector,
}

/// Result of one backtracking linesearch.
#[derive(Clone, Debug)]
pub struct ArmijoOutcome {
    pub z: Vector,
    pub eta_k: f64,
    pub m_k: u32,
}

/// Finds the smallest exponent `m >= 1` such that
/// `z = (1 - eta^m) x + eta^m y` satisfies
/// `f(z, x) - f(z, y) >= mu / (2 rho) ||x - y||^2`.
pub fn armijo_search(
    f: &Bifunction,
    x: &Vector,
    y: &Vector,
    rho: f64,
    eta: f64,
    mu: f64,
    m_max: u32,
) -> Result<ArmijoOutcome, Error> {
    let target = mu / (2.0 * rho) * x.dist_sq(y);
    let mut eta_pow = 1.0;
    for m in 1..=m_max {
        eta_pow *= eta;
        let z = Vector::combine(1.0 - eta_pow, x, eta_pow, y);
        let gap = f.evaluate(&z, x)? - f.evaluate(&z, y)?;
        if gap >= target {
            return Ok(ArmijoOutcome { z, eta_k: eta_pow, m_k: m });
        }
    }
    Err(Error::LinesearchExhausted { m_max })
}

/// Tight controls for the hybrid projection: the cut geometry feeds the
/// monotonicity of `||x^k - x_g||`, so its projection error has to sit well
/// below the invariant slacks.
fn hybrid_projection_opts() -> DykstraOpts {
    DykstraOpts {
        tol_change: 1e-12,
        tol_feas: 1e-11,
        max_sweeps: tol::MAX_DYKSTRA_ITERS,
    }
}

/// Inner tolerance two orders below the outer stopping tolerance. Errors in
/// the prox solutions tilt the bisector cut, and the hybrid projection
/// multiplies that tilt by the (long) travel from the starting point, so the
/// inner solves must be much more accurate than the outer target.
fn inner_opts_for(params: &SolverParams) -> InnerOpts {
    InnerOpts {
        tol: (params.tol_stop * 1e-2).clamp(1e-13, tol::INNER_TOL),
        max_iters: tol::MAX_INNER_ITERS,
    }
}

/// Projects `x_g` onto `C_k /\ Q_k /\ C`.
fn project_onto_cuts(
    set: &ConvexSet,
    c_k: &Halfspace,
    q_k: &Halfspace,
    x_g: &Vector,
) -> Result<Vector, Error> {
    project_set_with_cuts(set, c_k, q_k, x_g, &hybrid_projection_opts()).map_err(|e| match e {
        Error::NoConvergence { residual, .. } => Error::EmptyIntersection { residual },
        other => other,
    })
}

/// One extragradient iteration: two prox solves, two averaging steps, one
/// hybrid projection.
pub fn alg1_iterate(
    problem: &ProblemDef,
    params: &SolverParams,
    k: usize,
    x: &Vector,
    x_g: &Vector,
) -> Result<IterateState, Error> {
    let rho = params.rho.value(k);
    let alpha = params.alpha.value(k);
    let beta = params.beta.value(k);
    let inner = inner_opts_for(params);

    let y = ProxSubproblem::new(&problem.f, &problem.set, x, x, rho).solve_with(&inner)?;
    let z = ProxSubproblem::new(&problem.f, &problem.set, &y, x, rho).solve_with(&inner)?;

    let tx = problem.map.apply(x)?;
    let t = Vector::combine(alpha, x, 1.0 - alpha, &tx);
    let tz = problem.map.apply(&z)?;
    let u = Vector::combine(beta, &t, 1.0 - beta, &tz);

    let c_k = Halfspace::bisector_toward(&u, x);
    let q_k = Halfspace::anchored_cut(x, x_g);
    let x_next = project_onto_cuts(&problem.set, &c_k, &q_k, x_g)?;

    Ok(IterateState {
        k,
        x: x.clone(),
        y,
        z: Some(z),
        t,
        u,
        v: None,
        w: None,
        sigma: None,
        eta_k: None,
        m_k: None,
        rho_k: rho,
        gamma_k: None,
        c_k,
        q_k,
        x_next,
    })
}

/// One linesearch iteration: a single prox solve, then either the
/// short-circuit `v^k = x^k` (the predictor already coincides with the
/// iterate, so the iterate solves the equilibrium problem to tolerance) or a
/// backtracking search plus a projected subgradient step.
pub fn alg2_iterate(
    problem: &ProblemDef,
    params: &SolverParams,
    k: usize,
    x: &Vector,
    x_g: &Vector,
) -> Result<IterateState, Error> {
    let rho = params.rho.value(k);
    let alpha = params.alpha.value(k);
    let beta = params.beta.value(k);
    let gamma = params.gamma.value(k);
    let inner = inner_opts_for(params);

    let y = ProxSubproblem::new(&problem.f, &problem.set, x, x, rho).solve_with(&inner)?;

    let (z, v, w, sigma, eta_k, m_k);
    if y.dist(x) <= params.tol_stop {
        z = None;
        v = x.clone();
        w = None;
        sigma = None;
        eta_k = None;
        m_k = None;
    } else {
        let outcome = armijo_search(&problem.f, x, &y, rho, params.eta, params.mu, params.m_max)?;
        let w_vec = problem.f.partial_subgradient(&outcome.z, x)?;
        let w_norm_sq = w_vec.norm_sq();
        if libm::sqrt(w_norm_sq) <= tol::ZERO_SUBGRAD_TOL {
            return Err(Error::ZeroSubgradient { norm: libm::sqrt(w_norm_sq) });
        }
        let f_zx = problem.f.evaluate(&outcome.z, x)?;
        let sigma_val = f_zx / w_norm_sq;
        let target = x.add_scaled(-gamma * sigma_val, &w_vec);
        v = problem.set.project(&target)?;
        z = Some(outcome.z);
        w = Some(w_vec);
        sigma = Some(sigma_val);
        eta_k = Some(outcome.eta_k);
        m_k = Some(outcome.m_k);
    }

    let tx = problem.map.apply(x)?;
    let t = Vector::combine(alpha, x, 1.0 - alpha, &tx);
    let tv = problem.map.apply(&v)?;
    let u = Vector::combine(beta, &t, 1.0 - beta, &tv);

    let c_k = Halfspace::bisector_toward(&u, x);
    let q_k = Halfspace::anchored_cut(x, x_g);
    let x_next = project_onto_cuts(&problem.set, &c_k, &q_k, x_g)?;

    Ok(IterateState {
        k,
        x: x.clone(),
        y,
        z,
        t,
        u,
        v: Some(v),
        w,
        sigma,
        eta_k,
        m_k,
        rho_k: rho,
        gamma_k: Some(gamma),
        c_k,
        q_k,
        x_next,
    })
}

/// Per-iteration inequalities the instrumentation can measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    /// Extragradient distance decrease:
    /// `||z-q||^2 <= ||x-q||^2 - (1-2 rho L1)||x-y||^2 - (1-2 rho L2)||y-z||^2`.
    Fejer,
    /// Subgradient-step decrease:
    /// `||v-q||^2 <= ||x-q||^2 - gamma (2-gamma) (sigma ||w||)^2`.
    Descent,
    /// `||t-q|| <= ||x-q||`.
    TBound,
    /// `||u-q|| <= ||x-q||`.
    UBound,
    /// Reference solution stays inside the bisector cut.
    ContainCk,
    /// Reference solution stays inside the anchored cut.
    ContainQk,
    /// `||x^{k+1} - x_g|| >= ||x^k - x_g||`.
    Monotone,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Fejer,
        CheckKind::Descent,
        CheckKind::TBound,
        CheckKind::UBound,
        CheckKind::ContainCk,
        CheckKind::ContainQk,
        CheckKind::Monotone,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Fejer => "fejer",
            CheckKind::Descent => "descent",
            CheckKind::TBound => "t_bound",
            CheckKind::UBound => "u_bound",
            CheckKind::ContainCk => "contain_ck",
            CheckKind::ContainQk => "contain_qk",
            CheckKind::Monotone => "monotone",
        }
    }

    /// The slack this check tolerates before counting a violation.
    pub fn slack(&self) -> f64 {
        match self {
            CheckKind::Fejer => tol::SLACK_FEJER,
            CheckKind::Descent => tol::SLACK_DESCENT,
            CheckKind::TBound | CheckKind::UBound => tol::SLACK_QNE,
            CheckKind::ContainCk | CheckKind::ContainQk => tol::SLACK_CONTAIN,
            CheckKind::Monotone => tol::SLACK_MONOTONE,
        }
    }
}

/// Which checks to run per iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckSet {
    pub fejer: bool,
    pub descent: bool,
    pub t_bound: bool,
    pub u_bound: bool,
    pub containment: bool,
    pub monotone: bool,
}

impl CheckSet {
    pub fn all() -> Self {
        CheckSet {
            fejer: true,
            descent: true,
            t_bound: true,
            u_bound: true,
            containment: true,
            monotone: true,
        }
    }

    pub fn none() -> Self {
        CheckSet {
            fejer: false,
            descent: false,
            t_bound: false,
            u_bound: false,
            containment: false,
            monotone: false,
        }
    }

    pub fn enabled(&self, kind: CheckKind) -> bool {
        match kind {
            CheckKind::Fejer => self.fejer,
            CheckKind::Descent => self.descent,
            CheckKind::TBound => self.t_bound,
            CheckKind::UBound => self.u_bound,
            CheckKind::ContainCk | CheckKind::ContainQk => self.containment,
            CheckKind::Monotone => self.monotone,
        }
    }
}

/// Instrumentation configuration for a run.
#[derive(Clone, Debug)]
pub struct Instrumentation {
    pub checks: CheckSet,
    /// A certified member of the solution set; most checks need one.
    pub reference: Option<Vector>,
    /// Keep the full per-iteration states in the result.
    pub keep_states: bool,
}

impl Default for Instrumentation {
    fn default() -> Self {
        Instrumentation {
            checks: CheckSet::all(),
            reference: None,
            keep_states: false,
        }
    }
}

impl Instrumentation {
    pub fn none() -> Self {
        Instrumentation {
            checks: CheckSet::none(),
            reference: None,
            keep_states: false,
        }
    }

    /// The checks that will actually produce measurements for this
    /// problem/algorithm combination, in a fixed order.
    pub fn active_checks(&self, algorithm: Algorithm, has_lipschitz: bool) -> Vec<CheckKind> {
        let has_ref = self.reference.is_some();
        CheckKind::ALL
            .into_iter()
            .filter(|kind| self.checks.enabled(*kind))
            .filter(|kind| match kind {
                CheckKind::Fejer => {
                    has_ref && has_lipschitz && algorithm == Algorithm::Extragradient
                }
                CheckKind::Descent => has_ref && algorithm == Algorithm::Linesearch,
                CheckKind::TBound | CheckKind::UBound => has_ref,
                CheckKind::ContainCk | CheckKind::ContainQk => has_ref,
                CheckKind::Monotone => true,
            })
            .collect()
    }
}

/// One measured inequality: `value <= slack` means pass.
#[derive(Clone, Copy, Debug)]
pub struct Measurement {
    pub kind: CheckKind,
    pub value: f64,
    pub pass: bool,
}

/// Scalar summary of one iteration, the unit of the trace.
#[derive(Clone, Debug)]
pub struct IterRecord {
    pub k: usize,
    /// `||x^k - y^k||`.
    pub res_xy: f64,
    /// `||u^k - x^k||`.
    pub res_ux: f64,
    /// `||x^{k+1} - x^k||`.
    pub step_norm: f64,
    /// `||x^k - x_g||`.
    pub dist_start: f64,
    /// `sigma_k ||w^k||` when the subgradient step ran.
    pub sigma_w: Option<f64>,
    pub eta_k: Option<f64>,
    pub m_k: Option<u32>,
    pub measurements: Vec<Measurement>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Predictor, averaged point, and iterate change all fell below
    /// `tol_stop`: the iterate solves both subproblems to tolerance.
    FixedPointAndEquilibrium,
    /// The iterate stopped moving long before the residuals met the success
    /// test; further iterations cannot make numerical progress.
    IterateChangeSmall,
    MaxIters,
}

impl StopReason {
    pub fn name(&self) -> &'static str {
        match self {
            StopReason::FixedPointAndEquilibrium => "fixed_point_and_equilibrium",
            StopReason::IterateChangeSmall => "iterate_change_small",
            StopReason::MaxIters => "max_iters",
        }
    }
}

/// Whole-run checks evaluated after the loop.
#[derive(Clone, Debug)]
pub struct RunCheck {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Result of a full run.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub solution: Vector,
    /// Number of outer iterations executed.
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub trace: Vec<IterRecord>,
    /// Full states, present when requested.
    pub states: Option<Vec<IterateState>>,
    pub run_checks: Vec<RunCheck>,
    /// Failed measurements across the run (per-iteration plus run-level).
    pub violations: usize,
}

fn measure_iteration(
    state: &IterateState,
    active: &[CheckKind],
    reference: Option<&Vector>,
    lipschitz: Option<&LipschitzConstants>,
    x_g: &Vector,
) -> Vec<Measurement> {
    let mut out = Vec::with_capacity(active.len());
    for kind in active {
        let value = match kind {
            CheckKind::Fejer => {
                let q = reference.expect("active check implies reference");
                let l = lipschitz.expect("active check implies constants");
                let z = state.z.as_ref().expect("extragradient always sets z");
                let rho = state.rho_k;
                let budget = state.x.dist_sq(q)
                    - (1.0 - 2.0 * rho * l.l1) * state.x.dist_sq(&state.y)
                    - (1.0 - 2.0 * rho * l.l2) * state.y.dist_sq(z);
                z.dist_sq(q) - budget
            }
            CheckKind::Descent => {
                let q = reference.expect("active check implies reference");
                match (state.v.as_ref(), state.sigma, state.w.as_ref(), state.gamma_k) {
                    (Some(v), Some(sigma), Some(w), Some(gamma)) => {
                        let decrement = gamma * (2.0 - gamma) * (sigma * w.norm()) * (sigma * w.norm());
                        v.dist_sq(q) - (state.x.dist_sq(q) - decrement)
                    }
                    // Short-circuit branch: v = x, nothing to measure.
                    _ => f64::NEG_INFINITY,
                }
            }
            CheckKind::TBound => {
                let q = reference.expect("active check implies reference");
                state.t.dist(q) - state.x.dist(q)
            }
            CheckKind::UBound => {
                let q = reference.expect("active check implies reference");
                state.u.dist(q) - state.x.dist(q)
            }
            CheckKind::ContainCk => {
                let q = reference.expect("active check implies reference");
                if state.c_k.is_whole_space() {
                    -state.c_k.offset()
                } else {
                    state.c_k.signed_distance(q)
                }
            }
            CheckKind::ContainQk => {
                let q = reference.expect("active check implies reference");
                if state.q_k.is_whole_space() {
                    -state.q_k.offset()
                } else {
                    state.q_k.signed_distance(q)
                }
            }
            CheckKind::Monotone => state.x.dist(x_g) - state.x_next.dist(x_g),
        };
        out.push(Measurement {
            kind: *kind,
            value,
            pass: value <= kind.slack(),
        });
    }
    out
}

/// Runs the selected algorithm from `x_g` until a stopping rule fires.
pub fn run(
    problem: &ProblemDef,
    x_g: &Vector,
    params: &SolverParams,
    algorithm: Algorithm,
    instr: &Instrumentation,
) -> Result<SolveResult, Error> {
    run_with_observer(problem, x_g, params, algorithm, instr, &mut |_| {})
}

/// Like [`run`], additionally handing every completed [`IterateState`] to
/// `observer` (after instrumentation, before the stopping test).
pub fn run_with_observer(
    problem: &ProblemDef,
    x_g: &Vector,
    params: &SolverParams,
    algorithm: Algorithm,
    instr: &Instrumentation,
    observer: &mut dyn FnMut(&IterateState),
) -> Result<SolveResult, Error> {
    params.validate(algorithm, problem.lipschitz.as_ref())?;
    let dim = problem.set.dim();
    x_g.check_dim(dim)?;
    if let Some(q) = &instr.reference {
        q.check_dim(dim)?;
    }
    if problem.set.violation(x_g) > tol::TOL_FEAS {
        return Err(Error::InvalidParams("starting point must belong to the feasible set"));
    }

    let active = instr.active_checks(algorithm, problem.lipschitz.is_some());
    // Once the iterate moves less than this, the hybrid projection has hit
    // its numerical floor and waiting for the residual test is pointless.
    let stagnation = (params.tol_stop * 1e-4).max(1e-13);

    let mut x = x_g.clone();
    let mut trace: Vec<IterRecord> = Vec::new();
    let mut states: Vec<IterateState> = Vec::new();
    let mut violations = 0usize;
    let mut stop_reason = StopReason::MaxIters;
    let mut iterations = 0usize;

    let mut max_x_norm = x.norm();
    let mut max_y_norm = 0.0_f64;
    let mut max_w0_norm = 0.0_f64;
    let mut last_sigma_w: Option<f64> = None;

    for k in 0..params.max_outer_iters {
        let state = match algorithm {
            Algorithm::Extragradient => alg1_iterate(problem, params, k, &x, x_g)?,
            Algorithm::Linesearch => alg2_iterate(problem, params, k, &x, x_g)?,
        };
        iterations = k + 1;

        let measurements = measure_iteration(
            &state,
            &active,
            instr.reference.as_ref(),
            problem.lipschitz.as_ref(),
            x_g,
        );
        violations += measurements.iter().filter(|m| !m.pass).count();

        let res_xy = state.x.dist(&state.y);
        let res_ux = state.u.dist(&state.x);
        let step_norm = state.x_next.dist(&state.x);
        let sigma_w = match (state.sigma, state.w.as_ref()) {
            (Some(sigma), Some(w)) => Some(sigma * w.norm()),
            _ => None,
        };
        if sigma_w.is_some() {
            last_sigma_w = sigma_w;
        }
        max_x_norm = max_x_norm.max(state.x_next.norm());
        max_y_norm = max_y_norm.max(state.y.norm());
        let w0 = problem.f.partial_subgradient(&state.x, &state.x)?;
        max_w0_norm = max_w0_norm.max(w0.norm());

        trace.push(IterRecord {
            k,
            res_xy,
            res_ux,
            step_norm,
            dist_start: state.x.dist(x_g),
            sigma_w,
            eta_k: state.eta_k,
            m_k: state.m_k,
            measurements,
        });
        observer(&state);

        if !state.x_next.is_finite() {
            return Err(Error::NonFiniteValue);
        }

        let next = state.x_next.clone();
        if instr.keep_states {
            states.push(state);
        }
        x = next;

        if res_xy.max(res_ux).max(step_norm) <= params.tol_stop {
            stop_reason = StopReason::FixedPointAndEquilibrium;
            break;
        }
        if step_norm <= stagnation {
            stop_reason = StopReason::IterateChangeSmall;
            break;
        }
    }

    let mut run_checks = Vec::new();
    if stop_reason != StopReason::MaxIters {
        if let Some(last) = trace.last() {
            let mut worst = last.res_xy.max(last.res_ux).max(last.step_norm);
            if let Some(sw) = last_sigma_w {
                worst = worst.max(sw);
            }
            run_checks.push(RunCheck {
                name: "vanishing_residuals",
                value: worst,
                bound: tol::RESIDUAL_VANISH,
                pass: worst <= tol::RESIDUAL_VANISH,
            });
        }
    }
    let rho_lo = params.rho.lower_bound();
    let y_bound = max_x_norm + (2.0 / rho_lo) * max_w0_norm;
    run_checks.push(RunCheck {
        name: "predictor_bounded",
        value: max_y_norm,
        bound: y_bound,
        pass: max_y_norm <= y_bound + 1e-9,
    });
    violations += run_checks.iter().filter(|c| !c.pass).count();

    Ok(SolveResult {
        solution: x,
        iterations,
        stop_reason,
        trace,
        states: if instr.keep_states { Some(states) } else { None },
        run_checks,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifunction::Operator;
    use alloc::vec;

    fn v(coords: &[f64]) -> Vector {
        Vector::new(coords.to_vec()).unwrap()
    }

    fn ball_identity_problem() -> ProblemDef {
        ProblemDef {
            set: ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap(),
            f: Bifunction::vi_induced(Operator::Identity),
            map: FixedPointMap::Identity,
            lipschitz: Some(LipschitzConstants::new(0.5, 0.5).unwrap()),
        }
    }

    #[test]
    fn schedules_evaluate_and_bound() {
        let alpha = Schedule::ApproachOne { offset: 2.0 };
        assert_eq!(alpha.value(0), 0.5);
        assert!((alpha.value(8) - 0.9).abs() < 1e-15);
        assert_eq!(alpha.lower_bound(), 0.5);
        assert_eq!(alpha.upper_bound(), 1.0);
    }

    #[test]
    fn zero_iteration_budget_returns_start() {
        let problem = ball_identity_problem();
        let params = SolverParams {
            max_outer_iters: 0,
            ..SolverParams::extragradient_defaults(problem.lipschitz.as_ref().unwrap())
        };
        let start = v(&[0.5, 0.0]);
        let result = run(
            &problem,
            &start,
            &params,
            Algorithm::Extragradient,
            &Instrumentation::none(),
        )
        .unwrap();
        assert_eq!(result.stop_reason, StopReason::MaxIters);
        assert_eq!(result.iterations, 0);
        assert_eq!(result.solution.as_slice(), start.as_slice());
    }

    #[test]
    fn start_at_solution_stops_immediately() {
        let problem = ball_identity_problem();
        let params = SolverParams::extragradient_defaults(problem.lipschitz.as_ref().unwrap());
        let start = v(&[0.0, 0.0]);
        let result = run(
            &problem,
            &start,
            &params,
            Algorithm::Extragradient,
            &Instrumentation::none(),
        )
        .unwrap();
        assert_eq!(result.stop_reason, StopReason::FixedPointAndEquilibrium);
        assert_eq!(result.iterations, 1);
        assert_eq!(result.trace.len(), 1);
        assert!(result.solution.norm() < 1e-12);
    }

    #[test]
    fn stationary_once_solved() {
        // If x already solves both subproblems, one iteration fixes it.
        let problem = ball_identity_problem();
        let params = SolverParams::extragradient_defaults(problem.lipschitz.as_ref().unwrap());
        let x = v(&[0.0, 0.0]);
        let state = alg1_iterate(&problem, &params, 3, &x, &v(&[0.5, 0.0])).unwrap();
        assert!(state.y.dist(&x) < 1e-12);
        assert!(state.u.dist(&x) < 1e-12);
        assert!(state.c_k.is_whole_space());
        assert!(state.x_next.dist(&x) < 1e-10);
    }

    #[test]
    fn first_iteration_anchored_cut_is_vacuous() {
        let problem = ball_identity_problem();
        let params = SolverParams::extragradient_defaults(problem.lipschitz.as_ref().unwrap());
        let start = v(&[0.5, 0.0]);
        let state = alg1_iterate(&problem, &params, 0, &start, &start).unwrap();
        assert!(state.q_k.is_whole_space());
        assert!(!state.c_k.is_whole_space());
    }

    #[test]
    fn both_algorithms_reach_the_ball_solution() {
        let problem = ball_identity_problem();
        let start = v(&[0.5, 0.0]);
        let instr = Instrumentation {
            reference: Some(v(&[0.0, 0.0])),
            ..Instrumentation::default()
        };
        let params1 = SolverParams::extragradient_defaults(problem.lipschitz.as_ref().unwrap());
        let r1 = run(&problem, &start, &params1, Algorithm::Extragradient, &instr).unwrap();
        assert!(r1.solution.norm() <= 1e-4, "{:?}", r1.solution);
        assert_eq!(r1.violations, 0);

        let params2 = SolverParams::default();
        let r2 = run(&problem, &start, &params2, Algorithm::Linesearch, &instr).unwrap();
        assert!(r2.solution.norm() <= 1e-4, "{:?}", r2.solution);
        assert_eq!(r2.violations, 0);
    }

    #[test]
    fn armijo_returns_smallest_exponent() {
        // On the ball instance with rho = 0.5 the first exponent already
        // satisfies the decrease test.
        let f = Bifunction::vi_induced(Operator::Identity);
        let x = v(&[1.0, 0.0]);
        let set = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let prox = ProxSubproblem::new(&f, &set, &x, &x, 0.5);
        let y = prox.solve().unwrap();
        let outcome = armijo_search(&f, &x, &y, 0.5, 0.5, 0.4, 60).unwrap();
        assert_eq!(outcome.m_k, 1);
        assert_eq!(outcome.eta_k, 0.5);
        let gap = f.evaluate(&outcome.z, &x).unwrap() - f.evaluate(&outcome.z, &y).unwrap();
        assert!(gap >= 0.4 / (2.0 * 0.5) * x.dist_sq(&y));
    }

    #[test]
    fn weaker_mu_never_needs_more_backtracking() {
        let f = Bifunction::vi_induced(Operator::Rotation { theta: 0.8 });
        let set = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let x = v(&[0.9, 0.1]);
        let prox = ProxSubproblem::new(&f, &set, &x, &x, 1.0);
        let y = prox.solve().unwrap();
        let strict = armijo_search(&f, &x, &y, 1.0, 0.5, 0.9, 60).unwrap();
        let loose = armijo_search(&f, &x, &y, 1.0, 0.5, 1e-9, 60).unwrap();
        assert!(loose.m_k <= strict.m_k);
    }

    #[test]
    fn exhausted_linesearch_is_reported() {
        // A segment pointed away from the prox solution never satisfies the
        // decrease test.
        let f = Bifunction::vi_induced(Operator::Identity);
        let x = v(&[1.0, 0.0]);
        let y = v(&[2.0, 0.0]);
        assert!(matches!(
            armijo_search(&f, &x, &y, 1.0, 0.5, 0.4, 40),
            Err(Error::LinesearchExhausted { m_max: 40 })
        ));
    }

    #[test]
    fn linesearch_short_circuit_keeps_iterate() {
        let problem = ball_identity_problem();
        let params = SolverParams::default();
        let x = v(&[0.0, 0.0]);
        let state = alg2_iterate(&problem, &params, 1, &x, &v(&[0.5, 0.0])).unwrap();
        assert!(state.z.is_none());
        assert_eq!(state.v.as_ref().unwrap().as_slice(), x.as_slice());
        assert!(state.sigma.is_none());
    }

    #[test]
    fn rho_above_lipschitz_bound_is_rejected() {
        let problem = ball_identity_problem();
        // Bound is min(1/(2*0.5)) = 1.0; try to run at rho = 1.0.
        let params = SolverParams {
            rho: Schedule::Constant(1.0),
            ..SolverParams::default()
        };
        let err = run(
            &problem,
            &v(&[0.5, 0.0]),
            &params,
            Algorithm::Extragradient,
            &Instrumentation::none(),
        );
        assert!(matches!(err, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let problem = ball_identity_problem();
        let params = SolverParams::default();
        let err = run(
            &problem,
            &v(&[5.0, 0.0]),
            &params,
            Algorithm::Linesearch,
            &Instrumentation::none(),
        );
        assert!(matches!(err, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn observer_sees_every_iteration() {
        let problem = ball_identity_problem();
        let params = SolverParams {
            max_outer_iters: 7,
            tol_stop: 0.0,
            ..SolverParams::default()
        };
        let mut seen = 0usize;
        let result = run_with_observer(
            &problem,
            &v(&[0.5, 0.0]),
            &params,
            Algorithm::Linesearch,
            &Instrumentation::none(),
            &mut |state| {
                assert_eq!(state.k, seen);
                seen += 1;
            },
        )
        .unwrap();
        assert_eq!(seen, result.iterations);
    }
}
