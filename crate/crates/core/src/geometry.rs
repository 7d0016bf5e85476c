//! Closed convex sets and metric projection operators.
//!
//! Every variant except [`ConvexSet::Intersection`] has an exact closed-form
//! projection. Intersections are projected with Dykstra's cyclic scheme,
//! which (unlike plain alternating projection) converges to the true metric
//! projection.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::Vector;
use crate::tol;

/// The set `{x : <a, x> <= b}`, stored with a unit normal.
///
/// A zero normal with `b >= 0` denotes the whole space; this degenerate form
/// shows up naturally when the two cutting halfspaces of the solvers collapse
/// (for example at iteration zero, where the anchored cut is vacuous).
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Vector,
    offset: f64,
}

impl Halfspace {
    /// Normalizes `normal` to unit length, scaling `offset` to match.
    pub fn new(normal: Vector, offset: f64) -> Result<Self, Error> {
        let n = normal.norm();
        if n == 0.0 {
            if offset < 0.0 {
                return Err(Error::InvalidHalfspace);
            }
            return Ok(Halfspace { normal, offset });
        }
        Ok(Halfspace {
            normal: normal.scale(1.0 / n),
            offset: offset / n,
        })
    }

    /// The trivial halfspace containing everything.
    pub fn whole_space(dim: usize) -> Self {
        Halfspace {
            normal: Vector::zeros(dim),
            offset: 0.0,
        }
    }

    /// The points at least as close to `u` as to `x`:
    /// `{v : ||v - u|| <= ||v - x||}`. Degenerates to the whole space when
    /// `u == x`.
    pub fn bisector_toward(u: &Vector, x: &Vector) -> Self {
        let diff = x - u;
        let n = diff.norm();
        if n == 0.0 {
            return Halfspace::whole_space(x.dim());
        }
        let normal = diff.scale(1.0 / n);
        // The boundary passes through the midpoint; computing the offset
        // there avoids the cancellation in ||x||^2 - ||u||^2.
        let mid = Vector::combine(0.5, u, 0.5, x);
        let offset = normal.dot(&mid);
        Halfspace { normal, offset }
    }

    /// The cut `{v : <v - anchor, toward - anchor> <= 0}`. Degenerates to the
    /// whole space when `toward == anchor`.
    pub fn anchored_cut(anchor: &Vector, toward: &Vector) -> Self {
        let diff = toward - anchor;
        let n = diff.norm();
        if n == 0.0 {
            return Halfspace::whole_space(anchor.dim());
        }
        let normal = diff.scale(1.0 / n);
        let offset = normal.dot(anchor);
        Halfspace { normal, offset }
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn is_whole_space(&self) -> bool {
        self.normal.norm_sq() == 0.0
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `<a, x> - b`; the signed distance to the boundary since the normal is
    /// unit length. Nonpositive inside.
    pub fn signed_distance(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.is_whole_space() || self.signed_distance(x) <= tol
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let d = self.signed_distance(x);
        if self.is_whole_space() || d <= 0.0 {
            x.clone()
        } else {
            x.add_scaled(-d, &self.normal)
        }
    }
}

/// A projectable closed convex subset of `R^n`.
#[derive(Clone, Debug)]
pub enum ConvexSet {
    /// `{x : lower <= x <= upper}` componentwise.
    Box { lower: Vector, upper: Vector },
    /// `{x : ||x - center|| <= radius}`.
    Ball { center: Vector, radius: f64 },
    Halfspace(Halfspace),
    /// `{x : x >= 0, sum x = scale}`.
    Simplex { dim: usize, scale: f64 },
    /// A finite intersection, nonempty by witness.
    Intersection {
        members: Vec<ConvexSet>,
        witness: Vector,
    },
}

impl ConvexSet {
    pub fn box_set(lower: Vector, upper: Vector) -> Result<Self, Error> {
        lower.check_dim(upper.dim())?;
        if lower
            .iter()
            .zip(upper.iter())
            .any(|(l, u)| l > u)
        {
            return Err(Error::InvalidSet("box requires lower <= upper"));
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self, Error> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidSet("ball radius must be positive"));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn halfspace(h: Halfspace) -> Self {
        ConvexSet::Halfspace(h)
    }

    pub fn simplex(dim: usize, scale: f64) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::InvalidSet("simplex dimension must be >= 1"));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidSet("simplex scale must be positive"));
        }
        Ok(ConvexSet::Simplex { dim, scale })
    }

    /// An intersection certified nonempty by `witness`, which must belong to
    /// every member.
    pub fn intersection(members: Vec<ConvexSet>, witness: Vector) -> Result<Self, Error> {
        if members.is_empty() {
            return Err(Error::InvalidSet("intersection needs at least one member"));
        }
        let dim = members[0].dim();
        for m in &members {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
            }
        }
        witness.check_dim(dim)?;
        for m in &members {
            if m.violation(&witness) > tol::TOL_FEAS {
                return Err(Error::InvalidSet("witness is not inside every member"));
            }
        }
        Ok(ConvexSet::Intersection { members, witness })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Box { lower, .. } => lower.dim(),
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::Halfspace(h) => h.dim(),
            ConvexSet::Simplex { dim, .. } => *dim,
            ConvexSet::Intersection { members, .. } => members[0].dim(),
        }
    }

    /// How far `x` is from satisfying the membership constraints; zero inside.
    pub fn violation(&self, x: &Vector) -> f64 {
        match self {
            ConvexSet::Box { lower, upper } => {
                let mut worst = 0.0_f64;
                for ((&v, &l), &u) in x.iter().zip(lower.iter()).zip(upper.iter()) {
                    worst = worst.max(l - v).max(v - u);
                }
                worst
            }
            ConvexSet::Ball { center, radius } => (x.dist(center) - radius).max(0.0),
            ConvexSet::Halfspace(h) => {
                if h.is_whole_space() {
                    0.0
                } else {
                    h.signed_distance(x).max(0.0)
                }
            }
            ConvexSet::Simplex { scale, .. } => {
                let sum: f64 = x.iter().sum();
                let neg = x.iter().fold(0.0_f64, |acc, &v| acc.max(-v));
                neg.max((sum - scale).abs())
            }
            ConvexSet::Intersection { members, .. } => members
                .iter()
                .fold(0.0_f64, |acc, m| acc.max(m.violation(x))),
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.violation(x) <= tol
    }

    /// A representative interior-ish point, used as a sampling anchor and as
    /// the default starting iterate.
    pub fn interior_point(&self) -> Vector {
        match self {
            ConvexSet::Box { lower, upper } => Vector::combine(0.5, lower, 0.5, upper),
            ConvexSet::Ball { center, .. } => center.clone(),
            ConvexSet::Halfspace(h) => {
                if h.is_whole_space() {
                    Vector::zeros(h.dim())
                } else {
                    h.normal().scale(h.offset() - 1.0)
                }
            }
            ConvexSet::Simplex { dim, scale } => {
                Vector::from_raw(vec![scale / *dim as f64; *dim])
            }
            ConvexSet::Intersection { witness, .. } => witness.clone(),
        }
    }

    /// The metric projection of `x` onto the set.
    ///
    /// Exact for all variants except intersections, which run Dykstra's
    /// scheme and report [`Error::EmptyIntersection`] when it cannot certify
    /// a feasible point within its sweep budget.
    pub fn project(&self, x: &Vector) -> Result<Vector, Error> {
        x.check_dim(self.dim())?;
        match self {
            ConvexSet::Intersection { members, .. } => {
                let mut flat = Vec::new();
                for m in members {
                    m.flatten_into(&mut flat);
                }
                dykstra(&flat, x, &DykstraOpts::default()).map_err(|e| match e {
                    Error::NoConvergence { residual, .. } => {
                        Error::EmptyIntersection { residual }
                    }
                    other => other,
                })
            }
            _ => Ok(self.project_basic(x)),
        }
    }

    /// Closed-form projection for the non-intersection variants.
    fn project_basic(&self, x: &Vector) -> Vector {
        match self {
            ConvexSet::Box { lower, upper } => Vector::from_raw(
                x.iter()
                    .zip(lower.iter())
                    .zip(upper.iter())
                    .map(|((&v, &l), &u)| v.clamp(l, u))
                    .collect(),
            ),
            ConvexSet::Ball { center, radius } => {
                let d = x.dist(center);
                if d <= *radius {
                    x.clone()
                } else {
                    let diff = x - center;
                    center.add_scaled(radius / d, &diff)
                }
            }
            ConvexSet::Halfspace(h) => h.project(x),
            ConvexSet::Simplex { scale, .. } => project_simplex(x, *scale),
            ConvexSet::Intersection { .. } => unreachable!("flattened before use"),
        }
    }

    /// Recursively expands intersections into their leaf members.
    fn flatten_into<'a>(&'a self, out: &mut Vec<&'a ConvexSet>) {
        match self {
            ConvexSet::Intersection { members, .. } => {
                for m in members {
                    m.flatten_into(out);
                }
            }
            other => out.push(other),
        }
    }
}

/// Sort-and-threshold projection onto `{x >= 0, sum x = scale}`.
fn project_simplex(x: &Vector, scale: f64) -> Vector {
    let n = x.dim();
    let mut sorted: Vec<f64> = x.as_slice().to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - scale) / (k + 1) as f64;
        if k + 1 == n || sorted[k + 1] <= candidate {
            tau = candidate;
            break;
        }
    }
    Vector::from_raw(x.iter().map(|&v| (v - tau).max(0.0)).collect())
}

/// Controls for [`dykstra`].
#[derive(Clone, Copy, Debug)]
pub struct DykstraOpts {
    /// Stop once the iterate moves less than this over a full sweep.
    pub tol_change: f64,
    /// Require every member violated by at most this much.
    pub tol_feas: f64,
    pub max_sweeps: usize,
}

impl Default for DykstraOpts {
    fn default() -> Self {
        DykstraOpts {
            tol_change: tol::TOL_PROJ,
            tol_feas: tol::TOL_FEAS,
            max_sweeps: tol::MAX_DYKSTRA_ITERS,
        }
    }
}

/// Exact projection onto the intersection of two halfspaces via active-set
/// enumeration (at most a 2x2 system). Degenerate members are skipped.
pub fn project_halfspace_pair(h1: &Halfspace, h2: &Halfspace, x: &Vector) -> Vector {
    if h1.is_whole_space() {
        return h2.project(x);
    }
    if h2.is_whole_space() {
        return h1.project(x);
    }
    let d1 = h1.signed_distance(x);
    let d2 = h2.signed_distance(x);
    if d1 <= 0.0 && d2 <= 0.0 {
        return x.clone();
    }
    // Single active constraint, when the face projection stays feasible.
    if d1 > 0.0 {
        let c1 = x.add_scaled(-d1, h1.normal());
        if h2.signed_distance(&c1) <= 0.0 {
            return c1;
        }
    }
    if d2 > 0.0 {
        let c2 = x.add_scaled(-d2, h2.normal());
        if h1.signed_distance(&c2) <= 0.0 {
            return c2;
        }
    }
    // Both constraints active: multipliers from the 2x2 Gram system.
    let g = h1.normal().dot(h2.normal());
    let det = 1.0 - g * g;
    if det > 1e-14 {
        let lam1 = (d1 - g * d2) / det;
        let lam2 = (d2 - g * d1) / det;
        if lam1 >= 0.0 && lam2 >= 0.0 {
            return x.add_scaled(-lam1, h1.normal()).add_scaled(-lam2, h2.normal());
        }
    }
    // Nearly parallel normals: a short alternating pass settles into the
    // slab (nonempty whenever the halfspaces share a point).
    let mut y = x.clone();
    for _ in 0..64 {
        y = h1.project(&y);
        y = h2.project(&y);
    }
    y
}

/// A single Dykstra member: either a leaf set or an exactly-projectable
/// pair of halfspaces.
enum Projector<'a> {
    Leaf(&'a ConvexSet),
    Pair(&'a Halfspace, &'a Halfspace),
}

impl Projector<'_> {
    fn project(&self, x: &Vector) -> Vector {
        match self {
            Projector::Leaf(set) => set.project_basic(x),
            Projector::Pair(h1, h2) => project_halfspace_pair(h1, h2, x),
        }
    }

    fn violation(&self, x: &Vector) -> f64 {
        match self {
            Projector::Leaf(set) => set.violation(x),
            Projector::Pair(h1, h2) => {
                let v1 = if h1.is_whole_space() { 0.0 } else { h1.signed_distance(x) };
                let v2 = if h2.is_whole_space() { 0.0 } else { h2.signed_distance(x) };
                v1.max(v2).max(0.0)
            }
        }
    }

    fn dim(&self) -> usize {
        match self {
            Projector::Leaf(set) => set.dim(),
            Projector::Pair(h1, _) => h1.dim(),
        }
    }
}

fn dykstra_over(members: &[Projector<'_>], x: &Vector, opts: &DykstraOpts) -> Result<Vector, Error> {
    let n = x.dim();
    for m in members {
        if m.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
        }
    }
    if members.len() == 1 {
        return Ok(members[0].project(x));
    }
    let mut y = x.clone();
    let mut corrections = vec![Vector::zeros(n); members.len()];
    let mut worst_change = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        let y_start = y.clone();
        for (i, m) in members.iter().enumerate() {
            let shifted = &y + &corrections[i];
            let projected = m.project(&shifted);
            corrections[i] = &shifted - &projected;
            y = projected;
        }
        worst_change = y.dist(&y_start);
        let worst_violation = members
            .iter()
            .fold(0.0_f64, |acc, m| acc.max(m.violation(&y)));
        if worst_change <= opts.tol_change && worst_violation <= opts.tol_feas {
            return Ok(y);
        }
        // Numerically stationary: the cycle cannot move anymore, so accept
        // as long as the point is feasible in the global sense. (An empty
        // intersection never stalls; its corrections grow without bound.)
        if worst_change <= 1e-15 * (1.0 + y.norm()) && worst_violation <= tol::TOL_FEAS {
            return Ok(y);
        }
        if !y.is_finite() {
            return Err(Error::NonFiniteValue);
        }
    }
    Err(Error::NoConvergence {
        sweeps: opts.max_sweeps,
        residual: worst_change,
    })
}

/// Dykstra's cyclic projection with increments, onto the intersection of
/// `members`. Each member must have an exact projection (no nested
/// intersections; flatten first).
pub fn dykstra(members: &[&ConvexSet], x: &Vector, opts: &DykstraOpts) -> Result<Vector, Error> {
    let projectors: Vec<Projector<'_>> = members.iter().map(|m| Projector::Leaf(m)).collect();
    dykstra_over(&projectors, x, opts)
}

/// Projects `x` onto `set /\ c_cut /\ q_cut`.
///
/// The two cuts are handled as one exactly-projectable member: late in a
/// solver run their normals become nearly parallel and cycling over them
/// separately makes Dykstra crawl, while the pairwise projection stays
/// closed-form.
pub fn project_set_with_cuts(
    set: &ConvexSet,
    c_cut: &Halfspace,
    q_cut: &Halfspace,
    x: &Vector,
    opts: &DykstraOpts,
) -> Result<Vector, Error> {
    let mut flat = Vec::new();
    set.flatten_into(&mut flat);
    let mut projectors = Vec::with_capacity(flat.len() + 1);
    if !(c_cut.is_whole_space() && q_cut.is_whole_space()) {
        projectors.push(Projector::Pair(c_cut, q_cut));
    }
    projectors.extend(flat.into_iter().map(Projector::Leaf));
    dykstra_over(&projectors, x, opts)
}

/// Projects `x` onto the intersection of `members` with the default Dykstra
/// controls.
pub fn project_intersection_dykstra(members: &[ConvexSet], x: &Vector) -> Result<Vector, Error> {
    let mut flat = Vec::new();
    for m in members {
        m.flatten_into(&mut flat);
    }
    dykstra(&flat, x, &DykstraOpts::default())
}

/// Certifies `p` as the projection of `x` onto `set` against a list of
/// probes: `p` must be feasible and every probe `y` (re-projected into the
/// set first) must satisfy `<x - p, y - p> <= TOL_VI`.
pub fn check_projection_optimality(
    set: &ConvexSet,
    x: &Vector,
    p: &Vector,
    probes: &[Vector],
) -> bool {
    if set.violation(p) > tol::TOL_FEAS {
        return false;
    }
    let gap = x - p;
    probes.iter().all(|probe| {
        let y = match set.project(probe) {
            Ok(y) => y,
            Err(_) => return false,
        };
        gap.dot(&(&y - p)) <= tol::TOL_VI
    })
}
