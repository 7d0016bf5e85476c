//! Deterministic, seeded sampling from convex sets.
//!
//! The certification operations in this crate are sampling-based, so the
//! sampler is part of the public surface: callers that need to reproduce a
//! certificate rebuild the identical point stream from the same seed.
//!
//! Uniformity is exact for boxes, balls, and simplices. Halfspaces and
//! intersections are sampled by projecting a Gaussian cloud anchored at a
//! representative interior point, which is good enough for adversarial
//! coverage even though it is not uniform.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::ConvexSet;
use crate::linalg::Vector;

/// A seeded point generator over convex sets.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn direction(&mut self, dim: usize) -> Vector {
        loop {
            let g = Vector::from_raw((0..dim).map(|_| self.normal()).collect());
            let n = g.norm();
            if n > 1e-12 {
                return g.scale(1.0 / n);
            }
        }
    }

    /// One point of `set`; uniform where a closed form exists.
    pub fn point_in(&mut self, set: &ConvexSet) -> Vector {
        match set {
            ConvexSet::Box { lower, upper } => Vector::from_raw(
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(&l, &u)| l + self.unit() * (u - l))
                    .collect(),
            ),
            ConvexSet::Ball { center, radius } => {
                let dim = center.dim();
                let dir = self.direction(dim);
                let u = 1.0 - self.unit();
                let r = radius * libm::exp(libm::log(u) / dim as f64);
                center.add_scaled(r, &dir)
            }
            ConvexSet::Simplex { dim, scale } => {
                // Exponential spacings give the uniform (flat Dirichlet) law.
                let e: Vec<f64> = (0..*dim).map(|_| -libm::log(1.0 - self.unit())).collect();
                let sum: f64 = e.iter().sum();
                Vector::from_raw(e.into_iter().map(|v| scale * v / sum).collect())
            }
            _ => {
                let anchor = set.interior_point();
                let dim = set.dim();
                let cloud =
                    anchor.add_scaled(2.0, &Vector::from_raw((0..dim).map(|_| self.normal()).collect()));
                set.project(&cloud).unwrap_or(anchor)
            }
        }
    }

    /// A boundary-heavy point: box vertices, sphere points, simplex vertices,
    /// halfspace boundary points. Falls back to [`Self::point_in`] for
    /// intersections after projecting a member's extreme point.
    pub fn extreme_point_in(&mut self, set: &ConvexSet) -> Vector {
        match set {
            ConvexSet::Box { lower, upper } => Vector::from_raw(
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(&l, &u)| if self.unit() < 0.5 { l } else { u })
                    .collect(),
            ),
            ConvexSet::Ball { center, radius } => {
                let dir = self.direction(center.dim());
                center.add_scaled(*radius, &dir)
            }
            ConvexSet::Simplex { dim, scale } => {
                let i = self.rng.gen_range(0..*dim);
                Vector::basis(*dim, i, *scale)
            }
            ConvexSet::Halfspace(h) => {
                if h.is_whole_space() {
                    self.point_in(set)
                } else {
                    let x = self.point_in(set);
                    // Slide onto the boundary along the normal.
                    x.add_scaled(-h.signed_distance(&x), h.normal())
                }
            }
            ConvexSet::Intersection { members, .. } => {
                let i = self.rng.gen_range(0..members.len());
                let candidate = self.extreme_point_in(&members[i]);
                set.project(&candidate)
                    .unwrap_or_else(|_| set.interior_point())
            }
        }
    }

    /// `count` points with roughly one quarter drawn from the boundary or
    /// corners when `adversarial` is set.
    pub fn pool(&mut self, set: &ConvexSet, count: usize, adversarial: bool) -> Vec<Vector> {
        (0..count)
            .map(|i| {
                if adversarial && i % 4 == 0 {
                    self.extreme_point_in(set)
                } else {
                    self.point_in(set)
                }
            })
            .collect()
    }

    pub fn pair_in(&mut self, set: &ConvexSet, adversarial: bool) -> (Vector, Vector) {
        let first = if adversarial && self.unit() < 0.25 {
            self.extreme_point_in(set)
        } else {
            self.point_in(set)
        };
        let second = if adversarial && self.unit() < 0.25 {
            self.extreme_point_in(set)
        } else {
            self.point_in(set)
        };
        (first, second)
    }

    pub fn triple_in(&mut self, set: &ConvexSet) -> (Vector, Vector, Vector) {
        (self.point_in(set), self.point_in(set), self.point_in(set))
    }

    /// A point of the ambient cube `[-scale, scale]^dim`, not necessarily in
    /// any set. Useful for projection arguments.
    pub fn ambient_point(&mut self, dim: usize, scale: f64) -> Vector {
        Vector::from_raw(
            (0..dim)
                .map(|_| scale * (2.0 * self.unit() - 1.0))
                .collect(),
        )
    }
}
