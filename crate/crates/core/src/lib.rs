//! Solvers for finding a common point of the solution set of a
//! pseudomonotone equilibrium problem and the fixed-point set of a
//! quasi-nonexpansive mapping over a closed convex subset of `R^n`.
//!
//! The problem data is a bifunction `f : C x C -> R` with `f(x, x) = 0`, a
//! projectable constraint set `C`, and a mapping `T : C -> C`. A solution is
//! any `x*` in `C` with `f(x*, y) >= 0` for all `y` in `C` and `T x* = x*`.
//! Two iterations are provided, both of the hybrid-projection kind (each
//! next iterate is the projection of the starting point onto the
//! intersection of two constructed halfspaces with `C`), which is what makes
//! the full iterate sequence converge to the solution nearest the start:
//!
//! * [`solver::Algorithm::Extragradient`] solves two strongly convex prox
//!   subproblems per iteration and requires Lipschitz-type constants of `f`
//!   to bound its stepsize;
//! * [`solver::Algorithm::Linesearch`] replaces the second prox solve with a
//!   backtracking search and a projected subgradient step, trading the
//!   Lipschitz data for a few extra bifunction evaluations.
//!
//! The crate is `no_std` (with `alloc`); all I/O, file formats, and the
//! command line live in the companion `equifix-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bifunction;
pub mod error;
pub mod geometry;
pub mod inner;
pub mod linalg;
pub mod mapping;
pub mod sampling;
pub mod solver;
pub mod tol;

pub use error::Error;
pub use linalg::{Matrix, Vector};
