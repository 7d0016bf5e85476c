//! Shared oracles for the integration tests. Everything here recomputes
//! expected values by brute force, independent of the library's own
//! projection and solver paths.

#![allow(dead_code)]

use equifix::geometry::ConvexSet;
use equifix::Vector;

/// Brute-force projection: dense grid search over `[lo, hi]^n` keeping only
/// points that satisfy the membership test, followed by shrinking-step
/// pattern refinement. Only meant for n <= 3.
pub fn grid_projection_oracle(
    set: &ConvexSet,
    x: &Vector,
    lo: f64,
    hi: f64,
    grid: usize,
) -> Vector {
    let n = x.dim();
    assert!(n <= 3, "oracle is exponential in the dimension");
    let feasible = |y: &Vector| set.violation(y) <= 1e-9;

    let mut best: Option<(f64, Vector)> = None;
    let mut idx = vec![0usize; n];
    loop {
        let candidate = Vector::new(
            idx.iter()
                .map(|&i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
                .collect(),
        )
        .unwrap();
        if feasible(&candidate) {
            let d = candidate.dist_sq(x);
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, candidate));
            }
        }
        // Odometer increment over the grid indices.
        let mut carry = true;
        for slot in idx.iter_mut() {
            if carry {
                *slot += 1;
                if *slot == grid {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    let (_, mut current) = best.expect("grid contained no feasible point");

    // Axis-aligned pattern search with bisected steps.
    let mut step = (hi - lo) / (grid - 1) as f64;
    while step > 1e-12 {
        let mut improved = false;
        for i in 0..n {
            for sign in [-1.0, 1.0] {
                let probe = current.add_scaled(sign * step, &Vector::basis(n, i, 1.0));
                if feasible(&probe) && probe.dist_sq(x) < current.dist_sq(x) {
                    current = probe;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    current
}

/// Central finite differences of `y -> f(z, y)` at `x`.
pub fn central_difference_gradient(
    f: &equifix::bifunction::Bifunction,
    z: &Vector,
    x: &Vector,
    h: f64,
) -> Vector {
    let n = x.dim();
    Vector::new(
        (0..n)
            .map(|i| {
                let e = Vector::basis(n, i, 1.0);
                let plus = f.evaluate(z, &x.add_scaled(h, &e)).unwrap();
                let minus = f.evaluate(z, &x.add_scaled(-h, &e)).unwrap();
                (plus - minus) / (2.0 * h)
            })
            .collect(),
    )
    .unwrap()
}
