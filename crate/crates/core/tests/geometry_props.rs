//! Property tests for the projection operators plus the brute-force oracle
//! checks for intersections.

mod common;

use common::grid_projection_oracle;
use equifix::geometry::{
    check_projection_optimality, project_intersection_dykstra, ConvexSet, Halfspace,
};
use equifix::sampling::Sampler;
use equifix::Vector;
use proptest::prelude::*;

fn v(coords: &[f64]) -> Vector {
    Vector::new(coords.to_vec()).unwrap()
}

#[derive(Clone, Debug)]
enum SetSpec {
    Box(Vec<f64>, Vec<f64>),
    Ball(Vec<f64>, f64),
    Halfspace(Vec<f64>, f64),
    Simplex(f64),
}

fn build(dim: usize, spec: &SetSpec) -> Option<ConvexSet> {
    match spec {
        SetSpec::Box(a, b) => {
            let lower: Vec<f64> = a[..dim]
                .iter()
                .zip(&b[..dim])
                .map(|(x, y)| x.min(*y))
                .collect();
            let upper: Vec<f64> = a[..dim]
                .iter()
                .zip(&b[..dim])
                .map(|(x, y)| x.max(*y))
                .collect();
            Some(ConvexSet::box_set(Vector::new(lower).ok()?, Vector::new(upper).ok()?).ok()?)
        }
        SetSpec::Ball(c, r) => {
            Some(ConvexSet::ball(Vector::new(c[..dim].to_vec()).ok()?, *r).ok()?)
        }
        SetSpec::Halfspace(normal, offset) => {
            let n = Vector::new(normal[..dim].to_vec()).ok()?;
            if n.norm() < 1e-6 {
                return None;
            }
            Some(ConvexSet::halfspace(Halfspace::new(n, *offset).ok()?))
        }
        SetSpec::Simplex(scale) => Some(ConvexSet::simplex(dim, *scale).ok()?),
    }
}

fn arb_spec() -> impl Strategy<Value = SetSpec> {
    let coords = proptest::collection::vec(-4.0f64..4.0, 5);
    prop_oneof![
        (coords.clone(), coords.clone()).prop_map(|(a, b)| SetSpec::Box(a, b)),
        (coords.clone(), 0.2f64..4.0).prop_map(|(c, r)| SetSpec::Ball(c, r)),
        (coords, -3.0f64..3.0).prop_map(|(n, b)| SetSpec::Halfspace(n, b)),
        (0.3f64..3.0).prop_map(SetSpec::Simplex),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn projection_is_idempotent_and_feasible(
        dim in 1usize..5,
        spec in arb_spec(),
        raw in proptest::collection::vec(-10.0f64..10.0, 5),
    ) {
        prop_assume!(build(dim, &spec).is_some());
        let set = build(dim, &spec).unwrap();
        let x = v(&raw[..dim]);
        let p = set.project(&x).unwrap();
        prop_assert!(set.violation(&p) <= 1e-9, "violation {}", set.violation(&p));
        let pp = set.project(&p).unwrap();
        prop_assert!(pp.dist(&p) <= 1e-12, "not idempotent: {}", pp.dist(&p));
    }

    #[test]
    fn projection_is_firmly_nonexpansive(
        dim in 1usize..5,
        spec in arb_spec(),
        raw_x in proptest::collection::vec(-10.0f64..10.0, 5),
        raw_y in proptest::collection::vec(-10.0f64..10.0, 5),
    ) {
        prop_assume!(build(dim, &spec).is_some());
        let set = build(dim, &spec).unwrap();
        let x = v(&raw_x[..dim]);
        let y = v(&raw_y[..dim]);
        let px = set.project(&x).unwrap();
        let py = set.project(&y).unwrap();
        prop_assert!(px.dist(&py) <= x.dist(&y) + 1e-10);
        // ||Px - Py||^2 <= ||x - y||^2 - ||(Px - x) - (Py - y)||^2
        let drift = &(&px - &x) - &(&py - &y);
        prop_assert!(
            px.dist_sq(&py) <= x.dist_sq(&y) - drift.norm_sq() + 1e-8,
            "firm nonexpansiveness violated"
        );
    }

    #[test]
    fn projection_satisfies_probe_inequality(
        dim in 1usize..5,
        spec in arb_spec(),
        raw in proptest::collection::vec(-10.0f64..10.0, 5),
        seed in 0u64..1_000,
    ) {
        prop_assume!(build(dim, &spec).is_some());
        let set = build(dim, &spec).unwrap();
        let x = v(&raw[..dim]);
        let p = set.project(&x).unwrap();
        let mut sampler = Sampler::new(seed);
        let probes = sampler.pool(&set, 20, true);
        prop_assert!(check_projection_optimality(&set, &x, &p, &probes));
    }
}

#[test]
fn intersection_example_matches_grid_oracle() {
    let set = ConvexSet::intersection(
        vec![
            ConvexSet::box_set(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap(),
            ConvexSet::halfspace(Halfspace::new(v(&[1.0, 1.0]), 1.0).unwrap()),
        ],
        v(&[0.25, 0.25]),
    )
    .unwrap();
    let x = v(&[1.0, 1.0]);
    let p = set.project(&x).unwrap();
    let oracle = grid_projection_oracle(&set, &x, -0.5, 1.5, 81);
    assert!(p.dist(&oracle) < 1e-6, "{p:?} vs {oracle:?}");
    assert!(p.dist(&v(&[0.5, 0.5])) < 1e-8);
}

#[test]
fn ball_halfspace_example_matches_grid_oracle() {
    let members = [
        ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap(),
        ConvexSet::halfspace(Halfspace::new(v(&[0.0, 1.0]), 0.0).unwrap()),
    ];
    let x = v(&[0.0, 2.0]);
    let p = project_intersection_dykstra(&members, &x).unwrap();
    let witness = v(&[0.0, -0.5]);
    let set = ConvexSet::intersection(members.to_vec(), witness).unwrap();
    let oracle = grid_projection_oracle(&set, &x, -1.5, 1.5, 81);
    assert!(p.dist(&oracle) < 1e-6, "{p:?} vs {oracle:?}");
    assert!(p.dist(&v(&[0.0, 0.0])) < 1e-8);
}

#[test]
fn dykstra_matches_closed_form_on_box_pairs() {
    let mut sampler = Sampler::new(99);
    for _ in 0..50 {
        let a = sampler.ambient_point(3, 2.0);
        let b = sampler.ambient_point(3, 2.0);
        // Overlapping boxes around the two draws.
        let lower1: Vec<f64> = a.iter().map(|x| x - 1.5).collect();
        let upper1: Vec<f64> = a.iter().map(|x| x + 1.5).collect();
        let lower2: Vec<f64> = b.iter().map(|x| x - 1.5).collect();
        let upper2: Vec<f64> = b.iter().map(|x| x + 1.5).collect();
        let joint_lower: Vec<f64> = lower1
            .iter()
            .zip(&lower2)
            .map(|(x, y)| x.max(*y))
            .collect();
        let joint_upper: Vec<f64> = upper1
            .iter()
            .zip(&upper2)
            .map(|(x, y)| x.min(*y))
            .collect();
        if joint_lower.iter().zip(&joint_upper).any(|(l, u)| l > u) {
            continue;
        }
        let box1 = ConvexSet::box_set(v(&lower1), v(&upper1)).unwrap();
        let box2 = ConvexSet::box_set(v(&lower2), v(&upper2)).unwrap();
        let joint = ConvexSet::box_set(v(&joint_lower), v(&joint_upper)).unwrap();
        let x = sampler.ambient_point(3, 6.0);
        let dykstra_p = project_intersection_dykstra(&[box1, box2], &x).unwrap();
        let exact_p = joint.project(&x).unwrap();
        assert!(
            dykstra_p.dist(&exact_p) <= 1e-8,
            "{dykstra_p:?} vs {exact_p:?}"
        );
    }
}
