//! Loss families and their Lipschitzian extensions against independent
//! references: central differences, a brute-force grid infimal
//! convolution, and sampled bounds.

mod support;

use dpsco::losses::{effective_lipschitz, lip_ext_gradient, lip_ext_value, loss_gradient, loss_value, ExtensionQuery};
use dpsco::{project_onto_ball, Ball, LossConstants, LossFamily, Point, RngStream, SamplePayload};
use proptest::prelude::*;
use support::extension_oracle::{compare_family, random_query, FAMILY_NAMES};

fn p(v: &[f64]) -> Point {
    Point::new(v.to_vec())
}

fn anchor(v: &[f64]) -> SamplePayload {
    SamplePayload::Anchor(p(v))
}

fn central_difference(f: &dyn Fn(&Point) -> f64, x: &Point, h: f64) -> Vec<f64> {
    (0..x.dim())
        .map(|i| {
            let mut up = x.clone().into_vec();
            let mut down = up.clone();
            up[i] += h;
            down[i] -= h;
            (f(&Point::new(up)) - f(&Point::new(down))) / (2.0 * h)
        })
        .collect()
}

#[test]
fn value_and_gradient_examples() {
    let quad = LossFamily::QuadraticAnchor { curvature: 1.0 };
    assert_eq!(loss_value(&quad, &p(&[0.0, 0.0]), &anchor(&[1.0, 0.0])).unwrap(), 0.5);
    assert_eq!(loss_gradient(&quad, &p(&[2.0, 0.0]), &anchor(&[0.0, 0.0])).unwrap(), p(&[2.0, 0.0]));
    let indicator = LossFamily::IndicatorQuadratic { curvature: 3.0 };
    assert_eq!(loss_value(&indicator, &p(&[5.0, -2.0]), &anchor(&[0.0, 0.0])).unwrap(), 0.0);
    let hinge = LossFamily::hinge(0.5);
    let sample = SamplePayload::Labeled { features: p(&[1.0, 0.0]), label: 1.0 };
    assert_eq!(loss_value(&hinge, &p(&[0.7, 3.0]), &sample).unwrap(), 0.0);
    assert!(loss_value(&quad, &p(&[0.0]), &anchor(&[1.0, 0.0])).is_err());
}

#[test]
fn extension_examples_in_one_dimension() {
    let quad = LossFamily::QuadraticAnchor { curvature: 1.0 };
    let q = |x: f64| ExtensionQuery { x: p(&[x]), payload: anchor(&[0.0]), clip: 1.0 };
    // inf_y ½y² + |3 − y| is attained at y = 1: ½ + 2
    assert_eq!(lip_ext_value(&quad, &q(3.0)).unwrap(), 2.5);
    assert_eq!(lip_ext_gradient(&quad, &q(3.0)).unwrap(), p(&[1.0]));
    assert_eq!(lip_ext_gradient(&quad, &q(0.5)).unwrap(), p(&[0.5]));
    assert_eq!(lip_ext_value(&quad, &q(0.0)).unwrap(), 0.0);
    let bad = ExtensionQuery { clip: 0.0, ..q(1.0) };
    assert!(lip_ext_value(&quad, &bad).is_err());
}

#[test]
fn quadratic_extension_gradient_is_norm_clipping() {
    let mut rng = RngStream::new(11, 0);
    for _ in 0..500 {
        let (family, payload) = random_query("quadratic_anchor", 3, &mut rng);
        let x = Point::new((0..3).map(|_| 4.0 * rng.uniform() - 2.0).collect());
        let clip = 0.1 + 2.0 * rng.uniform();
        let g = family.gradient(&x, &payload);
        let clipped = if g.norm() > clip { g.scale(clip / g.norm()) } else { g };
        let ext = family.ext_gradient(&x, &payload, clip);
        assert!(ext.distance(&clipped) <= 1e-12 * clip.max(1.0), "{ext:?} vs {clipped:?}");
    }
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = RngStream::new(12, 0);
    for name in FAMILY_NAMES {
        for _ in 0..100 {
            let (family, payload) = random_query(name, 2, &mut rng);
            let x = Point::new((0..2).map(|_| 4.0 * rng.uniform() - 2.0).collect());
            let fd = central_difference(&|y| family.value(y, &payload), &x, 1e-6);
            let g = family.gradient(&x, &payload);
            let scale = g.norm().max(1e-2);
            let err = g.coords().iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err / scale <= 1e-5, "{name}: relative error {:e}", err / scale);
        }
    }
}

#[test]
fn extension_agrees_with_loss_where_gradient_is_small() {
    let mut rng = RngStream::new(13, 0);
    for name in FAMILY_NAMES {
        let mut checked = 0;
        let mut worst: f64 = 0.0;
        while checked < 1000 {
            let (family, payload) = random_query(name, 2, &mut rng);
            let x = Point::new((0..2).map(|_| 4.0 * rng.uniform() - 2.0).collect());
            let clip = 0.3 + 3.0 * rng.uniform();
            if family.gradient(&x, &payload).norm() > clip {
                continue;
            }
            worst = worst.max((family.ext_value(&x, &payload, clip) - family.value(&x, &payload)).abs());
            checked += 1;
        }
        assert!(worst <= 1e-9, "{name}: {worst:e}");
    }
}

#[test]
fn closed_forms_match_grid_oracle() {
    let mut rng = RngStream::new(14, 0);
    for name in FAMILY_NAMES {
        let a = compare_family(name, 60, &mut rng);
        assert!(a.max_value_err <= 1e-3, "{name}: {a:?}");
        assert!(a.max_gradient_err <= 1e-3, "{name}: {a:?}");
        assert!(a.max_argmin_err <= 1e-3, "{name}: {a:?}");
        assert!(a.gradient_checked > 40, "{name}: {a:?}");
    }
}

#[test]
fn interpolating_gradient_norms_within_effective_lipschitz() {
    let mut rng = RngStream::new(15, 0);
    let constants = LossConstants::new(10.0, 2.0, 2.0).unwrap();
    let ball = Ball::new(p(&[0.2, -0.1]), 0.25).unwrap();
    let bound = effective_lipschitz(&constants, &ball, true);
    assert_eq!(bound, 1.0);
    assert_eq!(effective_lipschitz(&constants, &ball, false), 10.0);
    let family = LossFamily::QuadraticAnchor { curvature: 2.0 };
    let xstar = p(&[0.3, -0.05]);
    for _ in 0..1000 {
        let raw = Point::new((0..2).map(|_| rng.uniform() - 0.5).collect());
        let x = project_onto_ball(&ball.center.add(&raw), &ball).unwrap();
        assert!(family.gradient(&x, &SamplePayload::Anchor(xstar.clone())).norm() <= bound + 1e-12);
    }
}

fn family_strategy() -> impl Strategy<Value = (usize, u64)> {
    (0..FAMILY_NAMES.len(), any::<u64>())
}

fn coords(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, d)
}

proptest! {
    #[test]
    fn projection_lands_in_ball_and_is_idempotent(x in coords(3), c in coords(3), r in 0.1..2.0f64) {
        let ball = Ball::new(Point::new(c), r).unwrap();
        let x = Point::new(x);
        let y = project_onto_ball(&x, &ball).unwrap();
        prop_assert!(ball.contains(&y, 1e-12));
        let z = project_onto_ball(&y, &ball).unwrap();
        prop_assert!(y.distance(&z) <= 1e-12);
        if ball.contains(&x, 0.0) {
            prop_assert_eq!(&x, &y);
        }
    }

    #[test]
    fn projection_is_nonexpansive(a in coords(2), b in coords(2), r in 0.1..2.0f64) {
        let ball = Ball::new(Point::zeros(2), r).unwrap();
        let (a, b) = (Point::new(a), Point::new(b));
        let pa = project_onto_ball(&a, &ball).unwrap();
        let pb = project_onto_ball(&b, &ball).unwrap();
        prop_assert!(pa.distance(&pb) <= a.distance(&b) + 1e-12);
    }

    #[test]
    fn extension_gradient_norm_bounded_by_clip((k, seed) in family_strategy(), x in coords(2), clip in 0.05..4.0f64) {
        let (family, payload) = random_query(FAMILY_NAMES[k], 2, &mut RngStream::new(seed, 1));
        let g = family.ext_gradient(&Point::new(x), &payload, clip);
        prop_assert!(g.norm() <= clip * (1.0 + 1e-12));
    }

    #[test]
    fn extension_is_convex_along_segments(
        (k, seed) in family_strategy(), a in coords(2), b in coords(2), t in 0.0..1.0f64, clip in 0.1..3.0f64,
    ) {
        let (family, payload) = random_query(FAMILY_NAMES[k], 2, &mut RngStream::new(seed, 2));
        let (a, b) = (Point::new(a), Point::new(b));
        let mid = a.scale(t).add(&b.scale(1.0 - t));
        let lhs = family.ext_value(&mid, &payload, clip);
        let rhs = t * family.ext_value(&a, &payload, clip) + (1.0 - t) * family.ext_value(&b, &payload, clip);
        prop_assert!(lhs <= rhs + 1e-9, "{} > {}", lhs, rhs);
    }

    #[test]
    fn extension_gradient_matches_differences((k, seed) in family_strategy(), x in coords(2), clip in 0.1..3.0f64) {
        let (family, payload) = random_query(FAMILY_NAMES[k], 2, &mut RngStream::new(seed, 3));
        let x = Point::new(x);
        prop_assume!((family.gradient(&x, &payload).norm() - clip).abs() > 1e-3);
        let fd = central_difference(&|y| family.ext_value(y, &payload, clip), &x, 1e-6);
        let g = family.ext_gradient(&x, &payload, clip);
        for (a, b) in g.coords().iter().zip(&fd) {
            prop_assert!((a - b).abs() <= 1e-5, "{} vs {}", a, b);
        }
    }
}
