//! Brute-force infimal convolution `inf_y F(y) + L‖x − y‖` on a grid of
//! step `GRID_STEP`, used as an independent oracle for the closed forms.
//!
//! Any minimizer satisfies `L‖x − y‖ ≤ F(x)`, so the search box is the
//! cube of half-width `F(x)/L` around `x`.

#![allow(dead_code)]

use dpsco::{LossFamily, Point, RngStream, SamplePayload};

pub const GRID_STEP: f64 = 1e-4;

/// `(value, argmin)` of the infimal convolution in 1-D or 2-D.
pub fn infimal_convolution(f: &dyn Fn(&[f64]) -> f64, x: &[f64], clip: f64) -> (f64, Vec<f64>) {
    let radius = f(x) / clip + 2.0 * GRID_STEP;
    let objective = |y: &[f64]| {
        let dist = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        f(y) + clip * dist
    };
    match x.len() {
        1 => scan_1d(&objective, x[0], radius),
        2 => refine_2d(&objective, x, radius),
        d => panic!("grid oracle supports d = 1 or 2, got {d}"),
    }
}

/// Exhaustive scan at the final step over the whole search interval.
fn scan_1d(objective: &dyn Fn(&[f64]) -> f64, x: f64, radius: f64) -> (f64, Vec<f64>) {
    let steps = (radius / GRID_STEP).ceil() as i64;
    let mut best = (objective(&[x]), x);
    for k in -steps..=steps {
        let y = x + k as f64 * GRID_STEP;
        let v = objective(&[y]);
        if v < best.0 {
            best = (v, y);
        }
    }
    (best.0, vec![best.1])
}

/// Coarse scan of the search square, then nested windows shrinking the
/// step tenfold until it reaches `GRID_STEP`. The objective is convex, so
/// the best coarse cell brackets the minimizer.
fn refine_2d(objective: &dyn Fn(&[f64]) -> f64, x: &[f64], radius: f64) -> (f64, Vec<f64>) {
    let mut step = (radius / 50.0).max(GRID_STEP);
    let mut best = (objective(x), x.to_vec());
    let mut center = x.to_vec();
    let mut half = radius;
    loop {
        let count = (half / step).ceil() as i64;
        for i in -count..=count {
            for j in -count..=count {
                let y = [center[0] + i as f64 * step, center[1] + j as f64 * step];
                let v = objective(&y);
                if v < best.0 {
                    best = (v, y.to_vec());
                }
            }
        }
        if step <= GRID_STEP {
            return best;
        }
        center = best.1.clone();
        half = 2.0 * step;
        step = (step / 10.0).max(GRID_STEP);
    }
}

/// Largest disagreements between the closed forms and the grid oracle.
#[derive(Debug, Default, Clone, Copy)]
pub struct Agreement {
    pub queries: usize,
    /// Queries away from the clip boundary, where the gradient is compared.
    pub gradient_checked: usize,
    pub max_value_err: f64,
    pub max_gradient_err: f64,
    pub max_argmin_err: f64,
}

/// Family kinds covered by the oracle comparison.
pub const FAMILY_NAMES: [&str; 4] =
    ["quadratic_anchor", "indicator_quadratic", "smoothed_hinge_margin", "cubic_anchor"];

fn uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

fn random_point(rng: &mut RngStream, d: usize, half: f64) -> Point {
    Point::new((0..d).map(|_| uniform(rng, -half, half)).collect())
}

/// A random family instance and payload of the named kind in dimension `d`.
pub fn random_query(name: &str, d: usize, rng: &mut RngStream) -> (LossFamily, SamplePayload) {
    match name {
        "quadratic_anchor" => (
            LossFamily::QuadraticAnchor { curvature: uniform(rng, 0.5, 2.0) },
            SamplePayload::Anchor(random_point(rng, d, 1.0)),
        ),
        "indicator_quadratic" => {
            let anchor = if rng.uniform() < 0.2 { Point::zeros(d) } else { random_point(rng, d, 1.0) };
            (LossFamily::IndicatorQuadratic { curvature: uniform(rng, 0.5, 2.0) }, SamplePayload::Anchor(anchor))
        }
        "smoothed_hinge_margin" => {
            let features = loop {
                let a = random_point(rng, d, 1.5);
                if a.norm() >= 0.3 {
                    break a;
                }
            };
            let label = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
            (LossFamily::hinge(uniform(rng, 0.3, 1.0)), SamplePayload::Labeled { features, label })
        }
        "cubic_anchor" => (
            LossFamily::CubicAnchor { coefficient: uniform(rng, 0.5, 2.0) },
            SamplePayload::Anchor(random_point(rng, d, 1.0)),
        ),
        other => panic!("unknown family {other}"),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Compare the closed-form extension of `queries` random samples of the
/// named family against the grid oracle, alternating `d = 1` and `d = 2`.
///
/// The reference gradient is `∇F(y)` at the grid minimizer `y`, which
/// equals the extension gradient by the envelope identity. Queries with
/// `|‖∇F(x)‖ − L| < 1e-2` sit on the clip boundary and skip that check.
pub fn compare_family(name: &str, queries: usize, rng: &mut RngStream) -> Agreement {
    let mut out = Agreement { queries, ..Agreement::default() };
    for q in 0..queries {
        let d = 1 + q % 2;
        let (family, payload) = random_query(name, d, rng);
        let x = random_point(rng, d, 2.0);
        let clip = uniform(rng, 0.3, 3.0);
        let f = |y: &[f64]| family.value(&Point::new(y.to_vec()), &payload);
        let (value, argmin) = infimal_convolution(&f, x.coords(), clip);
        out.max_value_err = out.max_value_err.max((family.ext_value(&x, &payload, clip) - value).abs());
        let closed_argmin = family.ext_argmin(&x, &payload, clip);
        out.max_argmin_err = out.max_argmin_err.max(max_abs_diff(closed_argmin.coords(), &argmin));
        if (family.gradient(&x, &payload).norm() - clip).abs() >= 1e-2 {
            let reference = family.gradient(&Point::new(argmin), &payload);
            let closed = family.ext_gradient(&x, &payload, clip);
            out.max_gradient_err = out.max_gradient_err.max(max_abs_diff(closed.coords(), reference.coords()));
            out.gradient_checked += 1;
        }
    }
    out
}
