//! Rate fits against synthetic curves and an independent least-squares
//! computation.

use dpsco_bench::{fit_rate, BenchError, Family, RateModel, Row, SolverId};
use proptest::prelude::*;

fn row(n: usize, seed: u64, excess: f64) -> Row {
    Row {
        run_id: format!("synthetic-n{n}-s{seed}"),
        solver: SolverId::Interpolation,
        family: Family::NoiselessLs,
        n,
        d: 2,
        eps: 1.0,
        delta: 0.0,
        seed,
        constant_scale: 1.0,
        epochs: 1,
        block: n,
        beta: 0.05,
        excess_risk: excess,
        final_diameter: 2.0,
        final_lipschitz: 1.0,
        wall_ms: 0,
    }
}

fn curve(ns: &[usize], f: impl Fn(f64) -> f64) -> Vec<Row> {
    ns.iter().map(|&n| row(n, 0, f(n as f64))).collect()
}

#[test]
fn exponential_curve_prefers_linear_in_n() {
    let rows = curve(&[100, 200, 400, 800, 1600], |n| (-n / 100.0).exp());
    let (exp, poly) = fit_rate(&rows).unwrap();
    assert_eq!(exp.model, RateModel::LinearInN);
    assert!(exp.r_squared >= 0.999);
    assert!((exp.slope + 0.01).abs() < 1e-9);
    assert!(exp.r_squared > poly.r_squared);
}

#[test]
fn polynomial_curve_prefers_linear_in_log_n() {
    let ns: Vec<usize> = (10..=16).map(|k| 1 << k).collect();
    let (exp, poly) = fit_rate(&curve(&ns, |n| 3.0 * n.powi(-2))).unwrap();
    assert!((poly.slope + 2.0).abs() < 1e-9);
    assert!((poly.intercept - 3f64.ln()).abs() < 1e-9);
    assert!(poly.r_squared > exp.r_squared);
}

#[test]
fn constant_curve_has_zero_slopes() {
    let (exp, poly) = fit_rate(&curve(&[10, 20, 30, 40], |_| 0.25)).unwrap();
    assert!(exp.slope.abs() < 1e-12 && poly.slope.abs() < 1e-12);
    assert_eq!(exp.r_squared, 1.0);
}

#[test]
fn fit_uses_per_n_medians() {
    let mut rows = Vec::new();
    for (i, &n) in [100usize, 200, 400, 800].iter().enumerate() {
        let center = (-(n as f64) / 100.0).exp();
        // two outliers per n must not move the median
        for (s, v) in [center * 1e6, center, center, center * 1e-6, center].into_iter().enumerate() {
            rows.push(row(n, (i * 10 + s) as u64, v));
        }
    }
    let (exp, _) = fit_rate(&rows).unwrap();
    assert!((exp.slope + 0.01).abs() < 1e-9);
}

#[test]
fn degenerate_inputs_are_rejected() {
    assert!(matches!(fit_rate(&curve(&[1, 2, 3], |_| 1.0)), Err(BenchError::DegenerateFit(_))));
    assert!(matches!(fit_rate(&curve(&[1, 2, 3, 4], |n| n - 1.0)), Err(BenchError::DegenerateFit(_))));
}

fn reference_slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    (k * sxy - sx * sy) / (k * sxx - sx * sx)
}

proptest! {
    #[test]
    fn slopes_match_normal_equations(logs in prop::collection::vec(-20.0..0.0f64, 4..10)) {
        let ns: Vec<usize> = (0..logs.len()).map(|i| 1000 * (i + 1) * (i + 2)).collect();
        let rows: Vec<Row> = ns.iter().zip(&logs).map(|(&n, &l)| row(n, 0, l.exp())).collect();
        let (exp, poly) = fit_rate(&rows).unwrap();
        let xn: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let xl: Vec<f64> = xn.iter().map(|n| n.ln()).collect();
        let (se, sp) = (reference_slope(&xn, &logs), reference_slope(&xl, &logs));
        prop_assert!((exp.slope - se).abs() <= 1e-8 * se.abs().max(1e-6));
        prop_assert!((poly.slope - sp).abs() <= 1e-8 * sp.abs().max(1.0));
        prop_assert!((0.0..=1.0).contains(&exp.r_squared) && (0.0..=1.0).contains(&poly.r_squared));
    }
}
