//! Closed-form references for the hard-instance constructions and the
//! stability lemmas, checked against the library oracles.
//!
//! Every check returns a [`Tally`]: how many cases ran, how many violated
//! the stated inequality, and how many disagreed with the library.

#![allow(dead_code)]

use dpsco::hardness::{
    growth_closure_check, make_cubic_growth, make_lower_bound_instance, make_margin_classification,
    make_noiseless_least_squares, minimizer_shift, pinch_check, stability_bound_check, superefficiency_construct,
    LowerBoundSpec, PinchParams, QuadraticEnsemble, QuadraticTerm, SuperefficiencyParams,
};
use dpsco::{Ball, Instance, Point, RngStream};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub cases: usize,
    pub violations: usize,
    /// Cases where the library's measurement differs from the reference.
    pub disagreements: usize,
}

impl Tally {
    pub fn clean(&self) -> bool {
        self.cases > 0 && self.violations == 0 && self.disagreements == 0
    }
}

/// Base minimizer at `x0 ≤ 0` on `[−1, 1]` with `H = λ = 1`; replacing `k`
/// samples by anchors at `D = 1` moves the minimizer to
/// `((n − k)·x0 + k·D)/n`, a shift of `k(D − x0)/n`. The shift must lie in
/// `[D·k/n, 8HD·k/(λn)]`.
pub fn modulus_sandwich(ns: &[usize], ks: &[usize], tol: f64) -> Tally {
    let (h, lambda, radius) = (1.0, 1.0, 1.0);
    let domain = Ball::new(Point::new(vec![0.0]), radius).unwrap();
    let mut t = Tally::default();
    for &n in ns {
        for x0 in [0.0, -0.25, -0.5] {
            let base = make_noiseless_least_squares(n, &Point::new(vec![x0]), h, domain.clone()).unwrap();
            for &k in ks {
                t.cases += 1;
                let params = SuperefficiencyParams::from_epsilon(1.0 / k as f64, 1.0, 1.0, 1.0).unwrap();
                let swapped = superefficiency_construct(&base, &params).unwrap();
                let shift = minimizer_shift(&base, &swapped).unwrap();
                let (kf, nf) = (k as f64, n as f64);
                if (shift - kf * (radius - x0) / nf).abs() > tol {
                    t.disagreements += 1;
                }
                if shift < radius * kf / nf - tol || shift > 8.0 * h * radius * kf / (lambda * nf) + tol {
                    t.violations += 1;
                }
            }
        }
    }
    t
}

fn clamped_weighted_mean(terms: &[(f64, f64)], radius: f64) -> f64 {
    let weight: f64 = terms.iter().map(|t| t.0).sum();
    let moment: f64 = terms.iter().map(|t| t.0 * t.1).sum();
    (moment / weight).clamp(-radius, radius)
}

/// Random single-swap pairs of 1-D quadratics `(c/2)(x − a)²` on `[−1, 1]`
/// with `c ∈ [0.5, 1]`, `L = 2HD`, and `λ` the smaller average curvature.
/// The minimizer shift must not exceed `4kL/(λn)`.
pub fn stability_pairs(pairs: usize, n: usize, rng: &mut RngStream) -> Tally {
    let (h, radius) = (1.0, 1.0);
    let lip = 2.0 * h * radius;
    let mut draw = || (0.5 + 0.5 * rng.uniform(), radius * (2.0 * rng.uniform() - 1.0));
    let mut t = Tally::default();
    for _ in 0..pairs {
        let base: Vec<(f64, f64)> = (0..n).map(|_| draw()).collect();
        let index = ((draw().1 + 1.0) / 2.0 * n as f64) as usize % n;
        let mut swapped = base.clone();
        swapped[index] = draw();
        let avg = |v: &[(f64, f64)]| v.iter().map(|t| t.0).sum::<f64>() / n as f64;
        let lambda = avg(&base).min(avg(&swapped));
        let shift = (clamped_weighted_mean(&base, radius) - clamped_weighted_mean(&swapped, radius)).abs();
        t.cases += 1;
        if shift > 4.0 * lip / (lambda * n as f64) + 1e-12 {
            t.violations += 1;
        }
        let ens = |v: &[(f64, f64)]| {
            QuadraticEnsemble::scalar(
                &v.iter().map(|t| t.0).collect::<Vec<_>>(),
                &v.iter().map(|t| t.1).collect::<Vec<_>>(),
            )
            .unwrap()
        };
        let r = stability_bound_check(&ens(&base), &ens(&swapped), 1, lip, lambda, Some((-radius, radius))).unwrap();
        if (r.measured - shift).abs() > 1e-12 || !r.passed {
            t.disagreements += 1;
        }
    }
    t
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)],
        2 => {
            let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt()
        }
        d => panic!("reference eigenvalue supports d <= 2, got {d}"),
    }
}

fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let trace = (0..m.nrows()).map(|i| m[(i, i)]).sum::<f64>();
    match m.nrows() {
        1 => trace,
        _ => trace - min_eigenvalue(m),
    }
}

/// Random families of `λI + rank-one` Hessians (eigenvalues in [0.5, 1.5])
/// in 1-D and 2-D. Removing any `r` samples, the averaged Hessian (still
/// normalized by `n`) must keep its smallest eigenvalue at least
/// `λ − H r/n`; the reference enumerates every removal set.
pub fn growth_closure(n: usize, removals: &[usize], rng: &mut RngStream) -> Tally {
    let (lambda, h) = (0.5, 1.5);
    let mut t = Tally::default();
    for d in [1usize, 2] {
        let hessians: Vec<DMatrix<f64>> = (0..n)
            .map(|_| {
                let u = DVector::from_fn(d, |_, _| rng.standard_normal()).normalize();
                DMatrix::identity(d, d) * lambda + &u * u.transpose() * ((h - lambda) * rng.uniform())
            })
            .collect();
        let terms = hessians
            .iter()
            .map(|hm| QuadraticTerm { hessian: hm.clone(), anchor: DVector::from_fn(d, |_, _| rng.standard_normal()) })
            .collect();
        let ens = QuadraticEnsemble::new(terms).unwrap();
        let total = hessians.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m);
        let nf = n as f64;
        let growth = min_eigenvalue(&total) / nf;
        let smooth = hessians.iter().map(max_eigenvalue).fold(0.0, f64::max);
        for &r in removals {
            let mut worst = f64::INFINITY;
            for_each_subset(n, r, &mut |idx| {
                let removed = idx.iter().fold(DMatrix::zeros(d, d), |acc, &i| acc + &hessians[i]);
                worst = worst.min(min_eigenvalue(&(&total - removed)) / nf);
            });
            t.cases += 1;
            if worst < growth - smooth * r as f64 / nf - 1e-12 {
                t.violations += 1;
            }
            let rep = growth_closure_check(&ens, r).unwrap();
            if (rep.measured - worst).abs() > 1e-12 || !rep.passed {
                t.disagreements += 1;
            }
        }
    }
    t
}

fn for_each_subset(n: usize, r: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(n: usize, r: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == r {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            go(n, r, i + 1, cur, f);
            cur.pop();
        }
    }
    go(n, r, 0, &mut Vec::new(), f);
}

/// Random ordered pairs `h, g` of 1-D quadratics with declared
/// `λ ≤ c ≤ H`. The minimizer of `h + g` must satisfy both pinch bounds and
/// each function's gradient must satisfy `(λ/2)·dist ≤ |q'| ≤ H·dist` at
/// random probes.
pub fn pinch_pairs(pairs: usize, rng: &mut RngStream) -> Tally {
    let tol = 1e-10;
    let mut t = Tally::default();
    for _ in 0..pairs {
        let mut draw = || {
            let growth = 0.1 + rng.uniform();
            let curvature = growth * (1.0 + rng.uniform());
            PinchParams {
                minimizer: 4.0 * rng.uniform() - 2.0,
                curvature,
                growth,
                smoothness: curvature * (1.0 + rng.uniform()),
            }
        };
        let (a, b) = (draw(), draw());
        let (h, g) = if a.minimizer <= b.minimizer { (a, b) } else { (b, a) };
        let probes: Vec<f64> = (0..8).map(|_| 6.0 * rng.uniform() - 3.0).collect();
        let gap = g.minimizer - h.minimizer;
        let star = (h.curvature * h.minimizer + g.curvature * g.minimizer) / (h.curvature + g.curvature);
        let moved = star - h.minimizer;
        let mut ok = moved >= 0.5 * g.growth * gap / (0.5 * g.growth + h.smoothness) - tol
            && moved <= g.smoothness * gap / (0.5 * h.growth + g.smoothness) + tol;
        for &x in &probes {
            for q in [&h, &g] {
                let slope = (q.curvature * (x - q.minimizer)).abs();
                let dist = (x - q.minimizer).abs();
                ok &= slope >= 0.5 * q.growth * dist - tol && slope <= q.smoothness * dist + tol;
            }
        }
        t.cases += 1;
        if !ok {
            t.violations += 1;
        }
        let rep = pinch_check(&h, &g, &probes).unwrap();
        if rep.passed != ok || (rep.measured - moved).abs() > tol {
            t.disagreements += 1;
        }
    }
    t
}

/// Every interpolating generator, paired with its name.
pub fn generators(rng: &mut RngStream) -> Vec<(&'static str, Instance)> {
    let domain = Ball::new(Point::new(vec![0.3, -0.2]), 1.0).unwrap();
    let xstar = Point::new(vec![0.1, 0.2]);
    vec![
        ("noiseless_least_squares", make_noiseless_least_squares(64, &xstar, 1.0, domain.clone()).unwrap()),
        ("margin_classification", make_margin_classification(3, 64, 0.5, rng).unwrap()),
        (
            "lower_bound",
            make_lower_bound_instance(&LowerBoundSpec { n: 64, k: 8, v: Point::new(vec![0.6, -0.8]), curvature: 1.0 })
                .unwrap(),
        ),
        ("cubic_growth", make_cubic_growth(64, &xstar, 1.0, domain).unwrap()),
    ]
}

/// `(gradient residual, largest per-sample loss)` at the declared optimum.
/// Losses are nonnegative, so a zero loss at a point independently
/// certifies that every sample is minimized there.
pub fn certificate(inst: &Instance) -> (f64, f64) {
    let residual = inst.interpolation_residual().expect("generators declare an optimum");
    let at = inst.optimum.as_ref().unwrap().nearest(&inst.domain.center);
    let worst = inst.dataset.samples().iter().map(|s| inst.family.value(&at, s)).fold(0.0, f64::max);
    (residual, worst)
}
