//! Rate fits of median excess risk against `n` and against `ln n`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{BenchError, Result};
use crate::sweep::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `ln(excess) ≈ a + b·n`: an exponential rate.
    LinearInN,
    /// `ln(excess) ≈ a + b·ln n`: a polynomial rate.
    LinearInLogN,
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateModel::LinearInN => "log-linear-in-n",
            RateModel::LinearInLogN => "log-linear-in-log-n",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub model: RateModel,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Median excess risk per distinct `n`, in increasing `n`.
pub fn medians(rows: &[Row]) -> Vec<(usize, f64)> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in rows {
        by_n.entry(r.n).or_default().push(r.excess_risk);
    }
    by_n.into_iter().map(|(n, v)| (n, median(v))).collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Ordinary least squares `y ≈ a + b·x`; returns `(b, a, R²)`.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    // a constant response is fit exactly by the zero-slope line
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    (slope, intercept, r2)
}

/// Fit `ln(median excess)` against `n` and against `ln n`. Needs at least
/// four distinct `n` values, all with positive median.
pub fn fit_rate(rows: &[Row]) -> Result<(RateFit, RateFit)> {
    let med = medians(rows);
    if med.len() < 4 {
        return Err(BenchError::DegenerateFit(format!("need at least 4 distinct n values, got {}", med.len())));
    }
    if let Some((n, m)) = med.iter().find(|(_, m)| !(*m > 0.0 && m.is_finite())) {
        return Err(BenchError::DegenerateFit(format!("median excess risk at n = {n} is {m}; cannot take its log")));
    }
    let y: Vec<f64> = med.iter().map(|(_, m)| m.ln()).collect();
    let xn: Vec<f64> = med.iter().map(|(n, _)| *n as f64).collect();
    let xl: Vec<f64> = xn.iter().map(|n| n.ln()).collect();
    let (b1, a1, r1) = least_squares(&xn, &y);
    let (b2, a2, r2) = least_squares(&xl, &y);
    Ok((
        RateFit { model: RateModel::LinearInN, slope: b1, intercept: a1, r_squared: r1 },
        RateFit { model: RateModel::LinearInLogN, slope: b2, intercept: a2, r_squared: r2 },
    ))
}
