//! Noise samplers, noise-scale formulas and a histogram-based ε estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::domain::{Dataset, Point};
use crate::error::{contract, Error, Result};

/// Deterministic random source keyed by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// An independent stream derived from this one's seed.
    pub fn fork(&self, stream: u64) -> RngStream {
        RngStream::new(self.seed, stream)
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn laplace(&mut self, sigma: f64) -> f64 {
        let magnitude: f64 = self.rng.sample(Exp1);
        if self.rng.random::<bool>() {
            sigma * magnitude
        } else {
            -sigma * magnitude
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(contract(format!("noise scale must be positive and finite, got {sigma}")))
    }
}

/// `d` i.i.d. Laplace coordinates with density ∝ exp(−|z|/σ).
pub fn laplace_vector(d: usize, sigma: f64, rng: &mut RngStream) -> Result<Point> {
    check_sigma(sigma)?;
    Ok(Point::new((0..d).map(|_| rng.laplace(sigma)).collect()))
}

/// `d` i.i.d. centered normal coordinates with standard deviation σ.
pub fn gaussian_vector(d: usize, sigma: f64, rng: &mut RngStream) -> Result<Point> {
    check_sigma(sigma)?;
    Ok(Point::new((0..d).map(|_| sigma * rng.standard_normal()).collect()))
}

/// `4·L·η·√d / ε`.
pub fn pure_noise_scale(lipschitz: f64, eta: f64, d: usize, epsilon: f64) -> f64 {
    4.0 * lipschitz * eta * (d as f64).sqrt() / epsilon
}

/// `4·L·η·√ln(1/δ) / ε`.
pub fn approx_noise_scale(lipschitz: f64, eta: f64, delta: f64, epsilon: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(contract(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(4.0 * lipschitz * eta * (1.0 / delta).ln().sqrt() / epsilon)
}

/// Histogram audit settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub trials: usize,
    pub bins: usize,
    /// Outputs are clamped into `[lo, hi]` before binning.
    pub clamp: (f64, f64),
    /// Bins with fewer hits than this on either side are ignored; the log
    /// ratio of sparse bins is dominated by sampling noise.
    pub min_bin_count: usize,
}

impl AuditConfig {
    /// 64 equal-width bins over `center ± 8σ`.
    pub fn around(center: f64, sigma: f64, trials: usize) -> Self {
        AuditConfig { trials, bins: 64, clamp: (center - 8.0 * sigma, center + 8.0 * sigma), min_bin_count: 1000 }
    }
}

/// Estimate of the largest log probability ratio between the output
/// histograms of `mech` on two neighbouring datasets.
///
/// Each side gets `cfg.trials` runs with add-one smoothed bin frequencies;
/// the estimate is the maximum of `|ln(p̂/q̂)|` over bins where both sides
/// reach `cfg.min_bin_count`. This is a statistical estimate, not a
/// certificate.
pub fn empirical_epsilon<M>(
    mut mech: M,
    s: &Dataset,
    s_neighbor: &Dataset,
    cfg: &AuditConfig,
    rng: &mut RngStream,
) -> Result<f64>
where
    M: FnMut(&Dataset, &mut RngStream) -> Result<f64>,
{
    if cfg.trials < 2 || cfg.bins < 2 || !(cfg.clamp.1 > cfg.clamp.0) {
        return Err(contract("audit needs at least 2 trials, 2 bins and a nonempty clamp range"));
    }
    let mut hist = |data: &Dataset, rng: &mut RngStream| -> Result<Vec<usize>> {
        let mut counts = vec![0usize; cfg.bins];
        let (lo, hi) = cfg.clamp;
        let width = (hi - lo) / cfg.bins as f64;
        for _ in 0..cfg.trials {
            let out = mech(data, rng)?.clamp(lo, hi);
            let bin = (((out - lo) / width) as usize).min(cfg.bins - 1);
            counts[bin] += 1;
        }
        Ok(counts)
    };
    let left = hist(s, rng)?;
    let right = hist(s_neighbor, rng)?;
    let total = (cfg.trials + cfg.bins) as f64;
    let mut best: Option<f64> = None;
    for (&a, &b) in left.iter().zip(&right) {
        if a.min(b) < cfg.min_bin_count {
            continue;
        }
        let ratio = (((a + 1) as f64 / total) / ((b + 1) as f64 / total)).ln().abs();
        best = Some(best.map_or(ratio, |v: f64| v.max(ratio)));
    }
    let qualifying = left.iter().zip(&right).filter(|(a, b)| (**a).min(**b) >= cfg.min_bin_count).count();
    match best {
        Some(v) if qualifying >= 2 => Ok(v),
        _ => {
            Err(Error::Inconclusive(format!("only {qualifying} bins reached {} hits on both sides", cfg.min_bin_count)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_scale_examples() {
        assert!((pure_noise_scale(1.0, 0.01, 4, 0.5) - 0.16).abs() < 1e-15);
        assert_eq!(pure_noise_scale(1.0, 1.0, 1, 4.0), 1.0);
        assert_eq!(pure_noise_scale(1.0, 0.02, 4, 0.5), 2.0 * pure_noise_scale(1.0, 0.01, 4, 0.5));
        assert!((approx_noise_scale(1.0, 1.0, (-1.0f64).exp(), 4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((approx_noise_scale(2.0, 0.5, (-4.0f64).exp(), 1.0).unwrap() - 8.0).abs() < 1e-12);
        assert!(approx_noise_scale(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(approx_noise_scale(1.0, 1.0, 1e-6, 1.0).unwrap() > approx_noise_scale(1.0, 1.0, 1e-3, 1.0).unwrap());
    }

    #[test]
    fn samplers_reject_bad_sigma_and_replay() {
        let mut rng = RngStream::new(7, 0);
        assert!(laplace_vector(3, 0.0, &mut rng).is_err());
        assert!(gaussian_vector(3, -1.0, &mut rng).is_err());
        assert_eq!(laplace_vector(0, 1.0, &mut rng).unwrap().dim(), 0);
        let a = laplace_vector(5, 1.0, &mut RngStream::new(9, 3)).unwrap();
        let b = laplace_vector(5, 1.0, &mut RngStream::new(9, 3)).unwrap();
        assert_eq!(a, b);
        let c = gaussian_vector(5, 1.0, &mut RngStream::new(9, 3)).unwrap();
        let d = gaussian_vector(5, 1.0, &mut RngStream::new(9, 3)).unwrap();
        assert_eq!(c, d);
        let e = laplace_vector(5, 1.0, &mut RngStream::new(9, 4)).unwrap();
        assert_ne!(a, e);
    }
}
