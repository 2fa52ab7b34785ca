//! Experiment configuration: a flat `key = value` file plus overrides.
//!
//! Later sources win, so callers apply defaults, then the file, then each
//! `--set key=value` in order.

use std::fmt;
use std::path::PathBuf;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Every anchor at the optimum; interpolating.
    NoiselessLs,
    /// Anchors scattered around the optimum with Gaussian noise.
    NoisyLs,
    /// Separable data under the smoothed hinge loss.
    Margin,
    /// Every anchor at the optimum under a cubic loss (κ = 3).
    CubicGrowth,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::NoiselessLs => "noiseless_ls",
            Family::NoisyLs => "noisy_ls",
            Family::Margin => "margin",
            Family::CubicGrowth => "cubic_growth",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        [Family::NoiselessLs, Family::NoisyLs, Family::Margin, Family::CubicGrowth].into_iter().find(|f| f.name() == s)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverId {
    EpochGrowth,
    Interpolation,
    KappaInterpolation,
    Adaptive,
}

impl SolverId {
    pub fn name(self) -> &'static str {
        match self {
            SolverId::EpochGrowth => "epoch_growth",
            SolverId::Interpolation => "interpolation",
            SolverId::KappaInterpolation => "kappa_interpolation",
            SolverId::Adaptive => "adaptive",
        }
    }

    pub fn from_name(s: &str) -> Option<SolverId> {
        [SolverId::EpochGrowth, SolverId::Interpolation, SolverId::KappaInterpolation, SolverId::Adaptive]
            .into_iter()
            .find(|v| v.name() == s)
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub solver: SolverId,
    pub dim: usize,
    /// `H = λ` for the least-squares families, the coefficient `c` for the
    /// cubic family.
    pub curvature: f64,
    pub noise_std: f64,
    pub margin: f64,
    pub n_grid: Vec<usize>,
    pub seeds: usize,
    pub seed_base: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// Explicit outer epoch count `T` of the localization solvers.
    pub epochs: Option<usize>,
    /// Epoch count of a standalone growth-solver run (the `epoch_growth`
    /// solver and the adaptive solver's first phase).
    pub growth_epochs: Option<usize>,
    /// Explicit block size `m`.
    pub block: Option<usize>,
    /// Block size `min(block_cap, ⌊n/2⌋)`, so at least two epochs run.
    pub block_cap: Option<usize>,
    /// Explicit tail probability; otherwise `β = n^{−μ}`.
    pub beta: Option<f64>,
    pub mu: f64,
    pub constant_scale: f64,
    pub step_scale: f64,
    pub inner_epochs: Option<usize>,
    /// Solvers see only the first `⌊fraction·n⌋` samples.
    pub data_fraction: f64,
    /// When false, `wall_ms` is written as 0 so output is byte-stable.
    pub timing: bool,
    /// Worker threads; 0 means one per core.
    pub parallel: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: Family::NoiselessLs,
            solver: SolverId::Interpolation,
            dim: 2,
            curvature: 1.0,
            noise_std: 0.5,
            margin: 0.5,
            n_grid: (10..=16).map(|k| 1usize << k).collect(),
            seeds: 20,
            seed_base: 0,
            epsilon: 1.0,
            delta: 0.0,
            epochs: None,
            growth_epochs: Some(2),
            block: None,
            block_cap: Some(2048),
            beta: None,
            mu: 4.0,
            constant_scale: 8e-4,
            step_scale: 512.0,
            inner_epochs: Some(1),
            data_fraction: 1.0,
            timing: true,
            parallel: 0,
            out: None,
        }
    }
}

fn bad(key: &str, value: &str, why: &str) -> BenchError {
    BenchError::Config(format!("{key} = {value}: {why}"))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value, "not a valid value"))
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "none" || value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

impl ExperimentConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "family" => self.family = Family::from_name(value).ok_or_else(|| bad(key, value, "unknown family"))?,
            "solver" => self.solver = SolverId::from_name(value).ok_or_else(|| bad(key, value, "unknown solver"))?,
            "d" | "dim" => self.dim = parse(key, value)?,
            "curvature" => self.curvature = parse(key, value)?,
            "noise_std" => self.noise_std = parse(key, value)?,
            "margin" => self.margin = parse(key, value)?,
            "n_grid" => {
                self.n_grid = value.split(',').map(|v| parse(key, v.trim())).collect::<Result<Vec<usize>>>()?;
            }
            "seeds" => self.seeds = parse(key, value)?,
            "seed_base" => self.seed_base = parse(key, value)?,
            "eps" | "epsilon" => self.epsilon = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "T" | "epochs" => self.epochs = optional(key, value)?,
            "growth_epochs" => self.growth_epochs = optional(key, value)?,
            "m" | "block" => self.block = optional(key, value)?,
            "block_cap" => self.block_cap = optional(key, value)?,
            "beta" => self.beta = optional(key, value)?,
            "mu" => self.mu = parse(key, value)?,
            "constant_scale" => self.constant_scale = parse(key, value)?,
            "step_scale" => self.step_scale = parse(key, value)?,
            "inner_epochs" => self.inner_epochs = optional(key, value)?,
            "data_fraction" => self.data_fraction = parse(key, value)?,
            "timing" => self.timing = parse(key, value)?,
            "parallel" => self.parallel = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(BenchError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Apply a `key=value` override as given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) =
            pair.split_once('=').ok_or_else(|| BenchError::Config(format!("expected key=value, got '{pair}'")))?;
        self.set(k, v)
    }

    /// Apply every setting of a config file body. Blank lines and `#`
    /// comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| BenchError::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v).map_err(|e| match e {
                BenchError::Config(msg) => BenchError::Config(format!("line {}: {msg}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(BenchError::Config(msg.to_string()));
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("n_grid must be nonempty and strictly increasing");
        }
        if self.seeds == 0 {
            return fail("seeds must be at least 1");
        }
        if self.dim == 0 {
            return fail("d must be positive");
        }
        if !(self.epsilon > 0.0) || !(0.0..1.0).contains(&self.delta) {
            return fail("need eps > 0 and 0 <= delta < 1");
        }
        if !(self.curvature > 0.0 && self.constant_scale > 0.0 && self.step_scale > 0.0 && self.mu > 0.0) {
            return fail("curvature, constant_scale, step_scale and mu must be positive");
        }
        if !(self.data_fraction > 0.0 && self.data_fraction <= 1.0) {
            return fail("data_fraction must lie in (0, 1]");
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b < 1.0) {
                return fail("beta must lie in (0, 1)");
            }
        }
        if matches!(self.block, Some(0))
            || matches!(self.block_cap, Some(0))
            || matches!(self.epochs, Some(0))
            || matches!(self.growth_epochs, Some(0))
        {
            return fail("T, m and block_cap must be positive when given");
        }
        if matches!(self.inner_epochs, Some(0)) {
            return fail("inner_epochs must be positive when given");
        }
        if self.family == Family::Margin && self.solver != SolverId::EpochGrowth {
            return fail("the margin family has no growth coefficient; only epoch_growth applies");
        }
        if (self.family == Family::CubicGrowth) != (self.solver == SolverId::KappaInterpolation)
            && self.solver != SolverId::EpochGrowth
        {
            return fail("kappa_interpolation pairs with the cubic_growth family only");
        }
        Ok(())
    }
}
