//! Private base solvers: the output-perturbed localization ERM, the
//! epoch-based growth solver that calls it, and the Lipschitzian-extension
//! wrapper that swaps every gradient query for its extended counterpart.

use std::cell::Cell;
use std::ops::Range;

use crate::domain::{
    project_unchecked, Ball, EpochRecord, Instance, Point, PrivacyBudget, RunTrace, SamplePayload, SolverKind,
};
use crate::error::{check_dim, contract, Error, Result};
use crate::losses::LossFamily;
use crate::mechanisms::{approx_noise_scale, gaussian_vector, laplace_vector, pure_noise_scale, RngStream};

/// Stopping rule of the regularized ERM solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolveConfig {
    /// Absolute floor on the projected-gradient-norm threshold.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Use the closed-form solve for isotropic quadratic slices.
    pub exact_quadratic: bool,
}

impl Default for InnerSolveConfig {
    fn default() -> Self {
        InnerSolveConfig { tolerance: 1e-10, max_iterations: 100_000, exact_quadratic: true }
    }
}

/// Knobs shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub inner: InnerSolveConfig,
    /// Multiplier on the epoch solver's initial step size.
    pub step_scale: f64,
    /// Epoch count of the growth solver when it runs inside another solver;
    /// `None` uses `⌈2 ln m / (κ̄ − 1)⌉` for a block of `m` samples.
    pub inner_epochs: Option<usize>,
    /// Epoch count of the growth solver in the adaptive solver's first
    /// phase; `None` uses the same default on the first half of the data.
    pub growth_epochs: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { inner: InnerSolveConfig::default(), step_scale: 1.0, inner_epochs: None, growth_epochs: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub point: Point,
    pub trace: RunTrace,
    pub privacy: PrivacyBudget,
}

/// Records the norms of every per-sample gradient a solver consumes.
#[derive(Debug, Default)]
pub struct GradientProbe {
    max_norm: Cell<f64>,
    count: Cell<u64>,
}

impl GradientProbe {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn max_norm(&self) -> f64 {
        self.max_norm.get()
    }

    pub fn count(&self) -> u64 {
        self.count.get()
    }

    fn record(&self, norm: f64) {
        self.count.set(self.count.get() + 1);
        if norm > self.max_norm.get() {
            self.max_norm.set(norm);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMode {
    Raw,
    /// Every gradient is the gradient of the Lipschitzian extension at `clip`.
    Extended {
        clip: f64,
    },
}

/// The only path through which solvers read per-sample gradients.
#[derive(Debug, Clone, Copy)]
pub struct GradientOracle<'p> {
    pub mode: OracleMode,
    probe: Option<&'p GradientProbe>,
}

impl<'p> GradientOracle<'p> {
    pub fn raw() -> Self {
        GradientOracle { mode: OracleMode::Raw, probe: None }
    }

    pub fn extended(clip: f64) -> Self {
        GradientOracle { mode: OracleMode::Extended { clip }, probe: None }
    }

    pub fn with_probe(mut self, probe: &'p GradientProbe) -> Self {
        self.probe = Some(probe);
        self
    }

    pub fn gradient(&self, family: &LossFamily, x: &Point, s: &SamplePayload) -> Point {
        let g = match self.mode {
            OracleMode::Raw => family.gradient(x, s),
            OracleMode::Extended { clip } => family.ext_gradient(x, s, clip),
        };
        if let Some(p) = self.probe {
            p.record(g.norm());
        }
        g
    }

    fn clip(&self) -> Option<f64> {
        match self.mode {
            OracleMode::Raw => None,
            OracleMode::Extended { clip } => Some(clip),
        }
    }
}

/// Runs `inner` with an oracle that answers every gradient query with the
/// extension gradient at `clip`.
pub fn lipschitz_wrap<'p, R>(
    clip: f64,
    probe: Option<&'p GradientProbe>,
    inner: impl FnOnce(&GradientOracle<'p>) -> R,
) -> R {
    let mut oracle = GradientOracle::extended(clip);
    oracle.probe = probe;
    inner(&oracle)
}

/// A contiguous slice of a dataset together with its global offset.
#[derive(Debug, Clone, Copy)]
pub struct DataView<'a> {
    pub family: LossFamily,
    pub samples: &'a [SamplePayload],
    pub offset: usize,
    pub dim: usize,
}

impl<'a> DataView<'a> {
    pub fn of(inst: &'a Instance) -> Self {
        DataView { family: inst.family, samples: inst.dataset.samples(), offset: 0, dim: inst.dim() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sub-view over local indices `range`.
    pub fn slice(&self, range: Range<usize>) -> DataView<'a> {
        DataView {
            family: self.family,
            samples: &self.samples[range.clone()],
            offset: self.offset + range.start,
            dim: self.dim,
        }
    }

    pub fn global_range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }

    /// Global indices past `used` local samples.
    fn leftover(&self, used: usize) -> Range<usize> {
        self.offset + used..self.offset + self.len()
    }
}

/// Smoothness of the per-sample losses seen through `oracle` on `domain`.
fn slice_smoothness(view: &DataView, oracle: &GradientOracle, domain: &Ball) -> Result<f64> {
    let h = match view.family {
        LossFamily::QuadraticAnchor { curvature } | LossFamily::IndicatorQuadratic { curvature } => curvature,
        LossFamily::SmoothedHingeMargin { .. } => {
            view.samples.iter().map(|s| view.family.sample_smoothness(s)).fold(0.0, f64::max)
        }
        LossFamily::CubicAnchor { coefficient } => {
            let far = view
                .samples
                .iter()
                .map(|s| match s {
                    SamplePayload::Anchor(a) => a.distance(&domain.center),
                    _ => 0.0,
                })
                .fold(0.0, f64::max);
            let raw = 2.0 * coefficient * (far + domain.radius);
            match oracle.clip() {
                Some(clip) => raw.min(2.0 * (coefficient * clip).sqrt()),
                None => raw,
            }
        }
    };
    if h.is_finite() {
        Ok(h)
    } else {
        Err(contract("losses have no finite smoothness bound on this domain"))
    }
}

/// Minimizes `(1/n₀) Σ F(x; s) + (1/(η n₀))‖x − center‖²` over `domain`.
///
/// Isotropic quadratic slices are solved in closed form (the constrained
/// minimizer is the projection of the unconstrained one). Under an extended
/// oracle the closed form is kept only when no sample's gradient exceeds the
/// clip level at the solution, since the extension then agrees with the raw
/// loss to first order there. Everything else runs accelerated projected
/// gradient until the gradient mapping norm drops below `tolerance`.
pub fn solve_regularized_erm(
    view: &DataView,
    oracle: &GradientOracle,
    center: &Point,
    eta: f64,
    domain: &Ball,
    cfg: &InnerSolveConfig,
    tolerance: f64,
) -> Result<Point> {
    if view.is_empty() {
        return Err(contract("regularized ERM needs a nonempty slice"));
    }
    if !(eta > 0.0) {
        return Err(contract(format!("step size must be positive, got {eta}")));
    }
    check_dim(view.dim, center.dim())?;
    check_dim(view.dim, domain.dim())?;
    let n0 = view.len() as f64;
    // 2/η, the regularizer's curvature after multiplying the objective by n₀
    let reg_n = 2.0 / eta;

    if cfg.exact_quadratic {
        if let Some((weight, mean)) = view.family.isotropic_summary(view.samples) {
            let denom = weight + reg_n;
            let candidate = if denom > 0.0 {
                let mut num = mean.scale(weight);
                num.axpy(reg_n, center);
                num.scale(1.0 / denom)
            } else {
                center.clone()
            };
            let x = project_unchecked(&candidate, domain);
            let consistent = match oracle.clip() {
                Some(clip) => view.samples.iter().all(|s| view.family.gradient(&x, s).norm() <= clip),
                None => true,
            };
            if consistent {
                if oracle.probe.is_some() {
                    for s in view.samples {
                        oracle.gradient(&view.family, &x, s);
                    }
                }
                return Ok(x);
            }
        }
    }

    let reg = reg_n / n0;
    let smooth = slice_smoothness(view, oracle, domain)? + reg;
    let tol = tolerance.max(cfg.tolerance);
    let grad = |y: &Point| -> Point {
        let mut g = Point::zeros(view.dim);
        for s in view.samples {
            g.axpy(1.0 / n0, &oracle.gradient(&view.family, y, s));
        }
        g.axpy(reg, &y.sub(center));
        g
    };

    let step = 1.0 / smooth;
    let q = reg / smooth;
    let strong_momentum = (1.0 - q.sqrt()) / (1.0 + q.sqrt());
    let mut x = project_unchecked(center, domain);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut last_norm = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let g = grad(&y);
        let mut trial = y.clone();
        trial.axpy(-step, &g);
        let x_new = project_unchecked(&trial, domain);
        last_norm = y.distance(&x_new) * smooth;
        if last_norm <= tol {
            return Ok(x_new);
        }
        let momentum = if reg > 0.0 {
            strong_momentum
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let m = (t - 1.0) / t_next;
            t = t_next;
            m
        };
        y = x_new.clone();
        y.axpy(momentum, &x_new.sub(&x));
        x = x_new;
    }
    Err(Error::Convergence { iterations: cfg.max_iterations, grad_norm: last_norm })
}

/// Noise scale for one output-perturbation step.
pub fn noise_scale(lipschitz: f64, eta: f64, d: usize, budget: &PrivacyBudget) -> Result<f64> {
    if budget.is_pure() {
        Ok(pure_noise_scale(lipschitz, eta, d, budget.epsilon))
    } else {
        approx_noise_scale(lipschitz, eta, budget.delta, budget.epsilon)
    }
}

fn add_noise(x: &Point, sigma: f64, budget: &PrivacyBudget, rng: &mut RngStream) -> Result<Point> {
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let noise =
        if budget.is_pure() { laplace_vector(x.dim(), sigma, rng)? } else { gaussian_vector(x.dim(), sigma, rng)? };
    Ok(x.add(&noise))
}

/// Number of phases of the localization ERM: `max(1, ⌈ln n⌉)`.
pub fn localization_phases(n: usize) -> usize {
    ((n as f64).ln().ceil() as usize).max(1)
}

/// Output-perturbed localization ERM on a view.
///
/// Phase `i` uses step `η_i = 2^{−4i} η`, solves the regularized ERM on its
/// own block of `n₀ = ⌊n/k⌋` samples over the ball of radius `2Lη_i n₀`
/// around the previous iterate, and adds noise of scale `4Lη_i√d/ε`
/// (Laplace) or `4Lη_i√ln(1/δ)/ε` (Gaussian). The returned point is the last
/// iterate projected onto `domain`.
#[allow(clippy::too_many_arguments)]
pub fn localization_erm_view(
    view: &DataView,
    oracle: &GradientOracle,
    domain: &Ball,
    x0: &Point,
    eta: f64,
    clip: f64,
    budget: &PrivacyBudget,
    cfg: &SolverConfig,
    rng: &mut RngStream,
) -> Result<(Point, RunTrace)> {
    check_dim(view.dim, x0.dim())?;
    if !(clip > 0.0) {
        return Err(contract("clipping constant must be positive"));
    }
    let n = view.len();
    let k = localization_phases(n);
    let n0 = n / k;
    if n0 == 0 {
        return Err(Error::InsufficientData { needed: k, available: n });
    }
    let mut trace = RunTrace::new(SolverKind::Localization);
    let mut x = x0.clone();
    for i in 1..=k {
        let eta_i = eta * 2f64.powi(-4 * i as i32);
        let radius = 2.0 * clip * eta_i * n0 as f64;
        let sub = Ball { center: x.clone(), radius };
        let block = view.slice((i - 1) * n0..i * n0);
        let sigma = noise_scale(clip, eta_i, view.dim, budget)?;
        let x_hat = solve_regularized_erm(
            &block,
            oracle,
            &x,
            eta_i,
            &sub,
            &cfg.inner,
            sigma / 100.0 * 2.0 / (eta_i * n0 as f64),
        )?;
        let next = add_noise(&x_hat, sigma, budget, rng)?;
        trace.epochs.push(EpochRecord {
            index: i,
            center: x,
            radius,
            lipschitz: clip,
            iterate: next.clone(),
            noise_scale: sigma,
            step_size: Some(eta_i),
            samples: block.global_range(),
            inner: None,
        });
        x = next;
    }
    trace.unused = view.leftover(k * n0);
    Ok((project_unchecked(&x, domain), trace))
}

/// Initial step size of the epoch solver, before `step_scale`.
pub fn epoch_initial_step(diameter: f64, clip: f64, n0: usize, d: usize, beta: f64, budget: &PrivacyBudget) -> f64 {
    let log_beta = (1.0 / beta).ln();
    let n0f = n0 as f64;
    let statistical = 1.0 / (n0f * n0f.ln() * log_beta).sqrt();
    let privacy = if budget.is_pure() {
        budget.epsilon / (d as f64 * log_beta)
    } else {
        budget.epsilon / ((d as f64 * (1.0 / budget.delta).ln()).sqrt() * log_beta)
    };
    diameter / (2.0 * clip) * statistical.min(privacy)
}

/// `⌈2 ln n / (κ̄ − 1)⌉`, clamped to `[1, n]`.
pub fn default_epoch_count(n: usize, growth_floor: f64) -> usize {
    let t = (2.0 * (n as f64).ln() / (growth_floor - 1.0)).ceil();
    (t.max(1.0) as usize).min(n.max(1))
}

/// Epoch-based growth solver on a view.
///
/// Epoch `i` (from 0) runs the localization ERM on block `i` of size
/// `⌊n/T⌋`, constrained to the ball of radius `2^{−i} diam(domain)` around
/// the current point, with step `2^{−i} η₀`.
#[allow(clippy::too_many_arguments)]
pub fn epoch_growth_view(
    view: &DataView,
    oracle: &GradientOracle,
    domain: &Ball,
    x0: &Point,
    clip: f64,
    epochs: usize,
    beta: f64,
    budget: &PrivacyBudget,
    cfg: &SolverConfig,
    rng: &mut RngStream,
) -> Result<(Point, RunTrace)> {
    check_dim(view.dim, x0.dim())?;
    if epochs == 0 {
        return Err(contract("epoch solver needs at least one epoch"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(contract(format!("beta must lie in (0, 1), got {beta}")));
    }
    let n = view.len();
    let n0 = n / epochs;
    if n0 == 0 {
        return Err(Error::InsufficientData { needed: epochs, available: n });
    }
    let r0 = domain.diameter();
    let eta0 = cfg.step_scale * epoch_initial_step(r0, clip, n0, view.dim, beta, budget);
    let mut trace = RunTrace::new(SolverKind::EpochGrowth);
    let mut x = x0.clone();
    for i in 0..epochs {
        let scale = 2f64.powi(-(i as i32));
        let sub = Ball { center: x.clone(), radius: r0 * scale };
        let eta_i = eta0 * scale;
        let block = view.slice(i * n0..(i + 1) * n0);
        let (next, inner) = localization_erm_view(&block, oracle, &sub, &x, eta_i, clip, budget, cfg, rng)?;
        let first_sigma = inner.epochs.first().map_or(0.0, |e| e.noise_scale);
        trace.epochs.push(EpochRecord {
            index: i,
            center: x,
            radius: sub.radius,
            lipschitz: clip,
            iterate: next.clone(),
            noise_scale: first_sigma,
            step_size: Some(eta_i),
            samples: block.global_range(),
            inner: Some(inner),
        });
        x = next;
    }
    trace.unused = view.leftover(epochs * n0);
    Ok((project_unchecked(&x, domain), trace))
}

/// Localization ERM over the instance's full dataset and domain.
#[allow(clippy::too_many_arguments)]
pub fn localization_erm(
    inst: &Instance,
    x0: &Point,
    eta: f64,
    clip: f64,
    budget: &PrivacyBudget,
    cfg: &SolverConfig,
    rng: &mut RngStream,
) -> Result<SolverResult> {
    let (point, trace) = localization_erm_view(
        &DataView::of(inst),
        &GradientOracle::raw(),
        &inst.domain,
        x0,
        eta,
        clip,
        budget,
        cfg,
        rng,
    )?;
    Ok(SolverResult { point, trace, privacy: *budget })
}

/// Epoch growth solver over the instance's full dataset and domain, reading
/// gradients through `oracle`.
#[allow(clippy::too_many_arguments)]
pub fn epoch_growth_solver(
    inst: &Instance,
    oracle: &GradientOracle,
    x0: &Point,
    clip: f64,
    epochs: usize,
    beta: f64,
    budget: &PrivacyBudget,
    cfg: &SolverConfig,
    rng: &mut RngStream,
) -> Result<SolverResult> {
    let (point, trace) =
        epoch_growth_view(&DataView::of(inst), oracle, &inst.domain, x0, clip, epochs, beta, budget, cfg, rng)?;
    Ok(SolverResult { point, trace, privacy: *budget })
}
