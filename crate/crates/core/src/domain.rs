//! Geometric and problem types shared by every solver.
//!
//! Everything here is an immutable value once constructed. Domains are
//! Euclidean balls throughout; sub-domains produced by the localization
//! solvers are plain balls and are never intersected with their parent.

use std::ops::Range;

use crate::error::{check_dim, contract, Error, Result};
use crate::losses::LossFamily;

/// A point in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|a| a * factor).collect())
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Point) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(contract(format!("ball radius must be nonnegative, got {radius}")));
        }
        if !center.is_finite() {
            return Err(contract("ball center must be finite"));
        }
        Ok(Ball { center, radius })
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        x.distance(&self.center) <= self.radius + tol
    }
}

/// Radial projection onto a ball.
pub fn project_onto_ball(x: &Point, ball: &Ball) -> Result<Point> {
    check_dim(ball.dim(), x.dim())?;
    Ok(project_unchecked(x, ball))
}

pub(crate) fn project_unchecked(x: &Point, ball: &Ball) -> Point {
    let offset = x.sub(&ball.center);
    let dist = offset.norm();
    if dist <= ball.radius {
        x.clone()
    } else {
        let mut out = ball.center.clone();
        out.axpy(ball.radius / dist, &offset);
        out
    }
}

/// Per-sample data consumed by a loss family.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplePayload {
    /// An anchor point `s`; used by the radial families.
    Anchor(Point),
    /// A feature vector with a ±1 label; used by the margin family.
    Labeled { features: Point, label: f64 },
}

impl SamplePayload {
    pub fn dim(&self) -> usize {
        match self {
            SamplePayload::Anchor(s) => s.dim(),
            SamplePayload::Labeled { features, .. } => features.dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<SamplePayload>,
    dim: usize,
}

impl Dataset {
    pub fn new(samples: Vec<SamplePayload>) -> Result<Self> {
        let first = samples.first().ok_or_else(|| contract("dataset must contain at least one sample"))?;
        let dim = first.dim();
        for s in &samples {
            check_dim(dim, s.dim())?;
        }
        Ok(Dataset { samples, dim })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[SamplePayload] {
        &self.samples
    }

    /// Copy with sample `index` replaced; used to build neighbouring datasets.
    pub fn with_replaced(&self, index: usize, payload: SamplePayload) -> Result<Dataset> {
        check_dim(self.dim, payload.dim())?;
        if index >= self.len() {
            return Err(contract(format!("index {index} out of range for n = {}", self.len())));
        }
        let mut samples = self.samples.clone();
        samples[index] = payload;
        Ok(Dataset { samples, dim: self.dim })
    }
}

/// Known analytic constants of a loss/dataset pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConstants {
    pub lipschitz: f64,
    pub smoothness: f64,
    /// Growth coefficient λ; zero means no growth is declared.
    pub growth: f64,
    /// Growth exponent κ (2 for quadratic growth).
    pub growth_exponent: f64,
    /// Lower bound κ̄ on the growth exponent used to size epoch counts.
    pub growth_floor: f64,
}

impl LossConstants {
    pub fn new(lipschitz: f64, smoothness: f64, growth: f64) -> Result<Self> {
        Self::with_exponent(lipschitz, smoothness, growth, 2.0, 2.0)
    }

    pub fn with_exponent(
        lipschitz: f64,
        smoothness: f64,
        growth: f64,
        growth_exponent: f64,
        growth_floor: f64,
    ) -> Result<Self> {
        if !(lipschitz > 0.0 && smoothness > 0.0) {
            return Err(contract("Lipschitz and smoothness constants must be positive"));
        }
        if !(growth >= 0.0) {
            return Err(contract("growth coefficient must be nonnegative"));
        }
        if !(growth_exponent >= 2.0 && growth_floor > 1.0 && growth_floor <= growth_exponent) {
            return Err(contract(format!(
                "need kappa >= 2 and 1 < kappa_floor <= kappa, got kappa = {growth_exponent}, floor = {growth_floor}"
            )));
        }
        Ok(LossConstants { lipschitz, smoothness, growth, growth_exponent, growth_floor })
    }
}

/// An (ε, δ) pair; δ = 0 selects the pure-DP branches everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(contract(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(contract(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(PrivacyBudget { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn is_pure(&self) -> bool {
        self.delta == 0.0
    }

    /// `min(d, sqrt(d log(1/δ)))`, which is `d` when δ = 0.
    pub fn effective_dimension(&self, dim: usize) -> f64 {
        let d = dim as f64;
        if self.is_pure() {
            d
        } else {
            d.min((d * (1.0 / self.delta).ln()).sqrt())
        }
    }
}

/// Descriptor of a known minimizer set.
#[derive(Debug, Clone, PartialEq)]
pub enum Optimum {
    Point(Point),
    /// Every `x` with `<normal, x> = offset`.
    Hyperplane {
        normal: Point,
        offset: f64,
    },
}

impl Optimum {
    pub fn dim(&self) -> usize {
        match self {
            Optimum::Point(p) => p.dim(),
            Optimum::Hyperplane { normal, .. } => normal.dim(),
        }
    }

    pub fn distance(&self, x: &Point) -> f64 {
        match self {
            Optimum::Point(p) => x.distance(p),
            Optimum::Hyperplane { normal, offset } => (normal.dot(x) - offset).abs() / normal.norm(),
        }
    }

    /// The point of the set closest to `x`.
    pub fn nearest(&self, x: &Point) -> Point {
        match self {
            Optimum::Point(p) => p.clone(),
            Optimum::Hyperplane { normal, offset } => {
                let t = (normal.dot(x) - offset) / normal.dot(normal);
                let mut out = x.clone();
                out.axpy(-t, normal);
                out
            }
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.distance(x) <= tol
    }
}

/// Closed-form population risk used instead of the empirical average.
#[derive(Debug, Clone, PartialEq)]
pub enum PopulationModel {
    /// `f(x) = (curvature/2)·‖x − center‖² + floor`.
    IsotropicQuadratic { center: Point, curvature: f64, floor: f64 },
}

/// A loss family, dataset, domain and known constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub family: LossFamily,
    pub dataset: Dataset,
    pub domain: Ball,
    pub constants: LossConstants,
    pub optimum: Option<Optimum>,
    pub population: Option<PopulationModel>,
}

impl Instance {
    pub fn new(
        family: LossFamily,
        dataset: Dataset,
        domain: Ball,
        constants: LossConstants,
        optimum: Option<Optimum>,
        population: Option<PopulationModel>,
    ) -> Result<Self> {
        check_dim(dataset.dim(), domain.dim())?;
        for s in dataset.samples() {
            family.validate_payload(s)?;
        }
        if let Some(opt) = &optimum {
            check_dim(dataset.dim(), opt.dim())?;
        }
        if let Some(PopulationModel::IsotropicQuadratic { center, curvature, .. }) = &population {
            check_dim(dataset.dim(), center.dim())?;
            if !(*curvature > 0.0) {
                return Err(contract("population curvature must be positive"));
            }
        }
        let inst = Instance { family, dataset, domain, constants, optimum, population };
        if let Some(opt) = &inst.optimum {
            let at = opt.nearest(&inst.domain.center);
            let gap = excess_risk(&inst, &at)?;
            if gap > 1e-12 {
                return Err(contract(format!("declared optimum has excess risk {gap:e}")));
            }
        }
        Ok(inst)
    }

    pub fn dim(&self) -> usize {
        self.dataset.dim()
    }

    pub fn n(&self) -> usize {
        self.dataset.len()
    }

    /// Empirical risk `(1/n) Σ F(x; s)`.
    pub fn empirical_risk(&self, x: &Point) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        let total: f64 = self.dataset.samples().iter().map(|s| self.family.value(x, s)).sum();
        Ok(total / self.n() as f64)
    }

    /// Largest per-sample gradient norm at the declared optimum; zero for an
    /// interpolation problem.
    pub fn interpolation_residual(&self) -> Option<f64> {
        let opt = self.optimum.as_ref()?;
        let at = opt.nearest(&self.domain.center);
        Some(self.dataset.samples().iter().map(|s| self.family.gradient(&at, s).norm()).fold(0.0, f64::max))
    }
}

/// `f(x) − min f`, computed in closed form.
///
/// The risk is the population model when one is attached and the empirical
/// average otherwise. The minimum comes from the family's closed form
/// (isotropic quadratics) or from the declared optimum.
pub fn excess_risk(inst: &Instance, x: &Point) -> Result<f64> {
    check_dim(inst.dim(), x.dim())?;
    if let Some(PopulationModel::IsotropicQuadratic { center, curvature, .. }) = &inst.population {
        let r = x.distance(center);
        return Ok(0.5 * curvature * r * r);
    }
    if let Some((weight, center)) = inst.family.isotropic_summary(inst.dataset.samples()) {
        if weight == 0.0 {
            return Ok(0.0);
        }
        let r = x.distance(&center);
        return Ok(0.5 * weight / inst.n() as f64 * r * r);
    }
    match &inst.optimum {
        Some(opt) => {
            let at = opt.nearest(x);
            let gap = inst.empirical_risk(x)? - inst.empirical_risk(&at)?;
            Ok(gap.max(0.0))
        }
        None => Err(Error::UnsupportedFamily(format!(
            "{:?} has no closed-form minimum without a declared optimum",
            inst.family.id()
        ))),
    }
}

/// Explicit epoch schedule for the interpolation solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub epochs: usize,
    pub block: usize,
    pub beta: f64,
    pub mu: f64,
    pub constant_scale: f64,
}

impl Schedule {
    pub fn new(epochs: usize, block: usize, beta: f64, mu: f64, constant_scale: f64) -> Result<Self> {
        if epochs == 0 || block == 0 {
            return Err(contract("schedule needs at least one epoch and one sample per epoch"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(contract(format!("beta must lie in (0, 1), got {beta}")));
        }
        if !(mu > 0.0) {
            return Err(contract("mu must be positive"));
        }
        if !(constant_scale > 0.0) {
            return Err(contract("constant_scale must be positive"));
        }
        Ok(Schedule { epochs, block, beta, mu, constant_scale })
    }

    pub fn samples_needed(&self) -> usize {
        self.epochs * self.block
    }

    pub fn check_fits(&self, n: usize) -> Result<()> {
        if self.samples_needed() > n {
            Err(Error::InsufficientData { needed: self.samples_needed(), available: n })
        } else {
            Ok(())
        }
    }
}

/// One epoch (or phase) of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub index: usize,
    /// Center of the domain the epoch was constrained to.
    pub center: Point,
    pub radius: f64,
    pub lipschitz: f64,
    /// The epoch's output.
    pub iterate: Point,
    /// Noise scale of the first privatized release inside the epoch.
    pub noise_scale: f64,
    pub step_size: Option<f64>,
    /// Global sample indices consumed by the epoch.
    pub samples: Range<usize>,
    pub inner: Option<RunTrace>,
}

impl EpochRecord {
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Localization,
    EpochGrowth,
    Interpolation,
    KappaInterpolation,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub solver: SolverKind,
    pub epochs: Vec<EpochRecord>,
    /// Samples handed to the solver but never read.
    pub unused: Range<usize>,
    /// Set when the loop stopped before its scheduled epoch count.
    pub stopped_early: bool,
}

impl RunTrace {
    pub(crate) fn new(solver: SolverKind) -> Self {
        RunTrace { solver, epochs: Vec::new(), unused: 0..0, stopped_early: false }
    }

    /// Sample ranges at the deepest nesting level, in execution order.
    pub fn leaf_ranges(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Range<usize>>) {
        for e in &self.epochs {
            match &e.inner {
                Some(inner) => inner.collect_leaves(out),
                None => out.push(e.samples.clone()),
            }
        }
    }

    /// True when no sample index is read by two different leaf phases and
    /// every epoch's inner ranges stay inside the epoch's own range.
    pub fn is_partitioned(&self) -> bool {
        let mut ranges: Vec<_> = self.leaf_ranges().into_iter().filter(|r| !r.is_empty()).collect();
        ranges.sort_by_key(|r| r.start);
        let disjoint = ranges.windows(2).all(|w| w[0].end <= w[1].start);
        disjoint && self.nested_ok()
    }

    fn nested_ok(&self) -> bool {
        self.epochs.iter().all(|e| match &e.inner {
            Some(inner) => {
                inner
                    .leaf_ranges()
                    .iter()
                    .all(|r| r.is_empty() || (r.start >= e.samples.start && r.end <= e.samples.end))
                    && inner.nested_ok()
            }
            None => true,
        })
    }

    /// All noise scales recorded at the leaves.
    pub fn leaf_noise_scales(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_noise(&mut out);
        out
    }

    fn collect_noise(&self, out: &mut Vec<f64>) {
        for e in &self.epochs {
            match &e.inner {
                Some(inner) => inner.collect_noise(out),
                None => out.push(e.noise_scale),
            }
        }
    }
}
