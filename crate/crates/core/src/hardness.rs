//! Hard-instance generators and exact oracles for minimizer stability.
//!
//! The oracles work on sums of quadratics, where every minimizer and every
//! growth coefficient is available in closed form, so each reported number
//! is exact up to floating point.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::domain::{Ball, Dataset, Instance, LossConstants, Optimum, Point, PopulationModel, SamplePayload};
use crate::error::{contract, Error, Result};
use crate::losses::LossFamily;
use crate::mechanisms::RngStream;

/// Measured quantity against analytic bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
    pub detail: String,
}

impl OracleReport {
    fn new(name: &str, measured: f64, lower: Option<f64>, upper: Option<f64>, tol: f64, detail: String) -> Self {
        let passed = lower.is_none_or(|lo| measured >= lo - tol) && upper.is_none_or(|hi| measured <= hi + tol);
        OracleReport { name: name.to_string(), measured, lower, upper, passed, detail }
    }
}

/// `½ (x − anchor)ᵀ hessian (x − anchor)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTerm {
    pub hessian: DMatrix<f64>,
    pub anchor: DVector<f64>,
}

impl QuadraticTerm {
    pub fn scalar(curvature: f64, anchor: f64) -> Self {
        QuadraticTerm { hessian: DMatrix::from_element(1, 1, curvature), anchor: DVector::from_element(1, anchor) }
    }

    pub fn isotropic(curvature: f64, anchor: &Point) -> Self {
        let d = anchor.dim();
        QuadraticTerm {
            hessian: DMatrix::identity(d, d) * curvature,
            anchor: DVector::from_column_slice(anchor.coords()),
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let r = x - &self.anchor;
        0.5 * r.dot(&(&self.hessian * &r))
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.hessian * (x - &self.anchor)
    }

    fn max_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.hessian.clone()).eigenvalues.max()
    }
}

/// The empirical risk `(1/n) Σ_j q_j(x)` of a list of quadratic samples.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticEnsemble {
    terms: Vec<QuadraticTerm>,
    dim: usize,
}

impl QuadraticEnsemble {
    pub fn new(terms: Vec<QuadraticTerm>) -> Result<Self> {
        let dim = terms.first().ok_or_else(|| contract("ensemble needs at least one term"))?.anchor.len();
        for t in &terms {
            if t.anchor.len() != dim || t.hessian.nrows() != dim || t.hessian.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: t.anchor.len() });
            }
            if (&t.hessian - t.hessian.transpose()).amax() > 1e-12 {
                return Err(contract("quadratic term Hessian must be symmetric"));
            }
            if SymmetricEigen::new(t.hessian.clone()).eigenvalues.min() < -1e-12 {
                return Err(contract("quadratic term Hessian must be positive semidefinite"));
            }
        }
        Ok(QuadraticEnsemble { terms, dim })
    }

    /// One-dimensional ensemble from curvatures and anchors.
    pub fn scalar(curvatures: &[f64], anchors: &[f64]) -> Result<Self> {
        if curvatures.len() != anchors.len() {
            return Err(Error::DimensionMismatch { expected: curvatures.len(), got: anchors.len() });
        }
        Self::new(curvatures.iter().zip(anchors).map(|(&h, &a)| QuadraticTerm::scalar(h, a)).collect())
    }

    /// Exact quadratic representation of an isotropic quadratic instance.
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let (curvature, skip_zero) = match inst.family {
            LossFamily::QuadraticAnchor { curvature } => (curvature, false),
            LossFamily::IndicatorQuadratic { curvature } => (curvature, true),
            other => return Err(Error::UnsupportedFamily(format!("{:?} is not a quadratic family", other.id()))),
        };
        let terms = inst
            .dataset
            .samples()
            .iter()
            .map(|s| match s {
                SamplePayload::Anchor(a) => {
                    let silent = skip_zero && a.coords().iter().all(|&c| c == 0.0);
                    QuadraticTerm::isotropic(if silent { 0.0 } else { curvature }, a)
                }
                SamplePayload::Labeled { .. } => unreachable!("validated by Instance::new"),
            })
            .collect();
        Self::new(terms)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[QuadraticTerm] {
        &self.terms
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.terms.iter().map(|t| t.value(x)).sum::<f64>() / self.len() as f64
    }

    fn hessian_sum(&self) -> DMatrix<f64> {
        self.terms.iter().fold(DMatrix::zeros(self.dim, self.dim), |acc, t| acc + &t.hessian)
    }

    /// Smallest eigenvalue of `(1/n) Σ A_j`, which is the growth (and strong
    /// convexity) coefficient of the average.
    pub fn growth_coefficient(&self) -> f64 {
        min_eigenvalue(&self.hessian_sum(), self.len() as f64)
    }

    /// Largest per-term eigenvalue.
    pub fn smoothness(&self) -> f64 {
        self.terms.iter().map(|t| t.max_eigenvalue()).fold(0.0, f64::max)
    }

    /// Unconstrained minimizer of the average.
    pub fn minimizer(&self) -> Result<DVector<f64>> {
        let a = self.hessian_sum();
        let b = self.terms.iter().fold(DVector::zeros(self.dim), |acc, t| acc + &t.hessian * &t.anchor);
        a.lu().solve(&b).ok_or_else(|| contract("averaged Hessian is singular"))
    }

    /// Minimizer over `[lo, hi]` of a one-dimensional ensemble.
    pub fn minimizer_on_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.dim });
        }
        Ok(self.minimizer()?[0].clamp(lo, hi))
    }

    /// Largest per-sample gradient norm at `x`.
    pub fn max_gradient_at(&self, x: &DVector<f64>) -> f64 {
        self.terms.iter().map(|t| t.gradient(x).norm()).fold(0.0, f64::max)
    }

    pub fn without(&self, removed: &[usize]) -> Result<Self> {
        let terms: Vec<_> =
            self.terms.iter().enumerate().filter(|(i, _)| !removed.contains(i)).map(|(_, t)| t.clone()).collect();
        Self::new(terms)
    }

    pub fn with_replaced(&self, index: usize, term: QuadraticTerm) -> Result<Self> {
        if index >= self.len() {
            return Err(contract(format!("index {index} out of range for n = {}", self.len())));
        }
        let mut terms = self.terms.clone();
        terms[index] = term;
        Self::new(terms)
    }
}

fn min_eigenvalue(sum: &DMatrix<f64>, n: f64) -> f64 {
    SymmetricEigen::new(sum / n).eigenvalues.min()
}

// ---------------------------------------------------------------------------
// Generators

/// Every anchor sits at `xstar`, so every sample is minimized there.
pub fn make_noiseless_least_squares(n: usize, xstar: &Point, curvature: f64, domain: Ball) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, available: 0 });
    }
    let far = xstar.distance(&domain.center) + domain.radius;
    let samples = vec![SamplePayload::Anchor(xstar.clone()); n];
    Instance::new(
        LossFamily::QuadraticAnchor { curvature },
        Dataset::new(samples)?,
        domain,
        LossConstants::new(curvature * far, curvature, curvature)?,
        Some(Optimum::Point(xstar.clone())),
        Some(PopulationModel::IsotropicQuadratic { center: xstar.clone(), curvature, floor: 0.0 }),
    )
}

/// Anchors `center + N(0, std²·I)`; the population risk is
/// `(H/2)‖x − center‖² + H·d·std²/2`, minimized at `center`.
pub fn make_noisy_least_squares(
    n: usize,
    center: &Point,
    curvature: f64,
    noise_std: f64,
    domain: Ball,
    rng: &mut RngStream,
) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, available: 0 });
    }
    if !(noise_std >= 0.0) {
        return Err(contract("noise standard deviation must be nonnegative"));
    }
    let samples: Vec<SamplePayload> = (0..n)
        .map(|_| {
            let coords = center.coords().iter().map(|c| c + noise_std * rng.standard_normal()).collect();
            SamplePayload::Anchor(Point::new(coords))
        })
        .collect();
    let far = samples
        .iter()
        .map(|s| match s {
            SamplePayload::Anchor(a) => a.distance(&domain.center),
            _ => 0.0,
        })
        .fold(0.0, f64::max)
        + domain.radius;
    let floor = 0.5 * curvature * center.dim() as f64 * noise_std * noise_std;
    Instance::new(
        LossFamily::QuadraticAnchor { curvature },
        Dataset::new(samples)?,
        domain,
        LossConstants::new(curvature * far, curvature, curvature)?,
        Some(Optimum::Point(center.clone())),
        Some(PopulationModel::IsotropicQuadratic { center: center.clone(), curvature, floor }),
    )
}

/// Smallest `|⟨a_i, u⟩|` accepted when sampling margin features.
const MARGIN_ALIGNMENT: f64 = 0.2;

/// Unit features `a_i` with labels `sign⟨a_i, u⟩` for a random unit `u`,
/// keeping only features with `|⟨a_i, u⟩| ≥ 0.2`. The witness
/// `w = (2γ/0.2)·u` then has margin at least `2γ`, so it zeroes every loss
/// and stays in the flat region after any perturbation of length `γ/2`.
pub fn make_margin_classification(d: usize, n: usize, margin: f64, rng: &mut RngStream) -> Result<Instance> {
    if !(margin > 0.0) {
        return Err(contract("margin must be positive"));
    }
    if d == 0 || n == 0 {
        return Err(contract("margin instance needs d >= 1 and n >= 1"));
    }
    let u = random_unit(d, rng);
    let mut samples = Vec::with_capacity(n);
    while samples.len() < n {
        let a = random_unit(d, rng);
        let align = a.dot(&u);
        if d == 1 || align.abs() >= MARGIN_ALIGNMENT {
            samples.push(SamplePayload::Labeled { features: a, label: align.signum() });
        }
    }
    let witness = u.scale(2.0 * margin / MARGIN_ALIGNMENT);
    let family = LossFamily::hinge(margin);
    let smooth = match family {
        LossFamily::SmoothedHingeMargin { width, .. } => 1.0 / width,
        _ => unreachable!(),
    };
    let domain = Ball::new(Point::zeros(d), 2.0 * witness.norm())?;
    Instance::new(
        family,
        Dataset::new(samples)?,
        domain,
        LossConstants::new(1.0, smooth, 0.0)?,
        Some(Optimum::Point(witness)),
        None,
    )
}

fn random_unit(d: usize, rng: &mut RngStream) -> Point {
    loop {
        let v = Point::new((0..d).map(|_| rng.standard_normal()).collect());
        let norm = v.norm();
        if norm > 1e-12 {
            return v.scale(1.0 / norm);
        }
    }
}

/// Dataset `{0}^{n−k} ∪ {v}^k` under the indicator quadratic.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundSpec {
    pub n: usize,
    pub k: usize,
    pub v: Point,
    pub curvature: f64,
}

/// Indicator-quadratic instance on the ball of radius `‖v‖` around the
/// origin; the risk is `(kH/2n)‖x − v‖²`, so the growth coefficient is `kH/n`.
pub fn make_lower_bound_instance(spec: &LowerBoundSpec) -> Result<Instance> {
    if spec.k == 0 || spec.k > spec.n {
        return Err(contract(format!("need 1 <= k <= n, got k = {}, n = {}", spec.k, spec.n)));
    }
    let radius = spec.v.norm();
    if radius == 0.0 {
        return Err(contract("lower-bound point v must be nonzero"));
    }
    let d = spec.v.dim();
    let mut samples = vec![SamplePayload::Anchor(Point::zeros(d)); spec.n - spec.k];
    samples.extend(std::iter::repeat_n(SamplePayload::Anchor(spec.v.clone()), spec.k));
    let h = spec.curvature;
    Instance::new(
        LossFamily::IndicatorQuadratic { curvature: h },
        Dataset::new(samples)?,
        Ball::new(Point::zeros(d), radius)?,
        LossConstants::new(2.0 * h * radius, h, spec.k as f64 * h / spec.n as f64)?,
        Some(Optimum::Point(spec.v.clone())),
        None,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingSpec {
    pub diameter: f64,
    pub separation: f64,
    pub dim: usize,
}

/// Axis-aligned grid of spacing γ intersected with the ball of diameter D
/// around the origin (d ≤ 3).
pub fn make_packing(spec: &PackingSpec) -> Result<Vec<Point>> {
    if spec.dim == 0 || spec.dim > 3 {
        return Err(Error::UnsupportedFamily(format!("packing grids support 1 <= d <= 3, got {}", spec.dim)));
    }
    if !(spec.separation > 0.0 && spec.separation <= spec.diameter / 2.0) {
        return Err(contract("packing needs 0 < separation <= diameter / 2"));
    }
    let radius = spec.diameter / 2.0;
    let steps = (radius / spec.separation + 1e-9).floor() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-steps; spec.dim];
    loop {
        let p = Point::new(idx.iter().map(|&i| i as f64 * spec.separation).collect());
        if p.norm() <= radius * (1.0 + 1e-12) {
            out.push(p);
        }
        let mut axis = 0;
        loop {
            if axis == spec.dim {
                return Ok(out);
            }
            idx[axis] += 1;
            if idx[axis] <= steps {
                break;
            }
            idx[axis] = -steps;
            axis += 1;
        }
    }
}

/// Every anchor at `xstar` under `(c/3)‖x − s‖³`: an interpolation problem
/// with κ = 3 growth of coefficient `c`.
pub fn make_cubic_growth(n: usize, xstar: &Point, coefficient: f64, domain: Ball) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, available: 0 });
    }
    let far = xstar.distance(&domain.center) + domain.radius;
    let samples = vec![SamplePayload::Anchor(xstar.clone()); n];
    Instance::new(
        LossFamily::CubicAnchor { coefficient },
        Dataset::new(samples)?,
        domain,
        LossConstants::with_exponent(coefficient * far * far, 2.0 * coefficient * far, coefficient, 3.0, 3.0)?,
        Some(Optimum::Point(xstar.clone())),
        None,
    )
}

// ---------------------------------------------------------------------------
// Superefficiency construction and oracles

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperefficiencyParams {
    /// Number of samples removed and replaced, `⌈1/ε⌉`.
    pub removals: usize,
    /// Exponent `t` of the assumed rate `c₀·D²·exp(−c₁(nε)^t)`.
    pub exponent: f64,
    pub c0: f64,
    pub c1: f64,
}

impl SuperefficiencyParams {
    pub fn from_epsilon(epsilon: f64, exponent: f64, c0: f64, c1: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(contract("epsilon must be positive"));
        }
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(contract("rate exponent must lie in (0, 1]"));
        }
        Ok(SuperefficiencyParams { removals: (1.0 / epsilon).ceil() as usize, exponent, c0, c1 })
    }

    /// The fast rate the construction is played against.
    pub fn assumed_rate(&self, n: usize, epsilon: f64, diameter: f64) -> f64 {
        self.c0 * diameter * diameter * (-self.c1 * (n as f64 * epsilon).powf(self.exponent)).exp()
    }
}

fn one_dim_interval(inst: &Instance) -> Result<f64> {
    if inst.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: inst.dim() });
    }
    if inst.domain.center.coords()[0] != 0.0 {
        return Err(contract("construction expects the domain [-D, D] centered at 0"));
    }
    Ok(inst.domain.radius)
}

/// Replaces the last `r` samples of a one-dimensional interpolating
/// quadratic instance on `[−D, D]` by `r` copies of `(H/2)(x − D)²`.
///
/// Requires the base minimizer `x₀⋆ ≤ 0`. The result is strongly convex,
/// `2HD`-Lipschitz on the domain, and no longer interpolating.
pub fn superefficiency_construct(base: &Instance, params: &SuperefficiencyParams) -> Result<Instance> {
    let radius = one_dim_interval(base)?;
    let curvature = match base.family {
        LossFamily::QuadraticAnchor { curvature } => curvature,
        other => return Err(Error::UnsupportedFamily(format!("{:?} needs a quadratic-anchor base", other.id()))),
    };
    let n = base.n();
    let r = params.removals;
    if r == 0 || r >= n {
        return Err(contract(format!("need 1 <= r < n, got r = {r}, n = {n}")));
    }
    let ens = QuadraticEnsemble::from_instance(base)?;
    let x0 = ens.minimizer_on_interval(-radius, radius)?;
    if ens.max_gradient_at(&DVector::from_element(1, x0)) > 1e-10 {
        return Err(contract("base instance is not interpolating"));
    }
    if x0 > 0.0 {
        return Err(contract(format!("base minimizer must be <= 0, got {x0}")));
    }
    if !(base.constants.growth > 0.0) {
        return Err(contract("base instance must declare a positive growth coefficient"));
    }
    let mut samples = base.dataset.samples()[..n - r].to_vec();
    samples.extend(std::iter::repeat_n(SamplePayload::Anchor(Point::new(vec![radius])), r));
    let modified = Instance::new(base.family, Dataset::new(samples)?, base.domain.clone(), base.constants, None, None)?;
    let star = QuadraticEnsemble::from_instance(&modified)?.minimizer_on_interval(-radius, radius)?;
    let constants = LossConstants::new(2.0 * curvature * radius, curvature, base.constants.growth)?;
    Instance::new(
        modified.family,
        modified.dataset,
        modified.domain,
        constants,
        Some(Optimum::Point(Point::new(vec![star]))),
        None,
    )
}

/// Minimizer displacement between two one-dimensional quadratic instances
/// on their common domain.
pub fn minimizer_shift(a: &Instance, b: &Instance) -> Result<f64> {
    let ra = one_dim_interval(a)?;
    let rb = one_dim_interval(b)?;
    let xa = QuadraticEnsemble::from_instance(a)?.minimizer_on_interval(-ra, ra)?;
    let xb = QuadraticEnsemble::from_instance(b)?.minimizer_on_interval(-rb, rb)?;
    Ok((xa - xb).abs())
}

/// Largest minimizer shift found by replacing `j ≤ k` samples of a
/// one-dimensional ensemble on `[−D, D]` with `(H/2)(x ∓ D)²`.
///
/// Replaced samples are the ones with the largest curvature (this leaves the
/// least weight pulling back toward the old minimizer). A candidate only
/// counts when its averaged curvature stays at least `growth`, so every
/// returned value is attained by an admissible dataset and is a lower bound
/// on the modulus of continuity.
pub fn modulus_oracle(base: &QuadraticEnsemble, k: usize, radius: f64, curvature: f64, growth: f64) -> Result<f64> {
    if base.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: base.dim() });
    }
    if k >= base.len() {
        return Err(contract(format!("swap budget {k} must be below n = {}", base.len())));
    }
    let x0 = base.minimizer_on_interval(-radius, radius)?;
    let mut order: Vec<usize> = (0..base.len()).collect();
    let curv = |i: usize| base.terms()[i].hessian[(0, 0)];
    order.sort_by(|&a, &b| curv(b).total_cmp(&curv(a)).then(a.cmp(&b)));
    let mut best = 0.0f64;
    for j in 1..=k {
        for target in [radius, -radius] {
            let mut ens = base.clone();
            for &i in &order[..j] {
                ens = ens.with_replaced(i, QuadraticTerm::scalar(curvature, target))?;
            }
            if ens.growth_coefficient() < growth - 1e-12 {
                continue;
            }
            let shift = (ens.minimizer_on_interval(-radius, radius)? - x0).abs();
            best = best.max(shift);
        }
    }
    Ok(best)
}

/// Checks `|x⋆_S − x⋆_S'| ≤ 4kL/(λn)` for two datasets at Hamming distance
/// `k`. With `interval = Some((lo, hi))` minimizers are taken over that
/// interval (one-dimensional ensembles only).
pub fn stability_bound_check(
    base: &QuadraticEnsemble,
    swapped: &QuadraticEnsemble,
    k: usize,
    lipschitz: f64,
    growth: f64,
    interval: Option<(f64, f64)>,
) -> Result<OracleReport> {
    if base.len() != swapped.len() {
        return Err(contract("stability check needs datasets of equal size"));
    }
    let shift = match interval {
        Some((lo, hi)) => (base.minimizer_on_interval(lo, hi)? - swapped.minimizer_on_interval(lo, hi)?).abs(),
        None => (base.minimizer()? - swapped.minimizer()?).norm(),
    };
    let bound = 4.0 * k as f64 * lipschitz / (growth * base.len() as f64);
    Ok(OracleReport::new(
        "stability",
        shift,
        None,
        Some(bound),
        1e-12,
        format!("k = {k}, L = {lipschitz}, lambda = {growth}, n = {}", base.len()),
    ))
}

/// Removes the `r` samples that hurt the growth coefficient most (keeping
/// the `1/n` normalization) and compares against `λ − H r / n`.
///
/// The search is exhaustive for `r ≤ 3` and greedy beyond, which the report
/// notes in its detail string.
pub fn growth_closure_check(base: &QuadraticEnsemble, r: usize) -> Result<OracleReport> {
    let n = base.len();
    if r >= n {
        return Err(contract(format!("cannot remove {r} of {n} samples")));
    }
    let lambda = base.growth_coefficient();
    let h = base.smoothness();
    let total = base.hessian_sum();
    let nf = n as f64;
    let eig_without = |idx: &[usize]| {
        let removed = idx.iter().fold(DMatrix::zeros(base.dim(), base.dim()), |acc, &i| acc + &base.terms()[i].hessian);
        min_eigenvalue(&(&total - removed), nf)
    };
    let (measured, mode) = if r == 0 {
        (lambda, "none")
    } else if r <= 3 {
        let mut worst = f64::INFINITY;
        let mut idx = vec![0usize; r];
        for_each_combination(n, r, &mut idx, 0, 0, &mut |c| worst = worst.min(eig_without(c)));
        (worst, "exhaustive")
    } else {
        let mut chosen: Vec<usize> = Vec::with_capacity(r);
        for _ in 0..r {
            let next = (0..n)
                .filter(|i| !chosen.contains(i))
                .min_by(|&a, &b| {
                    let mut ca = chosen.clone();
                    ca.push(a);
                    let mut cb = chosen.clone();
                    cb.push(b);
                    eig_without(&ca).total_cmp(&eig_without(&cb))
                })
                .expect("r < n leaves candidates");
            chosen.push(next);
        }
        (eig_without(&chosen), "greedy")
    };
    Ok(OracleReport::new(
        "growth_closure",
        measured,
        Some(lambda - h * r as f64 / nf),
        None,
        1e-12,
        format!("{mode} search, r = {r}, n = {n}, lambda = {lambda}, H = {h}"),
    ))
}

fn for_each_combination(
    n: usize,
    r: usize,
    idx: &mut [usize],
    depth: usize,
    start: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == r {
        f(idx);
        return;
    }
    for i in start..n {
        idx[depth] = i;
        for_each_combination(n, r, idx, depth + 1, i + 1, f);
    }
}

/// A one-dimensional quadratic `(c/2)(x − x⋆)²` with declared growth and
/// smoothness constants `λ ≤ c ≤ H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchParams {
    pub minimizer: f64,
    pub curvature: f64,
    pub growth: f64,
    pub smoothness: f64,
}

impl PinchParams {
    fn validate(&self) -> Result<()> {
        if !(self.growth >= 0.0 && self.growth <= self.curvature && self.curvature <= self.smoothness) {
            return Err(contract(format!("need 0 <= lambda <= curvature <= H, got {self:?}")));
        }
        Ok(())
    }

    fn derivative(&self, x: f64) -> f64 {
        self.curvature * (x - self.minimizer)
    }
}

/// Checks the minimizer pinching bounds for `h + g` with `x_h⋆ ≤ x_g⋆`:
///
/// `(λ_g/2)(x_g⋆−x_h⋆)/(λ_g/2+H_h) ≤ x⋆ − x_h⋆ ≤ H_g(x_g⋆−x_h⋆)/(λ_h/2+H_g)`,
///
/// together with `(λ/2)·dist ≤ |q'| ≤ H·dist` for both functions at every
/// point of `probes`.
pub fn pinch_check(h: &PinchParams, g: &PinchParams, probes: &[f64]) -> Result<OracleReport> {
    h.validate()?;
    g.validate()?;
    if h.minimizer > g.minimizer {
        return Err(contract("pinch check needs x_h <= x_g"));
    }
    let tol = 1e-10;
    let gap = g.minimizer - h.minimizer;
    let star = (h.curvature * h.minimizer + g.curvature * g.minimizer) / (h.curvature + g.curvature);
    let measured = star - h.minimizer;
    let lower = 0.5 * g.growth * gap / (0.5 * g.growth + h.smoothness);
    let upper = g.smoothness * gap / (0.5 * h.growth + g.smoothness);
    let mut gradient_failures = 0;
    for &x in probes {
        for q in [h, g] {
            let slope = q.derivative(x).abs();
            let dist = (x - q.minimizer).abs();
            let scale = 1.0 + slope;
            if slope < 0.5 * q.growth * dist - tol * scale || slope > q.smoothness * dist + tol * scale {
                gradient_failures += 1;
            }
        }
    }
    let mut report = OracleReport::new(
        "pinch",
        measured,
        Some(lower),
        Some(upper),
        tol,
        format!("x* = {star}, gradient-bound failures = {gradient_failures} of {}", 2 * probes.len()),
    );
    report.passed &= gradient_failures == 0;
    Ok(report)
}
