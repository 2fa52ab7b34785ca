//! Per-sample loss families, their gradients, and exact Lipschitzian
//! extensions `F_L(x) = inf_y F(y) + L‖x − y‖`.
//!
//! Every family here is either radial in `‖x − s‖` or a function of a single
//! linear form `⟨a, x⟩`, so the infimal convolution reduces to a 1-D problem
//! with a closed-form minimizer.

use crate::domain::{Ball, LossConstants, Point, SamplePayload};
use crate::error::{check_dim, contract, Result};

/// A loss family together with its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossFamily {
    /// `F(x; s) = (H/2)‖x − s‖²`.
    QuadraticAnchor { curvature: f64 },
    /// `F(x; s) = (H/2)‖x − s‖²` for `s ≠ 0`, identically zero for `s = 0`.
    IndicatorQuadratic { curvature: f64 },
    /// `F(x; (a, y)) = ψ(γ − y⟨a, x⟩)` with the Huber-type hinge
    /// `ψ(u) = 0` (u ≤ 0), `u²/(2τ)` (0 < u ≤ τ), `u − τ/2` (u > τ).
    SmoothedHingeMargin { margin: f64, width: f64 },
    /// `F(x; s) = (c/3)‖x − s‖³`; κ = 3 growth with coefficient `c`.
    CubicAnchor { coefficient: f64 },
}

/// Tag identifying a family without its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossFamilyId {
    QuadraticAnchor,
    IndicatorQuadratic,
    SmoothedHingeMargin,
    CubicAnchor,
}

impl LossFamilyId {
    pub fn name(self) -> &'static str {
        match self {
            LossFamilyId::QuadraticAnchor => "quadratic_anchor",
            LossFamilyId::IndicatorQuadratic => "indicator_quadratic",
            LossFamilyId::SmoothedHingeMargin => "smoothed_hinge_margin",
            LossFamilyId::CubicAnchor => "cubic_anchor",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            LossFamilyId::QuadraticAnchor,
            LossFamilyId::IndicatorQuadratic,
            LossFamilyId::SmoothedHingeMargin,
            LossFamilyId::CubicAnchor,
        ]
        .into_iter()
        .find(|id| id.name() == name)
    }
}

/// A single Lipschitzian-extension query.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionQuery {
    pub x: Point,
    pub payload: SamplePayload,
    pub clip: f64,
}

impl LossFamily {
    /// Smoothed hinge with the default width `τ = γ/2`.
    pub fn hinge(margin: f64) -> Self {
        LossFamily::SmoothedHingeMargin { margin, width: margin / 2.0 }
    }

    pub fn id(&self) -> LossFamilyId {
        match self {
            LossFamily::QuadraticAnchor { .. } => LossFamilyId::QuadraticAnchor,
            LossFamily::IndicatorQuadratic { .. } => LossFamilyId::IndicatorQuadratic,
            LossFamily::SmoothedHingeMargin { .. } => LossFamilyId::SmoothedHingeMargin,
            LossFamily::CubicAnchor { .. } => LossFamilyId::CubicAnchor,
        }
    }

    /// True for the families whose per-sample Hessian is a multiple of the identity.
    pub fn is_isotropic_quadratic(&self) -> bool {
        matches!(self, LossFamily::QuadraticAnchor { .. } | LossFamily::IndicatorQuadratic { .. })
    }

    /// Rejects payloads of the wrong kind, non-finite data, invalid labels,
    /// and zero feature vectors (whose extension minimizer would be at
    /// infinite distance).
    pub fn validate_payload(&self, payload: &SamplePayload) -> Result<()> {
        let params_ok = match *self {
            LossFamily::QuadraticAnchor { curvature } | LossFamily::IndicatorQuadratic { curvature } => {
                curvature > 0.0 && curvature.is_finite()
            }
            LossFamily::SmoothedHingeMargin { margin, width } => {
                margin > 0.0 && width > 0.0 && margin.is_finite() && width.is_finite()
            }
            LossFamily::CubicAnchor { coefficient } => coefficient > 0.0 && coefficient.is_finite(),
        };
        if !params_ok {
            return Err(contract(format!("invalid family parameters: {self:?}")));
        }
        match (self, payload) {
            (LossFamily::SmoothedHingeMargin { .. }, SamplePayload::Labeled { features, label }) => {
                if !features.is_finite() || features.norm() == 0.0 {
                    return Err(contract("margin features must be finite and nonzero"));
                }
                if *label != 1.0 && *label != -1.0 {
                    return Err(contract(format!("label must be +1 or -1, got {label}")));
                }
                Ok(())
            }
            (LossFamily::SmoothedHingeMargin { .. }, SamplePayload::Anchor(_)) => {
                Err(contract("margin family needs labeled payloads"))
            }
            (_, SamplePayload::Anchor(s)) => {
                if s.is_finite() {
                    Ok(())
                } else {
                    Err(contract("anchor must be finite"))
                }
            }
            (_, SamplePayload::Labeled { .. }) => Err(contract("radial families need anchor payloads")),
        }
    }

    /// Per-sample smoothness constant.
    pub fn sample_smoothness(&self, payload: &SamplePayload) -> f64 {
        match (*self, payload) {
            (LossFamily::SmoothedHingeMargin { width, .. }, SamplePayload::Labeled { features, .. }) => {
                features.dot(features) / width
            }
            (LossFamily::QuadraticAnchor { curvature }, _) | (LossFamily::IndicatorQuadratic { curvature }, _) => {
                curvature
            }
            // not globally smooth; callers use the domain-restricted bound
            (LossFamily::CubicAnchor { .. }, _) => f64::INFINITY,
            _ => f64::NAN,
        }
    }

    pub fn value(&self, x: &Point, payload: &SamplePayload) -> f64 {
        match (*self, payload) {
            (LossFamily::SmoothedHingeMargin { margin, width }, SamplePayload::Labeled { features, label }) => {
                hinge_psi(margin - label * features.dot(x), width)
            }
            (_, SamplePayload::Anchor(s)) => match self.radial(s) {
                Some(r) => r.phi(x.distance(s)),
                None => 0.0,
            },
            _ => f64::NAN,
        }
    }

    pub fn gradient(&self, x: &Point, payload: &SamplePayload) -> Point {
        match (*self, payload) {
            (LossFamily::SmoothedHingeMargin { margin, width }, SamplePayload::Labeled { features, label }) => {
                let slope = hinge_slope(margin - label * features.dot(x), width);
                features.scale(-slope * label)
            }
            (_, SamplePayload::Anchor(s)) => match self.radial(s) {
                Some(r) => {
                    let offset = x.sub(s);
                    let dist = offset.norm();
                    if dist == 0.0 {
                        Point::zeros(x.dim())
                    } else {
                        offset.scale(r.dphi(dist) / dist)
                    }
                }
                None => Point::zeros(x.dim()),
            },
            _ => Point::zeros(x.dim()),
        }
    }

    /// Closed-form `y(x) = argmin_y F(y; s) + L‖x − y‖`.
    pub fn ext_argmin(&self, x: &Point, payload: &SamplePayload, clip: f64) -> Point {
        match (*self, payload) {
            (LossFamily::SmoothedHingeMargin { margin, width }, SamplePayload::Labeled { features, label }) => {
                let a2 = features.dot(features);
                let slope_cap = clip / a2.sqrt();
                let u = margin - label * features.dot(x);
                if hinge_slope(u, width) <= slope_cap {
                    return x.clone();
                }
                // u decreases by ‖a‖² per unit step along y·a
                let u0 = slope_cap * width;
                let mut y = x.clone();
                y.axpy(label * (u - u0) / a2, features);
                y
            }
            (_, SamplePayload::Anchor(s)) => match self.radial(s) {
                Some(r) => {
                    let offset = x.sub(s);
                    let dist = offset.norm();
                    if r.dphi(dist) <= clip {
                        return x.clone();
                    }
                    let mut y = s.clone();
                    y.axpy(r.inverse_slope(clip) / dist, &offset);
                    y
                }
                None => x.clone(),
            },
            _ => x.clone(),
        }
    }

    pub fn ext_value(&self, x: &Point, payload: &SamplePayload, clip: f64) -> f64 {
        match (*self, payload) {
            (LossFamily::SmoothedHingeMargin { margin, width }, SamplePayload::Labeled { features, label }) => {
                let a_norm = features.norm();
                let slope_cap = clip / a_norm;
                let u = margin - label * features.dot(x);
                if hinge_slope(u, width) <= slope_cap {
                    hinge_psi(u, width)
                } else {
                    let u0 = slope_cap * width;
                    hinge_psi(u0, width) + slope_cap * (u - u0)
                }
            }
            (_, SamplePayload::Anchor(s)) => match self.radial(s) {
                Some(r) => {
                    let dist = x.distance(s);
                    if r.dphi(dist) <= clip {
                        r.phi(dist)
                    } else {
                        let r0 = r.inverse_slope(clip);
                        r.phi(r0) + clip * (dist - r0)
                    }
                }
                None => 0.0,
            },
            _ => f64::NAN,
        }
    }

    /// Gradient of the extension. Equals [`LossFamily::gradient`] whenever
    /// its norm is at most `clip` (ties go to the raw gradient).
    pub fn ext_gradient(&self, x: &Point, payload: &SamplePayload, clip: f64) -> Point {
        let g = self.gradient(x, payload);
        let norm = g.norm();
        if norm <= clip {
            return g;
        }
        let y = self.ext_argmin(x, payload, clip);
        let offset = x.sub(&y);
        let dist = offset.norm();
        if dist > 0.0 {
            offset.scale(clip / dist)
        } else {
            // y(x) = x can only happen through rounding right at the boundary
            g.scale(clip / norm)
        }
    }

    /// `(Σ curvature, curvature-weighted anchor mean)` over a slice of
    /// isotropic quadratic samples; `None` for other families.
    pub fn isotropic_summary(&self, samples: &[SamplePayload]) -> Option<(f64, Point)> {
        let curvature = match *self {
            LossFamily::QuadraticAnchor { curvature } | LossFamily::IndicatorQuadratic { curvature } => curvature,
            _ => return None,
        };
        let dim = samples.first()?.dim();
        let mut sum = Point::zeros(dim);
        let mut count = 0usize;
        for payload in samples {
            if let SamplePayload::Anchor(s) = payload {
                if self.radial(s).is_some() {
                    sum.axpy(1.0, s);
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Some((0.0, Point::zeros(dim)));
        }
        Some((curvature * count as f64, sum.scale(1.0 / count as f64)))
    }

    fn radial(&self, s: &Point) -> Option<Radial> {
        match *self {
            LossFamily::QuadraticAnchor { curvature } => Some(Radial::Quadratic(curvature)),
            LossFamily::IndicatorQuadratic { curvature } => {
                if s.coords().iter().all(|&c| c == 0.0) {
                    None
                } else {
                    Some(Radial::Quadratic(curvature))
                }
            }
            LossFamily::CubicAnchor { coefficient } => Some(Radial::Cubic(coefficient)),
            LossFamily::SmoothedHingeMargin { .. } => None,
        }
    }
}

/// Radial profile `φ(r)` of an anchor family.
#[derive(Debug, Clone, Copy)]
enum Radial {
    Quadratic(f64),
    Cubic(f64),
}

impl Radial {
    fn phi(self, r: f64) -> f64 {
        match self {
            Radial::Quadratic(h) => 0.5 * h * r * r,
            Radial::Cubic(c) => c / 3.0 * r * r * r,
        }
    }

    fn dphi(self, r: f64) -> f64 {
        match self {
            Radial::Quadratic(h) => h * r,
            Radial::Cubic(c) => c * r * r,
        }
    }

    /// Radius at which `φ'` reaches `slope`.
    fn inverse_slope(self, slope: f64) -> f64 {
        match self {
            Radial::Quadratic(h) => slope / h,
            Radial::Cubic(c) => (slope / c).sqrt(),
        }
    }
}

fn hinge_psi(u: f64, width: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u <= width {
        u * u / (2.0 * width)
    } else {
        u - width / 2.0
    }
}

fn hinge_slope(u: f64, width: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u <= width {
        u / width
    } else {
        1.0
    }
}

fn check_payload(family: &LossFamily, x: &Point, payload: &SamplePayload) -> Result<()> {
    check_dim(payload.dim(), x.dim())?;
    family.validate_payload(payload)
}

pub fn loss_value(family: &LossFamily, x: &Point, payload: &SamplePayload) -> Result<f64> {
    check_payload(family, x, payload)?;
    Ok(family.value(x, payload))
}

pub fn loss_gradient(family: &LossFamily, x: &Point, payload: &SamplePayload) -> Result<Point> {
    check_payload(family, x, payload)?;
    Ok(family.gradient(x, payload))
}

pub fn lip_ext_value(family: &LossFamily, q: &ExtensionQuery) -> Result<f64> {
    check_payload(family, &q.x, &q.payload)?;
    check_clip(q.clip)?;
    Ok(family.ext_value(&q.x, &q.payload, q.clip))
}

pub fn lip_ext_gradient(family: &LossFamily, q: &ExtensionQuery) -> Result<Point> {
    check_payload(family, &q.x, &q.payload)?;
    check_clip(q.clip)?;
    Ok(family.ext_gradient(&q.x, &q.payload, q.clip))
}

pub fn lip_ext_argmin(family: &LossFamily, q: &ExtensionQuery) -> Result<Point> {
    check_payload(family, &q.x, &q.payload)?;
    check_clip(q.clip)?;
    Ok(family.ext_argmin(&q.x, &q.payload, q.clip))
}

fn check_clip(clip: f64) -> Result<()> {
    if clip > 0.0 {
        Ok(())
    } else {
        Err(contract(format!("clip level must be positive, got {clip}")))
    }
}

/// Lipschitz bound valid on `ball`: `H·diam(ball)` for interpolating
/// instances (gradients vanish at a common minimizer inside the ball), the
/// global constant otherwise.
pub fn effective_lipschitz(constants: &LossConstants, ball: &Ball, interpolating: bool) -> f64 {
    if interpolating {
        constants.smoothness * ball.diameter()
    } else {
        constants.lipschitz
    }
}
