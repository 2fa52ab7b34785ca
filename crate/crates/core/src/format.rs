//! Plain-text instance format for replaying experiments.
//!
//! One record per line, `#` starts a comment:
//!
//! ```text
//! family quadratic_anchor curvature=1
//! constants lipschitz=2 smoothness=1 growth=1 kappa=2 kappa_floor=2
//! domain radius=1 center=0,0
//! optimum point 0.5,0
//! population isotropic curvature=1 floor=0 center=0.5,0
//! anchor 0.5,0
//! labeled 1 0.6,0.8
//! ```
//!
//! `optimum` may also be `hyperplane offset=<b> normal=<a>`. Numbers use
//! Rust's shortest round-trip formatting, so a write/read cycle is exact.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::domain::{Ball, Dataset, Instance, LossConstants, Optimum, Point, PopulationModel, SamplePayload};
use crate::error::{Error, Result};
use crate::losses::{LossFamily, LossFamilyId};

fn join(p: &Point) -> String {
    p.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

pub fn to_text(inst: &Instance) -> String {
    let mut out = String::new();
    let family = match inst.family {
        LossFamily::QuadraticAnchor { curvature } | LossFamily::IndicatorQuadratic { curvature } => {
            format!("curvature={curvature}")
        }
        LossFamily::SmoothedHingeMargin { margin, width } => format!("margin={margin} width={width}"),
        LossFamily::CubicAnchor { coefficient } => format!("coefficient={coefficient}"),
    };
    let c = &inst.constants;
    // writing to a String cannot fail
    let _ = writeln!(out, "family {} {family}", inst.family.id().name());
    let _ = writeln!(
        out,
        "constants lipschitz={} smoothness={} growth={} kappa={} kappa_floor={}",
        c.lipschitz, c.smoothness, c.growth, c.growth_exponent, c.growth_floor
    );
    let _ = writeln!(out, "domain radius={} center={}", inst.domain.radius, join(&inst.domain.center));
    match &inst.optimum {
        Some(Optimum::Point(p)) => {
            let _ = writeln!(out, "optimum point {}", join(p));
        }
        Some(Optimum::Hyperplane { normal, offset }) => {
            let _ = writeln!(out, "optimum hyperplane offset={offset} normal={}", join(normal));
        }
        None => {}
    }
    if let Some(PopulationModel::IsotropicQuadratic { center, curvature, floor }) = &inst.population {
        let _ = writeln!(out, "population isotropic curvature={curvature} floor={floor} center={}", join(center));
    }
    for s in inst.dataset.samples() {
        let _ = match s {
            SamplePayload::Anchor(a) => writeln!(out, "anchor {}", join(a)),
            SamplePayload::Labeled { features, label } => writeln!(out, "labeled {label} {}", join(features)),
        };
    }
    out
}

struct Line<'a> {
    number: usize,
    words: Vec<&'a str>,
}

impl Line<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.number, message: message.into() }
    }

    fn keyed(&self, from: usize) -> Result<HashMap<&str, &str>> {
        self.words[from..]
            .iter()
            .map(|w| w.split_once('=').ok_or_else(|| self.err(format!("expected key=value, got '{w}'"))))
            .collect()
    }

    fn number(&self, map: &HashMap<&str, &str>, key: &str) -> Result<f64> {
        let raw = map.get(key).ok_or_else(|| self.err(format!("missing '{key}'")))?;
        raw.parse().map_err(|_| self.err(format!("bad number for '{key}': {raw}")))
    }

    fn point(&self, raw: &str) -> Result<Point> {
        raw.split(',')
            .map(|c| c.parse::<f64>().map_err(|_| self.err(format!("bad coordinate '{c}'"))))
            .collect::<Result<Vec<_>>>()
            .map(Point::new)
    }

    fn word(&self, i: usize) -> Result<&str> {
        self.words.get(i).copied().ok_or_else(|| self.err("line is too short"))
    }
}

pub fn from_text(text: &str) -> Result<Instance> {
    let mut family = None;
    let mut constants = None;
    let mut domain = None;
    let mut optimum = None;
    let mut population = None;
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let line = Line { number: i + 1, words: content.split_whitespace().collect() };
        match line.words[0] {
            "family" => {
                let id = LossFamilyId::from_name(line.word(1)?).ok_or_else(|| line.err("unknown family"))?;
                let kv = line.keyed(2)?;
                family = Some(match id {
                    LossFamilyId::QuadraticAnchor => {
                        LossFamily::QuadraticAnchor { curvature: line.number(&kv, "curvature")? }
                    }
                    LossFamilyId::IndicatorQuadratic => {
                        LossFamily::IndicatorQuadratic { curvature: line.number(&kv, "curvature")? }
                    }
                    LossFamilyId::SmoothedHingeMargin => LossFamily::SmoothedHingeMargin {
                        margin: line.number(&kv, "margin")?,
                        width: line.number(&kv, "width")?,
                    },
                    LossFamilyId::CubicAnchor => {
                        LossFamily::CubicAnchor { coefficient: line.number(&kv, "coefficient")? }
                    }
                });
            }
            "constants" => {
                let kv = line.keyed(1)?;
                constants = Some(
                    LossConstants::with_exponent(
                        line.number(&kv, "lipschitz")?,
                        line.number(&kv, "smoothness")?,
                        line.number(&kv, "growth")?,
                        line.number(&kv, "kappa")?,
                        line.number(&kv, "kappa_floor")?,
                    )
                    .map_err(|e| line.err(e.to_string()))?,
                );
            }
            "domain" => {
                let kv = line.keyed(1)?;
                let center = line.point(kv.get("center").ok_or_else(|| line.err("missing 'center'"))?)?;
                domain = Some(Ball::new(center, line.number(&kv, "radius")?).map_err(|e| line.err(e.to_string()))?);
            }
            "optimum" => {
                optimum = Some(match line.word(1)? {
                    "point" => Optimum::Point(line.point(line.word(2)?)?),
                    "hyperplane" => {
                        let kv = line.keyed(2)?;
                        let normal = line.point(kv.get("normal").ok_or_else(|| line.err("missing 'normal'"))?)?;
                        Optimum::Hyperplane { normal, offset: line.number(&kv, "offset")? }
                    }
                    other => return Err(line.err(format!("unknown optimum kind '{other}'"))),
                });
            }
            "population" => {
                if line.word(1)? != "isotropic" {
                    return Err(line.err("only 'isotropic' populations are supported"));
                }
                let kv = line.keyed(2)?;
                let center = line.point(kv.get("center").ok_or_else(|| line.err("missing 'center'"))?)?;
                population = Some(PopulationModel::IsotropicQuadratic {
                    center,
                    curvature: line.number(&kv, "curvature")?,
                    floor: line.number(&kv, "floor")?,
                });
            }
            "anchor" => samples.push(SamplePayload::Anchor(line.point(line.word(1)?)?)),
            "labeled" => {
                let label: f64 = line.word(1)?.parse().map_err(|_| line.err("bad label"))?;
                samples.push(SamplePayload::Labeled { features: line.point(line.word(2)?)?, label });
            }
            other => return Err(line.err(format!("unknown record '{other}'"))),
        }
    }
    let missing = |what: &str| Error::Parse { line: 0, message: format!("missing '{what}' record") };
    Instance::new(
        family.ok_or_else(|| missing("family"))?,
        Dataset::new(samples)?,
        domain.ok_or_else(|| missing("domain"))?,
        constants.ok_or_else(|| missing("constants"))?,
        optimum,
        population,
    )
}
