//! Named densities and midpoint-rule discretization of an interval.

use std::collections::BTreeMap;

use super::MeasureSpace;
use crate::error::{Error, Result};

/// A real function of one variable, used either as a measure density on a
/// grid or as a set-function density evaluated at atom coordinates.
pub trait Density: Send + Sync {
    fn eval(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Send + Sync> Density for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Named parameters of a density.
pub type DensityParams = BTreeMap<String, f64>;

type Builder = fn(&DensityParams) -> Result<Box<dyn Density>>;

/// A registered density family.
pub struct DensityKind {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub summary: &'static str,
    build: Builder,
}

impl DensityKind {
    pub fn build(&self, params: &DensityParams) -> Result<Box<dyn Density>> {
        for key in params.keys() {
            if !self.params.contains(&key.as_str()) {
                return Err(Error::Validation(format!(
                    "density `{}` has no parameter `{key}`",
                    self.name
                )));
            }
        }
        (self.build)(params)
    }
}

fn param(params: &DensityParams, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key).copied().or(default) {
        Some(v) if v.is_finite() => Ok(v),
        Some(v) => Err(Error::Validation(format!("parameter `{key}` is not finite ({v})"))),
        None => Err(Error::Validation(format!("missing density parameter `{key}`"))),
    }
}

static DENSITIES: &[DensityKind] = &[
    DensityKind {
        name: "constant",
        params: &["value"],
        summary: "value",
        build: |p| {
            let v = param(p, "value", Some(1.0))?;
            Ok(Box::new(move |_x: f64| v))
        },
    },
    DensityKind {
        name: "linear",
        params: &["intercept", "slope"],
        summary: "intercept + slope·x",
        build: |p| {
            let a = param(p, "intercept", Some(0.0))?;
            let b = param(p, "slope", Some(1.0))?;
            Ok(Box::new(move |x: f64| a + b * x))
        },
    },
    DensityKind {
        name: "power",
        params: &["scale", "exponent"],
        summary: "scale·|x|^exponent",
        build: |p| {
            let c = param(p, "scale", Some(1.0))?;
            let k = param(p, "exponent", None)?;
            Ok(Box::new(move |x: f64| c * x.abs().powf(k)))
        },
    },
    DensityKind {
        name: "reciprocal",
        params: &["scale", "shift"],
        summary: "scale/(shift + |x|), square integrable but not integrable on the line",
        build: |p| {
            let c = param(p, "scale", Some(1.0))?;
            let s = param(p, "shift", Some(1.0))?;
            if s <= 0.0 {
                return Err(Error::Validation("reciprocal density needs shift > 0".into()));
            }
            Ok(Box::new(move |x: f64| c / (s + x.abs())))
        },
    },
    DensityKind {
        name: "gaussian",
        params: &["mean", "std"],
        summary: "normal probability density",
        build: |p| {
            let m = param(p, "mean", Some(0.0))?;
            let s = param(p, "std", Some(1.0))?;
            if s <= 0.0 {
                return Err(Error::Validation("gaussian density needs std > 0".into()));
            }
            let norm = 1.0 / (s * (2.0 * std::f64::consts::PI).sqrt());
            Ok(Box::new(move |x: f64| norm * (-0.5 * ((x - m) / s).powi(2)).exp()))
        },
    },
    DensityKind {
        name: "indicator",
        params: &["lo", "hi", "value"],
        summary: "value on [lo, hi), 0 elsewhere",
        build: |p| {
            let lo = param(p, "lo", None)?;
            let hi = param(p, "hi", None)?;
            let v = param(p, "value", Some(1.0))?;
            Ok(Box::new(move |x: f64| if x >= lo && x < hi { v } else { 0.0 }))
        },
    },
    DensityKind {
        name: "step",
        params: &["at", "below", "above"],
        summary: "below for x < at, above otherwise",
        build: |p| {
            let at = param(p, "at", Some(0.0))?;
            let below = param(p, "below", Some(0.0))?;
            let above = param(p, "above", Some(1.0))?;
            Ok(Box::new(move |x: f64| if x < at { below } else { above }))
        },
    },
];

/// All registered density families, in registration order.
pub fn densities() -> &'static [DensityKind] {
    DENSITIES
}

pub fn density_kind(name: &str) -> Option<&'static DensityKind> {
    DENSITIES.iter().find(|d| d.name == name)
}

/// Builds a registered density by name.
pub fn build_density(name: &str, params: &DensityParams) -> Result<Box<dyn Density>> {
    density_kind(name)
        .ok_or_else(|| Error::Validation(format!("unknown density `{name}`")))?
        .build(params)
}

/// Discretizes `[lo, hi)` into `cells` equal cells by the midpoint rule:
/// cell `k` has coordinate `lo + (k + 1/2)·width` and weight
/// `density(midpoint)·width`.
pub fn grid_space(lo: f64, hi: f64, cells: usize, density: &dyn Density) -> Result<MeasureSpace> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Validation(format!("grid interval ({lo}, {hi}) is empty")));
    }
    if cells == 0 {
        return Err(Error::Validation("grid needs at least one cell".into()));
    }
    let width = (hi - lo) / cells as f64;
    let mids: Vec<f64> = (0..cells).map(|k| lo + (k as f64 + 0.5) * width).collect();
    let mut entries = Vec::with_capacity(cells);
    for (k, &x) in mids.iter().enumerate() {
        let d = density.eval(x);
        if !d.is_finite() || d < 0.0 {
            return Err(Error::Validation(format!(
                "density is {d} at x = {x}; measure densities must be finite and nonnegative"
            )));
        }
        entries.push((format!("cell{k}"), d * width));
    }
    MeasureSpace::new(entries)?.with_coords(mids)
}
