use num_complex::Complex64;

use super::membership::check_exponent;
use crate::error::{Error, Result};
use crate::numeric::{abs_pow, exact_diff, fsum};

/// Difference-quotient test for `f(x) = ∫₀ˣ g` with `g ∈ L^p` on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevReport {
    /// Σ |f(xₙ₊₁) − f(xₙ)|^p / |xₙ₊₁ − xₙ|^(p−1).
    pub criterion_value: f64,
    /// Δf/Δx on each interval.
    pub density_estimate: Vec<Complex64>,
}

/// Evaluates the L^p difference criterion on the sample points `xs`.
///
/// Each term is computed as `|Δf/Δx|^p · Δx`, where `Δx` enters the sum as
/// its exact two-term expansion; for `f(x) = x` every quotient is exactly 1
/// and the criterion is exactly `x_last − x_first`.
pub fn sobolev_membership(xs: &[f64], fs: &[Complex64], p: f64) -> Result<SobolevReport> {
    check_exponent(p)?;
    if xs.len() != fs.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: fs.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Validation("need at least two sample points".into()));
    }
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(Error::Validation(format!("sample point {i} is not finite")));
    }
    if let Some(i) = fs.iter().position(|f| !f.re.is_finite() || !f.im.is_finite()) {
        return Err(Error::Validation(format!("sample value {i} is not finite")));
    }
    if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Validation(format!(
            "sample points must be strictly increasing (x[{i}] = {} ≥ x[{}] = {})",
            xs[i],
            i + 1,
            xs[i + 1]
        )));
    }

    let mut terms = Vec::with_capacity(2 * (xs.len() - 1));
    let mut density_estimate = Vec::with_capacity(xs.len() - 1);
    for k in 0..xs.len() - 1 {
        let (dx, dx_err) = exact_diff(xs[k], xs[k + 1]);
        let q = (fs[k + 1] - fs[k]) / dx;
        let weight = abs_pow(q.norm(), p);
        terms.push(weight * dx);
        terms.push(weight * dx_err);
        density_estimate.push(q);
    }
    Ok(SobolevReport {
        criterion_value: fsum(terms),
        density_estimate,
    })
}
