//! The Krein-Feller derivative ∇_μ, its adjoint, and the RKHS inner product.
//!
//! ∇_μ maps a member `M` of the RKHS with kernel `μ(A ∩ B)` to the density
//! `h` with `M(A) = ∫_A h dμ`. It is unitary onto L²(μ); the adjoint
//! integrates a density back into a set function.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{DensityVector, MeasurableSet, MeasureSpace};
use crate::rkhs::{membership_test, AdditiveSetFunction, Mode};

/// A certified member of the RKHS: its density (zero on null atoms) and
/// its squared norm.
#[derive(Debug, Clone, PartialEq)]
pub struct HmuElement {
    density: DensityVector,
    norm_sq: f64,
}

impl HmuElement {
    /// Member with density `g`, normalized to zero on null atoms.
    pub fn from_density(space: &MeasureSpace, g: &DensityVector) -> Result<Self> {
        g.check_len(space)?;
        let density = g.canonical(space);
        let norm_sq = density.norm_sq(space)?;
        Ok(Self { density, norm_sq })
    }

    /// Certifies an arbitrary additive set function through the p = 2
    /// membership test.
    pub fn certify(space: &MeasureSpace, m: &AdditiveSetFunction) -> Result<Self> {
        let report = membership_test(space, m, 2.0, Mode::Atomic)?;
        match report.recovered_density {
            Some(h) if report.member => Self::from_density(space, &h),
            _ => Err(Error::NotMember {
                witness: report.witness,
            }),
        }
    }

    pub fn density(&self) -> &DensityVector {
        &self.density
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    /// M(A) = Σ_{x∈A} h(x)·μ({x}).
    pub fn value(&self, space: &MeasureSpace, set: &MeasurableSet) -> Result<Complex64> {
        self.density.integrate(space, set)
    }

    pub fn to_set_function(&self) -> AdditiveSetFunction {
        AdditiveSetFunction::Density(self.density.clone())
    }
}

/// ∇_μ of an element already known to be a member.
pub fn nabla(element: &HmuElement) -> DensityVector {
    element.density.clone()
}

/// ∇_μ of an additive set function; fails with the violating parts when
/// the function is not a member.
pub fn nabla_of(space: &MeasureSpace, m: &AdditiveSetFunction) -> Result<DensityVector> {
    Ok(HmuElement::certify(space, m)?.density)
}

/// ∇_μ* g: the set function `A ↦ ∫_A g dμ`.
pub fn nabla_adjoint(space: &MeasureSpace, g: &DensityVector) -> Result<HmuElement> {
    HmuElement::from_density(space, g)
}

/// ⟨M, N⟩ = ⟨∇M, ∇N⟩_μ.
pub fn rkhs_inner(space: &MeasureSpace, m: &HmuElement, n: &HmuElement) -> Result<Complex64> {
    m.density.inner(&n.density, space)
}
