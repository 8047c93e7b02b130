//! Families of measures `μᵢ = ρᵢ·ν` on one atom set, their joint Brownian
//! fields, and the transition kernels between them.
//!
//! All fields share the basis of the reference measure ν: the element
//! `∫ f dW^{(μᵢ)}` has coefficients `f(x)·√ρᵢ(x)·√ν({x})`. Two pairs
//! `(f₁, μ₁)` and `(f₂, μ₂)` are identified when `f₁√ρ₁ = f₂√ρ₂` ν-a.e., and
//! equivalent pairs give the same Gaussian element.
//!
//! In this model each kernel is diagonal in the atom basis:
//! `P_{i→j}(x, B) = √(ρⱼ(x)/ρᵢ(x))·1_B(x)` for `x` in the support of μᵢ.
//! Outside that support the kernel is undefined and evaluation is an error.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianElement};
use crate::measure::{DensityVector, MeasurableSet, MeasureSpace};
use crate::numeric::{close, fsum};

/// Measures `μᵢ({x}) = ρᵢ(x)·ν({x})` sharing the reference ν.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFamily {
    reference: MeasureSpace,
    densities: Vec<Vec<f64>>,
}

impl MeasureFamily {
    pub fn new(reference: MeasureSpace, densities: Vec<Vec<f64>>) -> Result<Self> {
        for (k, rho) in densities.iter().enumerate() {
            if rho.len() != reference.len() {
                return Err(Error::DimensionMismatch {
                    expected: reference.len(),
                    actual: rho.len(),
                });
            }
            if let Some(x) = rho.iter().position(|r| !r.is_finite() || *r < 0.0) {
                return Err(Error::Validation(format!(
                    "density {k} is {} at atom {x}; must be finite and nonnegative",
                    rho[x]
                )));
            }
        }
        Ok(Self {
            reference,
            densities,
        })
    }

    pub fn reference(&self) -> &MeasureSpace {
        &self.reference
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn atoms(&self) -> usize {
        self.reference.len()
    }

    pub fn density(&self, i: usize) -> Result<&[f64]> {
        self.densities
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.densities.len(),
            })
    }

    /// μᵢ({x}).
    pub fn atom_mass(&self, i: usize, x: usize) -> Result<f64> {
        Ok(self.density(i)?[x] * self.reference.weight(x))
    }

    /// μᵢ as a standalone measure space on the same atoms.
    pub fn measure_space(&self, i: usize) -> Result<MeasureSpace> {
        let rho = self.density(i)?;
        MeasureSpace::new(
            self.reference
                .labels()
                .iter()
                .zip(self.reference.weights())
                .zip(rho)
                .map(|((l, w), r)| (l.clone(), r * w)),
        )
    }

    /// Atoms with μᵢ({x}) > 0.
    pub fn support(&self, i: usize) -> Result<MeasurableSet> {
        let rho = self.density(i)?;
        Ok(MeasurableSet::from_predicate(self.atoms(), |x| {
            rho[x] * self.reference.weight(x) > 0.0
        }))
    }

    /// μᵢ(A).
    pub fn measure_of(&self, i: usize, set: &MeasurableSet) -> Result<f64> {
        self.reference.check_set(set)?;
        let rho = self.density(i)?;
        Ok(fsum(set.iter().map(|x| rho[x] * self.reference.weight(x))))
    }
}

/// The class of `(f, μᵢ)` in the universal Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct UhsClass {
    pub f: DensityVector,
    pub measure: usize,
}

impl UhsClass {
    pub fn new(f: DensityVector, measure: usize) -> Self {
        Self { f, measure }
    }

    /// `f·√ρᵢ` over ν.
    pub fn canonical(&self, family: &MeasureFamily) -> Result<Vec<Complex64>> {
        self.f.check_len(family.reference())?;
        let rho = family.density(self.measure)?;
        Ok(self
            .f
            .values()
            .iter()
            .zip(rho)
            .map(|(v, r)| v * r.sqrt())
            .collect())
    }

    /// ‖f√μ‖² = ∫ |f|² dμᵢ.
    pub fn norm_sq(&self, family: &MeasureFamily) -> Result<f64> {
        self.f.norm_sq(&family.measure_space(self.measure)?)
    }
}

/// Whether two classes have canonical representatives within `tol` at
/// every atom of positive ν-weight.
pub fn uhs_equivalent(family: &MeasureFamily, a: &UhsClass, b: &UhsClass, tol: f64) -> Result<bool> {
    let ra = a.canonical(family)?;
    let rb = b.canonical(family)?;
    Ok((0..family.atoms())
        .filter(|&x| !family.reference().is_null(x))
        .all(|x| (ra[x] - rb[x]).norm() <= tol))
}

/// `∫ f dW^{(μᵢ)}` in the shared ν basis: V_ν applied to `f·√ρᵢ`.
pub fn joint_ito(family: &MeasureFamily, i: usize, f: &DensityVector) -> Result<GaussianElement> {
    let rep = UhsClass::new(f.clone(), i).canonical(family)?;
    gaussian::ito_integral(family.reference(), &DensityVector::new(rep)?)
}

/// E[W_A^{(μᵢ)}·W_B^{(μⱼ)}] = Σ_{x∈A∩B} √(ρᵢ(x)ρⱼ(x))·ν({x}).
pub fn cross_cov(
    family: &MeasureFamily,
    i: usize,
    j: usize,
    a: &MeasurableSet,
    b: &MeasurableSet,
) -> Result<f64> {
    let nu = family.reference();
    nu.check_set(a)?;
    nu.check_set(b)?;
    let (ri, rj) = (family.density(i)?, family.density(j)?);
    Ok(fsum(
        a.intersection(b)
            .iter()
            .map(|x| (ri[x] * rj[x]).sqrt() * nu.weight(x)),
    ))
}

/// Whether μᵢ and μⱼ have disjoint supports.
pub fn mutually_singular(family: &MeasureFamily, i: usize, j: usize) -> Result<bool> {
    Ok(family.support(i)?.is_disjoint(&family.support(j)?))
}

/// Whether the two fields are uncorrelated (hence, being jointly Gaussian,
/// independent) on every pair drawn from `sets`.
pub fn independence_check(
    family: &MeasureFamily,
    i: usize,
    j: usize,
    sets: &[MeasurableSet],
    tol: f64,
) -> Result<bool> {
    for a in sets {
        for b in sets {
            if cross_cov(family, i, j, a, b)?.abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_in_support(family: &MeasureFamily, i: usize, x: usize) -> Result<()> {
    if x >= family.atoms() {
        return Err(Error::IndexOutOfRange {
            index: x,
            len: family.atoms(),
        });
    }
    if family.atom_mass(i, x)? > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { atom: x, measure: i })
    }
}

/// √(ρⱼ(x)/ρᵢ(x)) at a point of supp μᵢ.
fn kernel_weight(family: &MeasureFamily, i: usize, j: usize, x: usize) -> Result<f64> {
    check_in_support(family, i, x)?;
    Ok((family.density(j)?[x] / family.density(i)?[x]).sqrt())
}

/// P_{i→j}(x, B), defined for `x` in the support of μᵢ.
pub fn transition_eval(
    family: &MeasureFamily,
    i: usize,
    j: usize,
    x: usize,
    b: &MeasurableSet,
) -> Result<f64> {
    family.reference().check_set(b)?;
    let k = kernel_weight(family, i, j, x)?;
    Ok(if b.contains(x) { k } else { 0.0 })
}

/// (V_i* V_j f)(x) = ∫ P_{i→j}(x, dy) f(y) on supp μᵢ, zero elsewhere.
pub fn apply_transition(
    family: &MeasureFamily,
    i: usize,
    j: usize,
    f: &DensityVector,
) -> Result<DensityVector> {
    f.check_len(family.reference())?;
    let support = family.support(i)?;
    let values = (0..family.atoms())
        .map(|x| {
            if support.contains(x) {
                Ok(f[x] * kernel_weight(family, i, j, x)?)
            } else {
                Ok(Complex64::new(0.0, 0.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    DensityVector::new(values)
}

/// Three routes to the cross covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reversibility {
    /// ∫_A P(x, B) μᵢ(dx).
    pub lhs: f64,
    /// ∫_B Q(y, A) μⱼ(dy).
    pub mid: f64,
    /// E[W_A^{(μᵢ)}·W_B^{(μⱼ)}].
    pub rhs: f64,
    pub pass: bool,
}

pub fn reversibility_check(
    family: &MeasureFamily,
    i: usize,
    j: usize,
    a: &MeasurableSet,
    b: &MeasurableSet,
    tol: f64,
) -> Result<Reversibility> {
    let integrate = |from: usize, to: usize, over: &MeasurableSet, target: &MeasurableSet| {
        let support = family.support(from)?;
        let terms = over
            .intersection(&support)
            .iter()
            .map(|x| Ok(transition_eval(family, from, to, x, target)? * family.atom_mass(from, x)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok::<f64, Error>(fsum(terms))
    };
    let lhs = integrate(i, j, a, b)?;
    let mid = integrate(j, i, b, a)?;
    let rhs = cross_cov(family, i, j, a, b)?;
    let agree = |x: f64, y: f64| close(x, y, tol, f64::MIN_POSITIVE);
    Ok(Reversibility {
        lhs,
        mid,
        rhs,
        pass: agree(lhs, mid) && agree(mid, rhs) && agree(lhs, rhs),
    })
}

/// Whether the transition μᵢ → μⱼ is anticipating: the field of μⱼ is
/// measurable with respect to that of μᵢ, i.e. supp μⱼ ⊆ supp μᵢ.
pub fn anticipating_check(family: &MeasureFamily, i: usize, j: usize) -> Result<bool> {
    Ok(family.support(j)?.is_subset(&family.support(i)?))
}

/// Whether `Q_j = Q_i Q_j`, evaluated by applying the projections of the
/// Gaussian model to every basis variable.
pub fn projection_identity(family: &MeasureFamily, i: usize, j: usize) -> Result<bool> {
    let (si, sj) = (family.measure_space(i)?, family.measure_space(j)?);
    let n = family.atoms();
    for x in 0..n {
        let e = GaussianElement::basis(n, x);
        let qj = gaussian::q_mu_project(&sj, &e)?;
        let qiqj = gaussian::q_mu_project(&si, &qj)?;
        if qj != qiqj {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of [`chain_rule_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRule {
    pub holds: bool,
    /// First failing `(x, B)`.
    pub witness: Option<(usize, MeasurableSet)>,
}

/// Compares `P_{i→k}(x, B)` with `∫ P_{i→j}(x, dy)·P_{j→k}(y, B)` for every
/// `x` in supp μᵢ and every singleton `B`; the right side is evaluated as
/// the composite operator `(V_i*V_j)(V_j*V_k)` applied to `1_B`.
pub fn chain_rule_check(
    family: &MeasureFamily,
    i: usize,
    j: usize,
    k: usize,
    tol: f64,
) -> Result<ChainRule> {
    let nu = family.reference();
    let support = family.support(i)?;
    for y in 0..family.atoms() {
        let b = nu.singleton(y);
        let inner = apply_transition(family, j, k, &DensityVector::indicator(&b))?;
        let composite = apply_transition(family, i, j, &inner)?;
        for x in support.iter() {
            let direct = transition_eval(family, i, k, x, &b)?;
            let chained = composite[x].re;
            if !close(direct, chained, tol, 1.0) {
                return Ok(ChainRule {
                    holds: false,
                    witness: Some((x, b)),
                });
            }
        }
    }
    Ok(ChainRule {
        holds: true,
        witness: None,
    })
}

/// Exact support condition for the chain rule through μⱼ starting at μᵢ:
/// supp μᵢ ∩ supp μₖ ⊆ supp μⱼ. This depends on μᵢ, whereas
/// [`anticipating_check`]`(j, k)` does not; the latter implies the former.
pub fn chain_rule_support_condition(family: &MeasureFamily, i: usize, j: usize, k: usize) -> Result<bool> {
    Ok(family
        .support(i)?
        .intersection(&family.support(k)?)
        .is_subset(&family.support(j)?))
}
