//! The μ-Brownian field as an exact linear-Gaussian model.
//!
//! Every random variable here lives in the linear span of independent
//! standard normals `ξ_x`, one per atom, and is stored by its coefficients.
//! `W_A = Σ_{x∈A} √μ({x})·ξ_x`, so `E[W_A·W_B] = μ(A ∩ B)`. The sigma
//! algebra generated by the field is modelled by the span of the `ξ_x` on
//! non-null atoms, and conditional expectation onto it by orthogonal
//! projection.
//!
//! Sampling follows a fixed contract: replica `r` of seed `s` draws from a
//! ChaCha8 generator keyed by `ChaCha8Rng::seed_from_u64(s)` on stream `r`,
//! producing one standard normal (ziggurat, `rand_distr::StandardNormal`)
//! per atom in atom order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::krein_feller::HmuElement;
use crate::measure::{complex_fsum, DensityVector, MeasurableSet, MeasureSpace};
use crate::numeric::fsum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// ψ = Σ c_x·ξ_x.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianElement {
    coeffs: Vec<Complex64>,
}

impl GaussianElement {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zero(len: usize) -> Self {
        Self::new(vec![ZERO; len])
    }

    /// The basis variable ξ_atom.
    pub fn basis(len: usize, atom: usize) -> Self {
        let mut e = Self::zero(len);
        e.coeffs[atom] = Complex64::new(1.0, 0.0);
        e
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    fn check_space(&self, space: &MeasureSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                actual: self.len(),
            });
        }
        Ok(())
    }
}

fn check_dims(a: &GaussianElement, b: &GaussianElement) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// W_A.
pub fn brownian_rv(space: &MeasureSpace, set: &MeasurableSet) -> Result<GaussianElement> {
    space.check_set(set)?;
    let mut coeffs = vec![ZERO; space.len()];
    for i in set.iter() {
        coeffs[i] = Complex64::new(space.weight(i).sqrt(), 0.0);
    }
    Ok(GaussianElement::new(coeffs))
}

/// V_μ f = ∫ f dW: coefficients `f(x)·√μ({x})`.
pub fn ito_integral(space: &MeasureSpace, f: &DensityVector) -> Result<GaussianElement> {
    f.check_len(space)?;
    Ok(GaussianElement::new(
        f.values()
            .iter()
            .enumerate()
            .map(|(i, v)| v * space.weight(i).sqrt())
            .collect(),
    ))
}

/// E[ψ·conj(φ)] = Σ c_x·conj(d_x).
pub fn expectation_product(psi: &GaussianElement, phi: &GaussianElement) -> Result<Complex64> {
    check_dims(psi, phi)?;
    let terms: Vec<Complex64> = psi
        .coeffs
        .iter()
        .zip(&phi.coeffs)
        .map(|(c, d)| c * d.conj())
        .collect();
    Ok(complex_fsum(&terms))
}

/// V_μ* ψ: the density `c_x/√μ({x})` of `A ↦ E[ψ·W_A]`, zero on null atoms.
pub fn v_adjoint(space: &MeasureSpace, psi: &GaussianElement) -> Result<DensityVector> {
    psi.check_space(space)?;
    DensityVector::new(
        psi.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let w = space.weight(i);
                if w == 0.0 {
                    ZERO
                } else {
                    c / w.sqrt()
                }
            })
            .collect(),
    )
}

/// T_μ ψ: the RKHS element `A ↦ E[ψ·W_A]`, i.e. ∇_μ* V_μ* ψ.
pub fn t_mu(space: &MeasureSpace, psi: &GaussianElement) -> Result<HmuElement> {
    HmuElement::from_density(space, &v_adjoint(space, psi)?)
}

/// T_μ* M = V_μ ∇_μ M.
pub fn t_mu_adjoint(space: &MeasureSpace, m: &HmuElement) -> Result<GaussianElement> {
    ito_integral(space, m.density())
}

/// Q_μ = V_μ V_μ*: projection onto the span of the ξ_x on non-null atoms.
pub fn q_mu_project(space: &MeasureSpace, psi: &GaussianElement) -> Result<GaussianElement> {
    psi.check_space(space)?;
    Ok(GaussianElement::new(
        psi.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if space.is_null(i) { ZERO } else { c })
            .collect(),
    ))
}

/// One realization of the field: `z_x = √μ({x})·ξ_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub draws: Vec<f64>,
    pub seed: u64,
    pub replica: u64,
}

impl FieldSample {
    /// W_A evaluated on this realization.
    pub fn eval(&self, set: &MeasurableSet) -> f64 {
        set.iter().map(|i| self.draws[i]).sum()
    }
}

fn replica_rng(base: &ChaCha8Rng, replica: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(replica);
    rng
}

fn draw(space: &MeasureSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    space
        .weights()
        .iter()
        .map(|w| {
            let xi: f64 = rng.sample(StandardNormal);
            w.sqrt() * xi
        })
        .collect()
}

/// Replica 0 of `seed`.
pub fn sample_field(space: &MeasureSpace, seed: u64) -> FieldSample {
    sample_field_replica(space, seed, 0)
}

pub fn sample_field_replica(space: &MeasureSpace, seed: u64, replica: u64) -> FieldSample {
    let base = ChaCha8Rng::seed_from_u64(seed);
    FieldSample {
        draws: draw(space, &mut replica_rng(&base, replica)),
        seed,
        replica,
    }
}

/// Sample mean of `W_A·W_B` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub replicas: u64,
}

impl MonteCarloEstimate {
    /// Distance from `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.estimate - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.standard_error
        }
    }
}

/// Monte Carlo estimate of E[W_A·W_B] over `replicas` independent field
/// samples. Replicas run in parallel; aggregation is in replica order.
pub fn monte_carlo_cov(
    space: &MeasureSpace,
    a: &MeasurableSet,
    b: &MeasurableSet,
    replicas: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    space.check_set(a)?;
    space.check_set(b)?;
    if replicas < 2 {
        return Err(Error::Validation(format!("need at least 2 replicas, got {replicas}")));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let products: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let z = draw(space, &mut replica_rng(&base, r));
            let wa: f64 = a.iter().map(|i| z[i]).sum();
            let wb: f64 = b.iter().map(|i| z[i]).sum();
            wa * wb
        })
        .collect();
    let n = replicas as f64;
    let mean = fsum(products.iter().copied()) / n;
    let var = fsum(products.iter().map(|p| (p - mean) * (p - mean))) / (n - 1.0);
    Ok(MonteCarloEstimate {
        estimate: mean,
        standard_error: (var / n).sqrt(),
        replicas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein_feller::nabla_adjoint;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn space() -> MeasureSpace {
        MeasureSpace::from_weights(&[1.0, 4.0, 0.0, 0.25]).unwrap()
    }

    #[test]
    fn brownian_covariance() {
        let s = space();
        let a = s.set([0, 1, 2]).unwrap();
        let b = s.set([1, 3]).unwrap();
        let wa = brownian_rv(&s, &a).unwrap();
        let wb = brownian_rv(&s, &b).unwrap();
        assert_eq!(expectation_product(&wa, &wa).unwrap(), c(5.0));
        assert_eq!(expectation_product(&wa, &wb).unwrap(), c(4.0));
        let empty = brownian_rv(&s, &s.empty_set()).unwrap();
        assert_eq!(empty, GaussianElement::zero(4));
        let disjoint = brownian_rv(&s, &s.singleton(3)).unwrap();
        assert_eq!(expectation_product(&wa, &disjoint).unwrap(), c(0.0));
    }

    #[test]
    fn basis_is_orthonormal() {
        for i in 0..3 {
            for j in 0..3 {
                let e = expectation_product(&GaussianElement::basis(3, i), &GaussianElement::basis(3, j));
                assert_eq!(e.unwrap(), c(if i == j { 1.0 } else { 0.0 }));
            }
        }
    }

    #[test]
    fn ito_of_indicator_is_brownian() {
        let s = space();
        let a = s.set([1, 3]).unwrap();
        assert_eq!(
            ito_integral(&s, &DensityVector::indicator(&a)).unwrap(),
            brownian_rv(&s, &a).unwrap()
        );
        assert_eq!(
            ito_integral(&s, &DensityVector::zeros(4)).unwrap(),
            GaussianElement::zero(4)
        );
    }

    #[test]
    fn v_adjoint_examples() {
        let s = space();
        let a = s.set([0, 1, 2]).unwrap();
        let back = v_adjoint(&s, &brownian_rv(&s, &a).unwrap()).unwrap();
        assert_eq!(back.values(), &[c(1.0), c(1.0), c(0.0), c(0.0)]);
        let null = v_adjoint(&s, &GaussianElement::basis(4, 2)).unwrap();
        assert_eq!(null, DensityVector::zeros(4));
    }

    #[test]
    fn t_mu_examples() {
        let s = space();
        let a0 = s.set([1, 3]).unwrap();
        let k = t_mu(&s, &brownian_rv(&s, &a0).unwrap()).unwrap();
        assert_eq!(k, nabla_adjoint(&s, &DensityVector::indicator(&a0)).unwrap());
        assert_eq!(t_mu(&s, &GaussianElement::zero(4)).unwrap().norm_sq(), 0.0);
        assert_eq!(t_mu_adjoint(&s, &k).unwrap(), brownian_rv(&s, &a0).unwrap());
    }

    #[test]
    fn projection_examples() {
        let s = space();
        let in_range = ito_integral(&s, &DensityVector::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap()).unwrap();
        assert_eq!(q_mu_project(&s, &in_range).unwrap(), in_range);
        let null_only = GaussianElement::basis(4, 2);
        assert_eq!(q_mu_project(&s, &null_only).unwrap(), GaussianElement::zero(4));
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = space();
        assert_eq!(sample_field(&s, 7), sample_field(&s, 7));
        assert_ne!(sample_field(&s, 7).draws, sample_field(&s, 8).draws);
        assert_ne!(
            sample_field_replica(&s, 7, 0).draws,
            sample_field_replica(&s, 7, 1).draws
        );
        // null atoms always draw exactly zero
        assert_eq!(sample_field(&s, 7).draws[2], 0.0);
    }

    #[test]
    fn monte_carlo_matches_replica_samples() {
        let s = space();
        let a = s.set([0, 1]).unwrap();
        let est = monte_carlo_cov(&s, &a, &a, 3, 11).unwrap();
        let products: Vec<f64> = (0..3)
            .map(|r| {
                let f = sample_field_replica(&s, 11, r);
                f.eval(&a) * f.eval(&a)
            })
            .collect();
        let mean = products.iter().sum::<f64>() / 3.0;
        assert!((est.estimate - mean).abs() < 1e-12 * mean.abs().max(1.0));
        assert!(monte_carlo_cov(&s, &a, &a, 1, 0).is_err());
    }

    #[test]
    fn monte_carlo_unit_variance() {
        let s = MeasureSpace::from_weights(&[0.5, 0.25, 0.25, 3.0]).unwrap();
        let a = s.set([0, 1, 2]).unwrap();
        let est = monte_carlo_cov(&s, &a, &a, 100_000, 42).unwrap();
        assert!(est.z_score(1.0) <= 4.0, "{est:?}");
        let b = s.singleton(3);
        let est = monte_carlo_cov(&s, &a, &b, 100_000, 43).unwrap();
        assert!(est.z_score(0.0) <= 4.0, "{est:?}");
    }
}
