use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::AdditiveSetFunction;
use crate::error::{Error, Result};
use crate::measure::{MeasurableSet, MeasureSpace};

/// Default PSD tolerance, applied relative to the largest matrix entry.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// K(A, B) = μ(A ∩ B).
pub fn kernel_eval(space: &MeasureSpace, a: &MeasurableSet, b: &MeasurableSet) -> Result<f64> {
    space.check_set(a)?;
    space.check_set(b)?;
    space.measure_of(&a.intersection(b))
}

/// The Gram matrix `[μ(Aᵢ ∩ Aⱼ)]` of a family of sets.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    sets: Vec<MeasurableSet>,
    entries: DMatrix<f64>,
}

impl GramMatrix {
    /// Wraps precomputed entries; used by alternative assemblers.
    pub fn from_parts(sets: Vec<MeasurableSet>, entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != sets.len() || entries.ncols() != sets.len() {
            return Err(Error::DimensionMismatch {
                expected: sets.len(),
                actual: entries.nrows(),
            });
        }
        Ok(Self { sets, entries })
    }

    pub fn sets(&self) -> &[MeasurableSet] {
        &self.sets
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.sets.len()
    }
}

/// Strategy for assembling a Gram matrix.
pub trait GramAssembler: Send + Sync {
    fn name(&self) -> &'static str;
    fn assemble(&self, space: &MeasureSpace, sets: &[MeasurableSet]) -> Result<GramMatrix>;
}

/// Entry-by-entry assembly through [`kernel_eval`], mirrored across the diagonal.
#[derive(Debug, Default, Clone, Copy)]
pub struct DirectGram;

impl GramAssembler for DirectGram {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn assemble(&self, space: &MeasureSpace, sets: &[MeasurableSet]) -> Result<GramMatrix> {
        let n = sets.len();
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let k = kernel_eval(space, &sets[i], &sets[j])?;
                entries[(i, j)] = k;
                entries[(j, i)] = k;
            }
        }
        GramMatrix::from_parts(sets.to_vec(), entries)
    }
}

/// Result of [`gram_psd_check`].
#[derive(Debug, Clone)]
pub struct PsdCheck {
    pub gram: GramMatrix,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

/// Eigenvalue threshold `-tol·max|entry|` (or `-tol` for the zero matrix).
pub fn psd_threshold(tol: f64, max_abs: f64) -> f64 {
    if max_abs > 0.0 {
        -tol * max_abs
    } else {
        -tol
    }
}

const EIGEN_MAX_ITER: usize = 10_000;

/// Smallest eigenvalue of a real symmetric matrix (∞ for the empty matrix).
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(f64::INFINITY);
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Smallest eigenvalue of a complex Hermitian matrix.
pub fn min_eigenvalue_hermitian(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(f64::INFINITY);
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

pub fn gram_psd_check(space: &MeasureSpace, sets: &[MeasurableSet], tol: f64) -> Result<PsdCheck> {
    gram_psd_check_with(&DirectGram, space, sets, tol)
}

pub fn gram_psd_check_with(
    assembler: &dyn GramAssembler,
    space: &MeasureSpace,
    sets: &[MeasurableSet],
    tol: f64,
) -> Result<PsdCheck> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("PSD tolerance must be positive, got {tol}")));
    }
    let gram = assembler.assemble(space, sets)?;
    let min_eigenvalue = min_eigenvalue(gram.entries())?;
    let max_abs = gram.entries().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let psd = min_eigenvalue >= psd_threshold(tol, max_abs);
    Ok(PsdCheck {
        gram,
        min_eigenvalue,
        psd,
    })
}

/// Smallest eigenvalue of `[μ(Aᵢ∩Aⱼ) − M(Aᵢ)·conj(M(Aⱼ))/C]` and the
/// largest absolute entry of that matrix.
pub fn domination_spectrum(
    space: &MeasureSpace,
    m: &AdditiveSetFunction,
    sets: &[MeasurableSet],
    c: f64,
) -> Result<(f64, f64)> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Validation(format!("domination constant must be positive, got {c}")));
    }
    let values: Vec<Complex64> = sets.iter().map(|s| m.value(space, s)).collect::<Result<_>>()?;
    let n = sets.len();
    let mut mat = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let k = kernel_eval(space, &sets[i], &sets[j])?;
            mat[(i, j)] = Complex64::new(k, 0.0) - values[i] * values[j].conj() / c;
        }
    }
    let max_abs = mat.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    Ok((min_eigenvalue_hermitian(&mat)?, max_abs))
}

/// Whether `M` is dominated by the kernel with constant `C` on `sets`, i.e.
/// the kernel `μ(A∩B) − M(A)·conj(M(B))/C` is positive semidefinite there
/// (to `tol`, relative to the largest entry).
pub fn domination_check(
    space: &MeasureSpace,
    m: &AdditiveSetFunction,
    sets: &[MeasurableSet],
    c: f64,
    tol: f64,
) -> Result<bool> {
    let (min_eig, max_abs) = domination_spectrum(space, m, sets, c)?;
    Ok(min_eig >= psd_threshold(tol, max_abs))
}
