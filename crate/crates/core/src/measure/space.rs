use std::collections::HashSet;

use num_complex::Complex64;

use super::MeasurableSet;
use crate::error::{Error, Result};
use crate::numeric::fsum;

/// A finite measure space: labelled atoms with nonnegative finite weights.
///
/// Every subset of atoms has finite measure, so the ring of finite-measure
/// sets is the full power set. Atoms of weight zero are kept; they are the
/// null sets that set functions must vanish on.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
    coords: Option<Vec<f64>>,
}

impl MeasureSpace {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut labels = Vec::new();
        let mut weights = Vec::new();
        let mut seen = HashSet::new();
        for (label, weight) in entries {
            let label = label.into();
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidWeight { label, weight });
            }
            if !seen.insert(label.clone()) {
                return Err(Error::DuplicateLabel(label));
            }
            labels.push(label);
            weights.push(weight);
        }
        Ok(Self {
            labels,
            weights,
            coords: None,
        })
    }

    /// Space with atoms labelled `x0, x1, ...`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().enumerate().map(|(i, &w)| (format!("x{i}"), w)))
    }

    pub fn with_coords(mut self, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: coords.len(),
            });
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    pub fn is_null(&self, atom: usize) -> bool {
        self.weights[atom] == 0.0
    }

    pub fn total_mass(&self) -> f64 {
        fsum(self.weights.iter().copied())
    }

    pub fn empty_set(&self) -> MeasurableSet {
        MeasurableSet::empty(self.len())
    }

    pub fn full_set(&self) -> MeasurableSet {
        MeasurableSet::full(self.len())
    }

    pub fn singleton(&self, atom: usize) -> MeasurableSet {
        MeasurableSet::singleton(self.len(), atom)
    }

    pub fn set<I: IntoIterator<Item = usize>>(&self, atoms: I) -> Result<MeasurableSet> {
        MeasurableSet::from_indices(self.len(), atoms)
    }

    /// Atoms of positive weight.
    pub fn support(&self) -> MeasurableSet {
        MeasurableSet::from_predicate(self.len(), |i| self.weights[i] > 0.0)
    }

    pub fn check_set(&self, set: &MeasurableSet) -> Result<()> {
        if set.universe() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: set.universe(),
            });
        }
        Ok(())
    }

    /// μ(A), correctly rounded.
    pub fn measure_of(&self, set: &MeasurableSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(fsum(set.iter().map(|i| self.weights[i])))
    }
}

/// Per-atom complex values: an element of L²(X, μ).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector(Vec<Complex64>);

impl DensityVector {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Validation(format!("density entry {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn indicator(set: &MeasurableSet) -> Self {
        let mut v = Self::zeros(set.universe());
        for i in set.iter() {
            v.0[i] = Complex64::new(1.0, 0.0);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }

    pub fn check_len(&self, space: &MeasureSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                actual: self.len(),
            });
        }
        Ok(())
    }

    /// Canonical representative: entries on null atoms set to zero.
    pub fn canonical(&self, space: &MeasureSpace) -> Self {
        Self(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &v)| if space.is_null(i) { Complex64::new(0.0, 0.0) } else { v })
                .collect(),
        )
    }

    /// ⟨f, g⟩_μ = Σ f(x)·conj(g(x))·μ({x}).
    pub fn inner(&self, other: &Self, space: &MeasureSpace) -> Result<Complex64> {
        self.check_len(space)?;
        other.check_len(space)?;
        let terms: Vec<Complex64> = (0..space.len())
            .map(|i| self.0[i] * other.0[i].conj() * space.weight(i))
            .collect();
        Ok(complex_fsum(&terms))
    }

    /// ‖f‖²_μ.
    pub fn norm_sq(&self, space: &MeasureSpace) -> Result<f64> {
        self.check_len(space)?;
        Ok(fsum(
            (0..space.len()).map(|i| self.0[i].norm_sqr() * space.weight(i)),
        ))
    }

    /// ∫_A f dμ.
    pub fn integrate(&self, space: &MeasureSpace, set: &MeasurableSet) -> Result<Complex64> {
        self.check_len(space)?;
        space.check_set(set)?;
        let terms: Vec<Complex64> = set.iter().map(|i| self.0[i] * space.weight(i)).collect();
        Ok(complex_fsum(&terms))
    }
}

impl std::ops::Index<usize> for DensityVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Componentwise correctly rounded complex sum.
pub fn complex_fsum(terms: &[Complex64]) -> Complex64 {
    Complex64::new(
        fsum(terms.iter().map(|z| z.re)),
        fsum(terms.iter().map(|z| z.im)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_space_examples() {
        let s = MeasureSpace::new([("a", 1.0), ("b", 2.0)]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.total_mass(), 3.0);

        let null = MeasureSpace::new([("a", 0.0)]).unwrap();
        assert!(null.is_null(0));
        assert!(null.support().is_empty());

        assert!(matches!(
            MeasureSpace::new([("a", -1.0)]),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(matches!(
            MeasureSpace::new([("a", f64::NAN)]),
            Err(Error::InvalidWeight { .. })
        ));
        assert_eq!(
            MeasureSpace::new([("a", 1.0), ("a", 2.0)]),
            Err(Error::DuplicateLabel("a".into()))
        );
    }

    #[test]
    fn measure_of_examples() {
        let s = MeasureSpace::from_weights(&[0.25; 4]).unwrap();
        assert_eq!(s.measure_of(&s.full_set()).unwrap(), 1.0);
        assert_eq!(s.measure_of(&s.empty_set()).unwrap(), 0.0);

        let s = MeasureSpace::from_weights(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.measure_of(&s.set([0, 2]).unwrap()).unwrap(), 4.0);
        assert!(s.measure_of(&MeasurableSet::full(4)).is_err());
    }

    #[test]
    fn inner_product_is_hermitian() {
        let s = MeasureSpace::from_weights(&[1.0, 0.5, 2.0]).unwrap();
        let f = DensityVector::new(vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 3.0),
        ])
        .unwrap();
        let g = DensityVector::from_real(&[2.0, 1.0, -1.0]).unwrap();
        assert_eq!(f.inner(&g, &s).unwrap(), g.inner(&f, &s).unwrap().conj());
        assert_eq!(f.norm_sq(&s).unwrap(), f.inner(&f, &s).unwrap().re);
    }

    #[test]
    fn rejects_non_finite_density() {
        assert!(DensityVector::from_real(&[1.0, f64::INFINITY]).is_err());
    }
}
