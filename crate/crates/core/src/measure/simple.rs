use num_complex::Complex64;

use super::MeasurableSet;
use crate::error::{Error, Result};

/// A finite combination Σ bⱼ·1_{Bⱼ} of indicator functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction {
    universe: usize,
    terms: Vec<(Complex64, MeasurableSet)>,
}

impl SimpleFunction {
    pub fn new(universe: usize) -> Self {
        Self {
            universe,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(universe: usize, terms: Vec<(Complex64, MeasurableSet)>) -> Result<Self> {
        let mut f = Self::new(universe);
        for (c, set) in terms {
            f.push(c, set)?;
        }
        Ok(f)
    }

    pub fn push(&mut self, coefficient: Complex64, set: MeasurableSet) -> Result<()> {
        if set.universe() != self.universe {
            return Err(Error::DimensionMismatch {
                expected: self.universe,
                actual: set.universe(),
            });
        }
        self.terms.push((coefficient, set));
        Ok(())
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn terms(&self) -> &[(Complex64, MeasurableSet)] {
        &self.terms
    }

    /// Sum of the coefficients of the terms whose set contains `atom`,
    /// accumulated in term order.
    pub fn eval(&self, atom: usize) -> Complex64 {
        self.terms
            .iter()
            .filter(|(_, s)| s.contains(atom))
            .fold(Complex64::new(0.0, 0.0), |acc, (c, _)| acc + c)
    }

    pub fn is_disjoint(&self) -> bool {
        crate::measure::check_pairwise_disjoint(
            &self.terms.iter().map(|(_, s)| s.clone()).collect::<Vec<_>>(),
        )
        .is_ok()
    }

    /// Rewrites the function over pairwise-disjoint sets, dropping empty sets
    /// and zero coefficients.
    pub fn disjointify(&self) -> Self {
        self.disjointify_with(false)
    }

    /// Rewrites the function over pairwise-disjoint sets by successive
    /// refinement: each new term `b·1_B` splits every existing part `A` into
    /// `A \ B` (coefficient unchanged) and `A ∩ B` (coefficient `a + b`), and
    /// contributes `B \ ∪A` with coefficient `b`.
    ///
    /// Coefficients are accumulated in term order, so evaluation at every
    /// atom matches [`eval`](Self::eval) bit for bit. With `keep_zero`, parts
    /// whose accumulated coefficient is zero are retained.
    pub fn disjointify_with(&self, keep_zero: bool) -> Self {
        let mut parts: Vec<(Complex64, MeasurableSet)> = Vec::new();
        let mut covered = MeasurableSet::empty(self.universe);
        for (b, set) in &self.terms {
            let mut next = Vec::with_capacity(2 * parts.len() + 1);
            for (a, part) in parts {
                let outside = &part - set;
                let inside = &part & set;
                if !outside.is_empty() {
                    next.push((a, outside));
                }
                if !inside.is_empty() {
                    next.push((a + b, inside));
                }
            }
            let fresh = set - &covered;
            if !fresh.is_empty() {
                // 0 + b keeps the same rounding as `eval`.
                next.push((Complex64::new(0.0, 0.0) + b, fresh));
            }
            covered = &covered | set;
            parts = next;
        }
        if !keep_zero {
            parts.retain(|(c, _)| *c != Complex64::new(0.0, 0.0));
        }
        parts.sort_by_key(|p| p.1.iter().next());
        Self {
            universe: self.universe,
            terms: parts,
        }
    }
}
