use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{complex_fsum, DensityVector, MeasurableSet, MeasureSpace};

/// Relative tolerance for accepting a tabulated value as the sum of the
/// tabulated values on its atoms.
pub const ADDITIVITY_TOL: f64 = 1e-12;

/// A complex-valued additive set function on the finite-measure sets.
#[derive(Debug, Clone, PartialEq)]
pub enum AdditiveSetFunction {
    /// `A ↦ Σ_{x∈A} density(x)·μ({x})`.
    Density(DensityVector),
    /// Externally supplied values, extended to other sets by additivity
    /// over singletons.
    Table(SetTable),
}

/// Finite map from sets to complex values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SetTable {
    entries: BTreeMap<MeasurableSet, Complex64>,
}

impl SetTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a value, rejecting a conflicting duplicate entry.
    pub fn insert(&mut self, set: MeasurableSet, value: Complex64) -> Result<()> {
        if let Some(old) = self.entries.get(&set) {
            if *old != value {
                return Err(Error::Inconsistent {
                    set: set.indices(),
                    given: format!("{value}"),
                    implied: format!("{old}"),
                });
            }
        }
        self.entries.insert(set, value);
        Ok(())
    }

    pub fn get(&self, set: &MeasurableSet) -> Option<Complex64> {
        self.entries.get(set).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MeasurableSet, &Complex64)> {
        self.entries.iter()
    }
}

impl FromIterator<(MeasurableSet, Complex64)> for SetTable {
    fn from_iter<I: IntoIterator<Item = (MeasurableSet, Complex64)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

impl AdditiveSetFunction {
    pub fn from_density(density: DensityVector) -> Self {
        Self::Density(density)
    }

    /// Table holding only the singleton values `M({x}) = values[x]`.
    pub fn from_atom_values(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::Table(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (MeasurableSet::singleton(n, i), v))
                .collect(),
        )
    }

    /// The kernel section `K(·, A₀) = μ(· ∩ A₀)`, tabulated on singletons.
    pub fn kernel_section(space: &MeasureSpace, anchor: &MeasurableSet) -> Result<Self> {
        space.check_set(anchor)?;
        let values: Vec<Complex64> = (0..space.len())
            .map(|i| {
                let w = if anchor.contains(i) { space.weight(i) } else { 0.0 };
                Complex64::new(w, 0.0)
            })
            .collect();
        Ok(Self::from_atom_values(&values))
    }

    /// The zero function.
    pub fn zero(space: &MeasureSpace) -> Self {
        Self::Density(DensityVector::zeros(space.len()))
    }

    pub fn check_dims(&self, space: &MeasureSpace) -> Result<()> {
        match self {
            Self::Density(d) => d.check_len(space),
            Self::Table(t) => t.iter().try_for_each(|(s, _)| space.check_set(s)),
        }
    }

    /// M(A).
    pub fn value(&self, space: &MeasureSpace, set: &MeasurableSet) -> Result<Complex64> {
        match self {
            Self::Density(d) => d.integrate(space, set),
            Self::Table(t) => {
                space.check_set(set)?;
                if let Some(v) = t.get(set) {
                    return Ok(v);
                }
                let mut parts = Vec::with_capacity(set.len());
                for i in set.iter() {
                    let single = space.singleton(i);
                    parts.push(t.get(&single).ok_or_else(|| Error::Undefined(single.indices()))?);
                }
                Ok(complex_fsum(&parts))
            }
        }
    }

    /// Singleton values `M({x})` for every atom.
    pub fn atom_values(&self, space: &MeasureSpace) -> Result<Vec<Complex64>> {
        (0..space.len())
            .map(|i| self.value(space, &space.singleton(i)))
            .collect()
    }

    /// Verifies that every tabulated value agrees with the sum of the
    /// tabulated singleton values it covers.
    pub fn check_additive(&self, space: &MeasureSpace) -> Result<()> {
        let Self::Table(t) = self else {
            return self.check_dims(space);
        };
        self.check_dims(space)?;
        for (set, &given) in t.iter() {
            if set.len() == 1 {
                continue;
            }
            let mut parts = Vec::with_capacity(set.len());
            for i in set.iter() {
                let single = space.singleton(i);
                match t.get(&single) {
                    Some(v) => parts.push(v),
                    None => return Err(Error::Undefined(single.indices())),
                }
            }
            let implied = complex_fsum(&parts);
            let scale: f64 = parts.iter().map(|z| z.norm()).sum::<f64>().max(given.norm());
            if (given - implied).norm() > ADDITIVITY_TOL * scale {
                return Err(Error::Inconsistent {
                    set: set.indices(),
                    given: format!("{given}"),
                    implied: format!("{implied}"),
                });
            }
        }
        Ok(())
    }
}
