use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// A subset of the atoms of a [`MeasureSpace`](super::MeasureSpace).
///
/// Every set carries the size of its universe, so complements are well
/// defined and sets from spaces of different sizes never compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurableSet {
    bits: FixedBitSet,
}

impl MeasurableSet {
    pub fn empty(universe: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Self { bits }
    }

    /// # Panics
    ///
    /// If `atom >= universe`.
    pub fn singleton(universe: usize, atom: usize) -> Self {
        let mut set = Self::empty(universe);
        set.bits.insert(atom);
        set
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Result<Self> {
        let mut set = Self::empty(universe);
        for index in indices {
            if index >= universe {
                return Err(Error::IndexOutOfRange { index, len: universe });
            }
            set.bits.insert(index);
        }
        Ok(set)
    }

    /// Builds the set of atoms for which `pred` holds.
    pub fn from_predicate(universe: usize, mut pred: impl FnMut(usize) -> bool) -> Self {
        let mut set = Self::empty(universe);
        for i in 0..universe {
            if pred(i) {
                set.bits.insert(i);
            }
        }
        set
    }

    /// Decodes the low `universe` bits of `mask` (bit `i` is atom `i`).
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        Self::from_predicate(universe, |i| i < 64 && (mask >> i) & 1 == 1)
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.bits.contains(atom)
    }

    pub fn insert(&mut self, atom: usize) -> Result<()> {
        if atom >= self.universe() {
            return Err(Error::IndexOutOfRange {
                index: atom,
                len: self.universe(),
            });
        }
        self.bits.insert(atom);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Atom indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Self { bits }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Self { bits }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Self { bits }
    }

    pub fn complement(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Self { bits }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.is_subset(&other.bits)
    }
}

impl fmt::Debug for MeasurableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl std::ops::BitOr for &MeasurableSet {
    type Output = MeasurableSet;
    fn bitor(self, rhs: Self) -> MeasurableSet {
        self.union(rhs)
    }
}

impl std::ops::BitAnd for &MeasurableSet {
    type Output = MeasurableSet;
    fn bitand(self, rhs: Self) -> MeasurableSet {
        self.intersection(rhs)
    }
}

impl std::ops::Sub for &MeasurableSet {
    type Output = MeasurableSet;
    fn sub(self, rhs: Self) -> MeasurableSet {
        self.difference(rhs)
    }
}

/// Checks that `parts` are pairwise disjoint, reporting the first overlap.
pub fn check_pairwise_disjoint(parts: &[MeasurableSet]) -> Result<()> {
    let mut seen = match parts.first() {
        Some(p) => MeasurableSet::empty(p.universe()),
        None => return Ok(()),
    };
    for (j, part) in parts.iter().enumerate() {
        if !seen.is_disjoint(part) {
            let first = parts[..j]
                .iter()
                .position(|q| !q.is_disjoint(part))
                .unwrap_or(0);
            return Err(Error::OverlappingParts { first, second: j });
        }
        seen = seen.union(part);
    }
    Ok(())
}
