use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::partitions::{for_each_partition, MAX_ENUMERATED_ATOMS};
use super::AdditiveSetFunction;
use crate::error::{Error, Result};
use crate::measure::{check_pairwise_disjoint, DensityVector, MeasurableSet, MeasureSpace};
use crate::numeric::{abs_pow, fsum};

/// Largest exponent accepted by the L^p criteria.
pub const MAX_EXPONENT: f64 = 8.0;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p <= MAX_EXPONENT {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "exponent p must lie in (1, {MAX_EXPONENT}], got {p}"
        )))
    }
}

/// `|M(A)|^p / μ(A)^(p-1)`, with `0/0 = 0` and `x/0 = ∞` for `x ≠ 0`.
pub fn part_term(value: Complex64, measure: f64, p: f64) -> f64 {
    if measure == 0.0 {
        if value == Complex64::new(0.0, 0.0) {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        abs_pow(value.norm(), p) / abs_pow(measure, p - 1.0)
    }
}

/// Σₙ |M(Aₙ)|^p / μ(Aₙ)^(p-1) over pairwise-disjoint parts.
pub fn partition_functional(
    space: &MeasureSpace,
    m: &AdditiveSetFunction,
    parts: &[MeasurableSet],
    p: f64,
) -> Result<f64> {
    check_exponent(p)?;
    for part in parts {
        space.check_set(part)?;
    }
    check_pairwise_disjoint(parts)?;
    let terms = parts
        .iter()
        .map(|a| Ok(part_term(m.value(space, a)?, space.measure_of(a)?, p)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(fsum(terms))
}

/// Supremum of the partition functional and a partition attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct Supremum {
    pub value: f64,
    pub witness: Vec<MeasurableSet>,
}

/// A way of computing the supremum of the partition functional over all
/// finite disjoint families.
pub trait PartitionSupremum: Send + Sync {
    fn name(&self) -> &'static str;
    fn supremum(&self, space: &MeasureSpace, m: &AdditiveSetFunction, p: f64) -> Result<Supremum>;
}

/// Evaluates the singleton partition. Splitting a part never decreases the
/// functional (power-mean inequality), so this is the supremum.
#[derive(Debug, Default, Clone, Copy)]
pub struct AtomicSupremum;

impl PartitionSupremum for AtomicSupremum {
    fn name(&self) -> &'static str {
        "atomic"
    }

    fn supremum(&self, space: &MeasureSpace, m: &AdditiveSetFunction, p: f64) -> Result<Supremum> {
        let values = m.atom_values(space)?;
        let terms: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| part_term(v, space.weight(i), p))
            .collect();
        let value = fsum(terms.iter().copied());
        let witness = if value.is_finite() {
            (0..space.len()).map(|i| space.singleton(i)).collect()
        } else {
            (0..space.len())
                .filter(|&i| terms[i].is_infinite())
                .map(|i| space.singleton(i))
                .collect()
        };
        Ok(Supremum { value, witness })
    }
}

/// Enumerates every partition of the atoms and keeps the largest value.
/// Each part's value is obtained from the set function directly.
#[derive(Debug, Default, Clone, Copy)]
pub struct BruteForceSupremum;

impl PartitionSupremum for BruteForceSupremum {
    fn name(&self) -> &'static str {
        "brute_force"
    }

    fn supremum(&self, space: &MeasureSpace, m: &AdditiveSetFunction, p: f64) -> Result<Supremum> {
        let n = space.len();
        if n > MAX_ENUMERATED_ATOMS {
            return Err(Error::Precondition(format!(
                "brute-force enumeration supports at most {MAX_ENUMERATED_ATOMS} atoms, space has {n}"
            )));
        }
        // Term of every nonempty subset, indexed by bit mask.
        let mut terms = vec![0.0f64; 1 << n];
        for (mask, term) in terms.iter_mut().enumerate().skip(1) {
            let set = MeasurableSet::from_mask(n, mask as u64);
            *term = part_term(m.value(space, &set)?, space.measure_of(&set)?, p);
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_blocks: Vec<u64> = Vec::new();
        for_each_partition(n, |blocks| {
            let value = fsum(blocks.iter().map(|&b| terms[b as usize]));
            if value > best {
                best = value;
                best_blocks = blocks.to_vec();
            }
        });
        Ok(Supremum {
            value: best.max(0.0),
            witness: best_blocks
                .into_iter()
                .map(|b| MeasurableSet::from_mask(n, b))
                .collect(),
        })
    }
}

static ATOMIC: AtomicSupremum = AtomicSupremum;
static BRUTE_FORCE: BruteForceSupremum = BruteForceSupremum;
static STRATEGIES: [&dyn PartitionSupremum; 2] = [&ATOMIC, &BRUTE_FORCE];

/// All registered supremum strategies.
pub fn supremum_strategies() -> &'static [&'static dyn PartitionSupremum] {
    &STRATEGIES
}

pub fn supremum_strategy(name: &str) -> Option<&'static dyn PartitionSupremum> {
    STRATEGIES.iter().copied().find(|s| s.name() == name)
}

/// Selector for the registered strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Atomic,
    BruteForce,
}

impl Mode {
    pub fn strategy(self) -> &'static dyn PartitionSupremum {
        match self {
            Mode::Atomic => &ATOMIC,
            Mode::BruteForce => &BRUTE_FORCE,
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atomic" => Ok(Mode::Atomic),
            "brute_force" => Ok(Mode::BruteForce),
            other => Err(Error::Validation(format!("unknown membership mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.strategy().name())
    }
}

/// Outcome of a membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    /// Smallest admissible constant, `∞` for non-members.
    pub best_constant: f64,
    pub recovered_density: Option<DensityVector>,
    /// Partition attaining the supremum, or the parts forcing it to `∞`.
    pub witness: Vec<MeasurableSet>,
}

/// Tests whether `M` is the integral of an L^p(μ) density.
pub fn membership_test(
    space: &MeasureSpace,
    m: &AdditiveSetFunction,
    p: f64,
    mode: Mode,
) -> Result<MembershipReport> {
    membership_test_with(mode.strategy(), space, m, p)
}

pub fn membership_test_with(
    strategy: &dyn PartitionSupremum,
    space: &MeasureSpace,
    m: &AdditiveSetFunction,
    p: f64,
) -> Result<MembershipReport> {
    check_exponent(p)?;
    m.check_additive(space)?;
    let sup = strategy.supremum(space, m, p)?;
    let member = sup.value.is_finite();
    let recovered_density = if member {
        let values = m.atom_values(space)?;
        let density = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let w = space.weight(i);
                if w == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    v / w
                }
            })
            .collect();
        Some(DensityVector::new(density)?)
    } else {
        None
    };
    Ok(MembershipReport {
        member,
        best_constant: sup.value,
        recovered_density,
        witness: sup.witness,
    })
}
