//! Seeded generators of random instances, shared by the verification
//! suites and the test oracles.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::composition::Endomorphism;
use crate::measure::{DensityVector, MeasurableSet, MeasureSpace};
use crate::multi::MeasureFamily;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weights uniform in [0, 10], each atom null with probability `null_prob`.
pub fn random_weights<R: Rng>(rng: &mut R, n: usize, null_prob: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.random_bool(null_prob) {
                0.0
            } else {
                rng.random_range(0.0..=10.0)
            }
        })
        .collect()
}

pub fn random_space<R: Rng>(rng: &mut R, n: usize, null_prob: f64) -> MeasureSpace {
    MeasureSpace::from_weights(&random_weights(rng, n, null_prob))
        .expect("generated weights are valid")
}

/// Each atom included independently with probability ½.
pub fn random_set<R: Rng>(rng: &mut R, n: usize) -> MeasurableSet {
    MeasurableSet::from_predicate(n, |_| rng.random_bool(0.5))
}

/// Complex values with components uniform in [−1, 1].
pub fn random_density<R: Rng>(rng: &mut R, n: usize) -> DensityVector {
    DensityVector::new(
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
            .collect(),
    )
    .expect("generated values are finite")
}

pub fn random_real_density<R: Rng>(rng: &mut R, n: usize) -> DensityVector {
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    DensityVector::from_real(&values).expect("generated values are finite")
}

/// `count` densities over a random reference; each density vanishes at an
/// atom with probability `zero_prob`.
pub fn random_family<R: Rng>(rng: &mut R, n: usize, count: usize, zero_prob: f64) -> MeasureFamily {
    let reference = random_space(rng, n, 0.1);
    let densities = (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.random_bool(zero_prob) {
                        0.0
                    } else {
                        rng.random_range(0.0..=5.0)
                    }
                })
                .collect()
        })
        .collect();
    MeasureFamily::new(reference, densities).expect("generated densities are valid")
}

/// A random σ with a σ-invariant μ.
///
/// Atoms of positive mass are permuted, with weights constant on each
/// cycle. When `collapse` is set, the null atoms are mapped to arbitrary
/// targets, so σ is in general not injective; invariance forces any
/// non-injectivity onto null atoms.
pub fn random_invariant_pair<R: Rng>(
    rng: &mut R,
    n: usize,
    collapse: bool,
) -> (MeasureSpace, Endomorphism) {
    assert!(n > 0);
    let null: Vec<bool> = if collapse {
        let mut v: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        let keep = rng.random_range(0..n);
        v[keep] = false;
        v
    } else {
        vec![false; n]
    };
    let mut recurrent: Vec<usize> = (0..n).filter(|&x| !null[x]).collect();
    recurrent.shuffle(rng);
    let mut targets: Vec<usize> = recurrent.clone();
    targets.shuffle(rng);

    let mut map = vec![0usize; n];
    for (&x, &y) in recurrent.iter().zip(&targets) {
        map[x] = y;
    }
    for x in (0..n).filter(|&x| null[x]) {
        map[x] = rng.random_range(0..n);
    }

    let mut weights = vec![0.0; n];
    let mut seen = vec![false; n];
    for &start in &recurrent {
        if seen[start] {
            continue;
        }
        let w = rng.random_range(0.1..=10.0);
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            weights[x] = w;
            x = map[x];
        }
    }
    (
        MeasureSpace::from_weights(&weights).expect("generated weights are valid"),
        Endomorphism::new(map).expect("generated map is total"),
    )
}

/// Between one and `n` pairwise-disjoint nonempty sets.
pub fn random_disjoint_family<R: Rng>(rng: &mut R, n: usize) -> Vec<MeasurableSet> {
    let blocks = rng.random_range(1..=n.max(1));
    let mut parts = vec![MeasurableSet::empty(n); blocks];
    for x in 0..n {
        // roughly a quarter of the atoms stay uncovered
        if rng.random_bool(0.75) {
            let b = rng.random_range(0..blocks);
            parts[b].insert(x).expect("atom in range");
        }
    }
    parts.retain(|p| !p.is_empty());
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::check_invariance;

    #[test]
    fn invariant_pairs_are_invariant() {
        let mut r = rng(7);
        let mut non_injective = 0;
        for k in 0..200 {
            let (s, sigma) = random_invariant_pair(&mut r, 1 + k % 9, k % 2 == 1);
            assert!(check_invariance(&s, &sigma).unwrap().0);
            non_injective += usize::from(!sigma.is_injective());
        }
        assert!(non_injective > 0);
    }

    #[test]
    fn disjoint_families_are_disjoint() {
        let mut r = rng(3);
        for _ in 0..100 {
            let parts = random_disjoint_family(&mut r, 10);
            crate::measure::check_pairwise_disjoint(&parts).unwrap();
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(random_space(&mut rng(1), 20, 0.2), random_space(&mut rng(1), 20, 0.2));
    }
}
