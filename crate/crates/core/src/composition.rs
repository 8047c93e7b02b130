//! Composition with an endomorphism σ of the atom set.
//!
//! When μ is σ-invariant (μ∘σ⁻¹ = μ), `S f = f∘σ` is an isometry of L²(μ)
//! and its adjoint is the Krein-Feller derivative of the pushed-forward set
//! function `M_g(A) = ∫ 1_A(σ(x)) g(x) μ(dx)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::krein_feller::nabla_of;
use crate::measure::{complex_fsum, DensityVector, MeasurableSet, MeasureSpace};
use crate::numeric::close;
use crate::rkhs::{AdditiveSetFunction, SetTable};

/// Relative tolerance for `μ(σ⁻¹{x}) = μ({x})`.
pub const INVARIANCE_TOL: f64 = 1e-12;

/// A total map of the atom set into itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endomorphism {
    map: Vec<usize>,
}

impl Endomorphism {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if let Some(&bad) = map.iter().find(|&&y| y >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// x ↦ x + shift (mod n).
    pub fn cyclic_shift(n: usize, shift: usize) -> Self {
        Self {
            map: (0..n).map(|x| (x + shift) % n).collect(),
        }
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.map.len()];
        self.map.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    /// σ⁻¹(A) = {x : σ(x) ∈ A}.
    pub fn preimage(&self, set: &MeasurableSet) -> Result<MeasurableSet> {
        self.check_universe(set.universe())?;
        Ok(MeasurableSet::from_predicate(self.map.len(), |x| {
            set.contains(self.map[x])
        }))
    }

    fn check_universe(&self, n: usize) -> Result<()> {
        if n == self.map.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                actual: self.map.len(),
            })
        }
    }
}

/// Invariance of μ under σ, with the first violating singleton.
pub fn check_invariance(
    space: &MeasureSpace,
    sigma: &Endomorphism,
) -> Result<(bool, Option<MeasurableSet>)> {
    sigma.check_universe(space.len())?;
    for x in 0..space.len() {
        let atom = space.singleton(x);
        let pulled = space.measure_of(&sigma.preimage(&atom)?)?;
        if !close(pulled, space.weight(x), INVARIANCE_TOL, 0.0) {
            return Ok((false, Some(atom)));
        }
    }
    Ok((true, None))
}

/// (S f)(x) = f(σ(x)).
pub fn compose(space: &MeasureSpace, sigma: &Endomorphism, f: &DensityVector) -> Result<DensityVector> {
    sigma.check_universe(space.len())?;
    f.check_len(space)?;
    DensityVector::new(sigma.map.iter().map(|&y| f[y]).collect())
}

/// M_g as a table of singleton values `M_g({y}) = Σ_{σ(x)=y} g(x)·μ({x})`;
/// other sets follow by additivity.
pub fn pushforward_setfn(
    space: &MeasureSpace,
    sigma: &Endomorphism,
    g: &DensityVector,
) -> Result<AdditiveSetFunction> {
    sigma.check_universe(space.len())?;
    g.check_len(space)?;
    let n = space.len();
    let mut fibers: Vec<Vec<Complex64>> = vec![Vec::new(); n];
    for x in 0..n {
        fibers[sigma.map[x]].push(g[x] * space.weight(x));
    }
    let mut table = SetTable::default();
    for (y, fiber) in fibers.iter().enumerate() {
        table.insert(space.singleton(y), complex_fsum(fiber))?;
    }
    Ok(AdditiveSetFunction::Table(table))
}

/// S* g = ∇_μ M_g. Requires μ to be σ-invariant.
pub fn s_adjoint(space: &MeasureSpace, sigma: &Endomorphism, g: &DensityVector) -> Result<DensityVector> {
    if let (false, Some(witness)) = check_invariance(space, sigma)? {
        return Err(Error::Precondition(format!(
            "measure is not invariant under the endomorphism (violated at {witness:?})"
        )));
    }
    let m = pushforward_setfn(space, sigma, g)?;
    match nabla_of(space, &m) {
        Ok(h) => Ok(h),
        Err(Error::NotMember { witness }) => Err(Error::Numerical(format!(
            "pushforward of an L² density under an invariant map is not a member (parts {witness:?})"
        ))),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: &[f64]) -> DensityVector {
        DensityVector::from_real(v).unwrap()
    }

    #[test]
    fn invariance_examples() {
        let s = MeasureSpace::from_weights(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(check_invariance(&s, &Endomorphism::identity(3)).unwrap(), (true, None));
        assert!(check_invariance(&s, &Endomorphism::cyclic_shift(3, 1)).unwrap().0);

        let s = MeasureSpace::from_weights(&[1.0, 1.0]).unwrap();
        let collapse = Endomorphism::new(vec![0, 0]).unwrap();
        assert_eq!(
            check_invariance(&s, &collapse).unwrap(),
            (false, Some(s.singleton(0)))
        );
    }

    #[test]
    fn non_injective_invariant_map() {
        // the null atom 2 may land anywhere
        let s = MeasureSpace::from_weights(&[1.0, 2.0, 0.0]).unwrap();
        let sigma = Endomorphism::new(vec![0, 1, 0]).unwrap();
        assert!(!sigma.is_injective());
        assert!(check_invariance(&s, &sigma).unwrap().0);
    }

    #[test]
    fn compose_examples() {
        let s = MeasureSpace::from_weights(&[1.0, 1.0]).unwrap();
        let f = real(&[1.0, 2.0]);
        assert_eq!(compose(&s, &Endomorphism::identity(2), &f).unwrap(), f);
        let swap = Endomorphism::new(vec![1, 0]).unwrap();
        assert_eq!(compose(&s, &swap, &f).unwrap(), real(&[2.0, 1.0]));
    }

    #[test]
    fn pushforward_examples() {
        let s = MeasureSpace::from_weights(&[1.0, 2.0, 0.0]).unwrap();
        let sigma = Endomorphism::new(vec![0, 1, 0]).unwrap();
        let m = pushforward_setfn(&s, &sigma, &real(&[1.0; 3])).unwrap();
        for mask in 0..8 {
            let a = MeasurableSet::from_mask(3, mask);
            assert_eq!(
                m.value(&s, &a).unwrap(),
                Complex64::new(s.measure_of(&a).unwrap(), 0.0)
            );
        }
        let zero = pushforward_setfn(&s, &sigma, &DensityVector::zeros(3)).unwrap();
        assert_eq!(zero.value(&s, &s.full_set()).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn adjoint_examples() {
        let s = MeasureSpace::from_weights(&[1.0, 1.0]).unwrap();
        let swap = Endomorphism::new(vec![1, 0]).unwrap();
        let g = real(&[3.0, -1.0]);
        assert_eq!(s_adjoint(&s, &swap, &g).unwrap(), compose(&s, &swap, &g).unwrap());
        assert_eq!(s_adjoint(&s, &Endomorphism::identity(2), &g).unwrap(), g);

        let collapse = Endomorphism::new(vec![0, 0]).unwrap();
        assert!(matches!(
            s_adjoint(&s, &collapse, &g),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn adjoint_identity_with_collapsed_null_atom() {
        let s = MeasureSpace::from_weights(&[0.5, 2.0, 0.0, 0.5]).unwrap();
        let sigma = Endomorphism::new(vec![3, 1, 1, 0]).unwrap();
        let f = real(&[1.0, -2.0, 5.0, 0.25]);
        let g = real(&[2.0, 1.0, 7.0, -3.0]);
        let lhs = compose(&s, &sigma, &f).unwrap().inner(&g, &s).unwrap();
        let rhs = f.inner(&s_adjoint(&s, &sigma, &g).unwrap(), &s).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn rejects_bad_maps() {
        assert!(Endomorphism::new(vec![0, 2]).is_err());
        let s = MeasureSpace::from_weights(&[1.0]).unwrap();
        assert!(check_invariance(&s, &Endomorphism::identity(2)).is_err());
    }
}
