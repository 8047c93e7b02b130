//! The kernel `K(A, B) = μ(A ∩ B)`, its Gram matrices, and membership
//! criteria for additive set functions in the associated RKHS.

mod kernel;
mod membership;
pub mod partitions;
mod setfn;
mod sobolev;

pub use kernel::{
    domination_check, domination_spectrum, gram_psd_check, gram_psd_check_with, kernel_eval,
    min_eigenvalue, min_eigenvalue_hermitian, psd_threshold, DirectGram, GramAssembler, GramMatrix,
    PsdCheck, DEFAULT_PSD_TOL,
};
pub use membership::{
    membership_test, membership_test_with, part_term, partition_functional, supremum_strategies,
    supremum_strategy, AtomicSupremum, BruteForceSupremum, MembershipReport, Mode,
    PartitionSupremum, Supremum, MAX_EXPONENT,
};
pub use setfn::{AdditiveSetFunction, SetTable, ADDITIVITY_TOL};
pub use sobolev::{sobolev_membership, SobolevReport};
