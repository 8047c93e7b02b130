//! Exact finite-atom computations for the RKHS of the kernel
//! `K(A, B) = μ(A ∩ B)`: membership criteria, the Krein-Feller derivative,
//! μ-Brownian fields and their Itô isometry, families of measures with
//! transition kernels, and composition operators.
//!
//! A measure space is a finite list of atoms with nonnegative weights; every
//! subset is measurable. Null atoms are kept and handled explicitly.

pub mod composition;
pub mod error;
pub mod gaussian;
pub mod krein_feller;
pub mod measure;
pub mod multi;
pub mod numeric;
pub mod random;
pub mod rkhs;

pub use error::{Error, Result};
pub use measure::{DensityVector, MeasurableSet, MeasureSpace};
