//! Discretized measure spaces, the set ring and simple functions.

mod grid;
mod set;
mod simple;
mod space;

pub use grid::{
    build_density, densities, density_kind, grid_space, Density, DensityKind, DensityParams,
};
pub use set::{check_pairwise_disjoint, MeasurableSet};
pub use simple::SimpleFunction;
pub use space::{complex_fsum, DensityVector, MeasureSpace};
