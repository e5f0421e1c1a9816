//! Phase-space functions on the sphere for spin-j states.

mod distribution;
mod functions;
mod grid;
mod symbol;

pub use distribution::{region_frame_diagonal, Overlap, PolarRegion, SphereDistribution, MAX_CLIPPED_MASS};
pub use functions::{
    cat_density_pair, cat_density_pair_along, p_function, p_operator, q_function, q_of_cat_pair, transfer_coefficient,
};
pub use grid::{make_grid, Ring, SphereGrid};

