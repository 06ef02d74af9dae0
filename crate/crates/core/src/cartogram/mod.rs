//! Density-equalising cartograms by linear diffusion.
//!
//! The population density is laid on a padded grid, diffused to uniformity
//! in closed form on a cosine basis, and the lattice of cell corners is
//! carried along the flow `v = -grad(rho) / rho`. At large times every
//! region's area is proportional to the population it held.

mod density;
mod export;
mod solver;
mod transform;

pub use density::{build_density, DensityField, DENSITY_FLOOR};
pub use export::{layer_geojson, side_by_side_svg, MapLayer, StationMark};
pub use solver::{solve_cartogram, SolveStats, SolverParams};
pub use transform::{region_shares, CartogramTransform, RegionShare};
