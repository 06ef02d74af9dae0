//! Planar geometry on projected coordinates: Voronoi coverage cells,
//! population aggregation, grid binning and coverage summaries.

mod export;
mod grid;
mod index;
mod north_south;
mod polygon;
mod projection;
mod rank;
mod voronoi;

pub use export::{region_geometry, voronoi_geojson, write_rank_csv};
pub use grid::{grid_bin, GridBin, GridSpec};
pub use index::{nearest_brute_force, SiteIndex};
pub use north_south::{north_south_split, CellSummary, NorthSouthSplit};
pub use polygon::{
    clip_halfplane, clip_ring_convex, convex_contains, densify_ring, ring_contains, ring_signed_area,
    BBox, PlanarRegion, Polygon,
};
pub use projection::{haversine_km, ProjectedPoint, Projection, EARTH_RADIUS_KM};
pub use rank::{rank_plot, RankPlot};
pub use voronoi::{cell_populations, voronoi, CellPopulations, VoronoiCell, VoronoiDiagram};
