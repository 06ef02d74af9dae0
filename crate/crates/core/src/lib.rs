//! Batch geospatial analytics over call detail records (CDRs).
//!
//! The crate is organised around the analyses it supports:
//!
//! * [`ingest`]: station tables, CDR streams, population rasters, boundaries
//!   and a deterministic synthetic data generator writing the same formats.
//! * [`geo`]: projection, Voronoi coverage cells, grid binning, rank
//!   statistics and the north/south coverage split.
//! * [`cartogram`]: diffusion-based density-equalizing maps.
//! * [`scaling`]: log-log regression of call intensity on population and
//!   spatial autocorrelation of gridded fields.
//! * [`energy`]: network energy and greenhouse-gas scenario calculator.
//! * [`mobility`]: transition extraction, filtering and road inference.

pub mod cartogram;
pub mod energy;
mod error;
pub mod geo;
pub mod ingest;
pub mod kv;
pub mod mobility;
pub mod scaling;

pub use error::{Error, Result};
