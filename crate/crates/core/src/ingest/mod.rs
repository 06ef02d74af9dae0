//! Readers and writers for the external data formats, plus the synthetic
//! dataset generator.
//!
//! | File | Layout |
//! |------|--------|
//! | station table (`ANT_POS.TSV`) | `<station_id>\t<lon>\t<lat>`, no header |
//! | CDR trace (`POS_SAMPLE_*.TSV`) | `<user_id>\t<timestamp>\t<station_id>[\t<duration_s>]`, no header |
//! | population raster | ESRI ASCII grid |
//! | boundaries, ground truth | GeoJSON |

mod boundary;
mod cdr;
mod raster;
mod stations;
pub mod synth;

pub use boundary::{BoundarySet, Region, RegionRole, Ring};
pub use cdr::{
    format_timestamp, parse_cdr, parse_timestamp, read_cdr, write_cdr, CdrEvent, CdrStream,
    SkipReport,
};
pub(crate) use stations::DisjointSet;
pub use raster::PopulationRaster;
pub use stations::{
    dedupe_station_locations, parse_stations, read_stations, write_stations, BaseStation,
    StationLocation, StationTable,
};
