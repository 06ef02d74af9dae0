//! Road inference from CDR transitions.
//!
//! Consecutive events of one user become [`Transition`]s. Those moving at
//! car-like speeds within a bounded time window are aggregated into an
//! undirected [`TransitionGraph`], whose weak edges and small components are
//! pruned away. What survives approximates the high-traffic road network.

mod evaluate;
mod export;
mod graph;
mod heatmap;
mod pipeline;
mod transitions;

pub use evaluate::{evaluate_roads, RoadEvaluation};
pub use export::{segments_geojson, write_heatmap_csv, write_segments_csv};
pub use graph::{build_graph, prune, RoadSegment, TransitionGraph};
pub use heatmap::{transition_heatmap, Binning, Heatmap};
pub use pipeline::{detect_roads, RoadDetection, RoadParams};
pub use transitions::{
    extract_transitions, filter_transitions, min_positive_gap, FilterParams, Transition,
};
