use std::collections::HashMap;

use super::{build_graph, extract_transitions, filter_transitions, prune, FilterParams, RoadSegment, TransitionGraph};
use crate::geo::ProjectedPoint;
use crate::ingest::CdrEvent;
use crate::Result;

/// Thresholds for the whole road-inference chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadParams {
    pub filter: FilterParams,
    pub min_weight: u64,
    pub min_component: usize,
}

impl RoadParams {
    /// Default thresholds with `dt_min` taken from the events.
    pub fn for_events(events: &[CdrEvent]) -> Self {
        RoadParams {
            filter: FilterParams::for_events(events),
            min_weight: 10,
            min_component: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoadDetection {
    pub transitions: usize,
    pub accepted: usize,
    pub graph: TransitionGraph,
    pub segments: Vec<RoadSegment>,
}

/// extract, filter, aggregate and prune in one go.
pub fn detect_roads(
    events: &[CdrEvent],
    positions: &HashMap<u32, ProjectedPoint>,
    params: &RoadParams,
) -> Result<RoadDetection> {
    params.filter.validate()?;
    let ts = extract_transitions(events, positions)?;
    let accepted = filter_transitions(&ts, &params.filter);
    let graph = build_graph(&accepted);
    let segments = prune(&graph, params.min_weight, params.min_component);
    log::info!(
        "{} transitions, {} accepted, {} edges, {} segments kept",
        ts.len(),
        accepted.len(),
        graph.len(),
        segments.len()
    );
    Ok(RoadDetection {
        transitions: ts.len(),
        accepted: accepted.len(),
        graph,
        segments,
    })
}
