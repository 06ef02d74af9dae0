use std::collections::HashMap;

use rayon::prelude::*;

use crate::geo::ProjectedPoint;
use crate::ingest::CdrEvent;
use crate::{Error, Result};

/// A user's jump between two consecutively observed stations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub user_id: u64,
    pub from_station: u32,
    pub to_station: u32,
    pub t_start: i64,
    pub t_end: i64,
    pub distance_km: f64,
    pub dt_s: i64,
    /// km/h; infinite for a jump in zero time.
    pub velocity_kmh: f64,
}

fn sorted_order(events: &[CdrEvent]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.par_sort_by_key(|&i| (events[i].user_id, events[i].timestamp, i));
    order
}

/// Splits a (user, time)-sorted index list into per-user runs.
fn user_runs(events: &[CdrEvent], order: &[usize]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for k in 1..=order.len() {
        if k == order.len() || events[order[k]].user_id != events[order[start]].user_id {
            if k > start {
                runs.push((start, k));
            }
            start = k;
        }
    }
    runs
}

/// Turns every consecutive pair of a user's time-ordered events into a
/// transition. Output is ordered by user, then time, whatever the input
/// order. Distances are planar, using `positions` keyed by station id.
pub fn extract_transitions(
    events: &[CdrEvent],
    positions: &HashMap<u32, ProjectedPoint>,
) -> Result<Vec<Transition>> {
    if let Some(e) = events.iter().find(|e| !positions.contains_key(&e.station_id)) {
        return Err(Error::Invalid(format!("station {} has no position", e.station_id)));
    }
    let order = sorted_order(events);
    let runs = user_runs(events, &order);
    let per_user: Vec<Vec<Transition>> = runs
        .par_iter()
        .map(|&(a, b)| {
            order[a..b]
                .windows(2)
                .map(|w| {
                    let (e0, e1) = (&events[w[0]], &events[w[1]]);
                    let distance_km = positions[&e0.station_id].dist(positions[&e1.station_id]);
                    let dt_s = e1.timestamp - e0.timestamp;
                    let velocity_kmh = if dt_s > 0 {
                        distance_km / (dt_s as f64 / 3600.0)
                    } else if distance_km > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                    Transition {
                        user_id: e0.user_id,
                        from_station: e0.station_id,
                        to_station: e1.station_id,
                        t_start: e0.timestamp,
                        t_end: e1.timestamp,
                        distance_km,
                        dt_s,
                        velocity_kmh,
                    }
                })
                .collect()
        })
        .collect();
    Ok(per_user.into_iter().flatten().collect())
}

/// Smallest strictly positive gap between consecutive events of one user.
pub fn min_positive_gap(events: &[CdrEvent]) -> Option<i64> {
    let order = sorted_order(events);
    order
        .windows(2)
        .filter(|w| events[w[0]].user_id == events[w[1]].user_id)
        .map(|w| events[w[1]].timestamp - events[w[0]].timestamp)
        .filter(|&d| d > 0)
        .min()
}

/// Acceptance window for transitions. Both intervals are closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub v_min: f64,
    pub v_max: f64,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            v_min: 15.0,
            v_max: 150.0,
            dt_min: 1.0,
            dt_max: 3600.0,
        }
    }
}

impl FilterParams {
    /// Defaults with `dt_min` set to the dataset's smallest positive gap.
    pub fn for_events(events: &[CdrEvent]) -> Self {
        let mut p = FilterParams::default();
        if let Some(g) = min_positive_gap(events) {
            p.dt_min = g as f64;
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_min > 0.0 && self.v_min < self.v_max) {
            return Err(Error::Invalid(format!(
                "velocity window [{}, {}] must be positive and increasing",
                self.v_min, self.v_max
            )));
        }
        if !(self.dt_min >= 0.0 && self.dt_min <= self.dt_max && self.dt_max > 0.0) {
            return Err(Error::Invalid(format!(
                "time window [{}, {}] must be non-negative and increasing",
                self.dt_min, self.dt_max
            )));
        }
        Ok(())
    }

    pub fn accepts(&self, t: &Transition) -> bool {
        let dt = t.dt_s as f64;
        t.dt_s > 0
            && dt >= self.dt_min
            && dt <= self.dt_max
            && t.velocity_kmh >= self.v_min
            && t.velocity_kmh <= self.v_max
    }
}

/// Keeps transitions inside both the velocity and the time window. Staying
/// at one station gives zero velocity and falls below `v_min`.
pub fn filter_transitions(ts: &[Transition], params: &FilterParams) -> Vec<Transition> {
    ts.iter().filter(|t| params.accepts(t)).copied().collect()
}
