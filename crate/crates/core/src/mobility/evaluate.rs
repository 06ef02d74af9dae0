use std::collections::HashMap;

use super::RoadSegment;
use crate::geo::{ProjectedPoint, Projection};
use crate::ingest::synth::PlantedRoad;
use crate::{Error, Result};

/// Agreement between detected segments and a planted road network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadEvaluation {
    /// Share of segments lying along the planted network; 0 when nothing
    /// was detected.
    pub precision: f64,
    /// Share of planted consecutive-station edges spanned by detections.
    pub recall: f64,
    pub segments: usize,
    pub correct_segments: usize,
    pub planted_edges: usize,
    pub covered_edges: usize,
}

struct Road {
    pts: Vec<ProjectedPoint>,
    cum: Vec<f64>,
    towns: (usize, usize),
}

impl Road {
    fn new(r: &PlantedRoad, proj: &Projection) -> Self {
        let pts: Vec<ProjectedPoint> = r.polyline.iter().map(|&(x, y)| proj.forward(x, y)).collect();
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            cum.push(cum.last().unwrap() + w[0].dist(w[1]));
        }
        Road { pts, cum, towns: r.towns }
    }

    fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// (distance to the polyline, arc position of the closest point)
    fn locate(&self, q: ProjectedPoint) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for (k, w) in self.pts.windows(2).enumerate() {
            let d = w[1] - w[0];
            let len2 = d.norm_sq();
            let f = if len2 > 0.0 { ((q - w[0]).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let p = w[0] + d * f;
            let dist = p.dist(q);
            if dist < best.0 {
                best = (dist, self.cum[k] + f * len2.sqrt());
            }
        }
        best
    }

    /// Arc position of the end at `town`, if the road touches it.
    fn end_at(&self, town: usize) -> Option<f64> {
        if self.towns.0 == town {
            Some(0.0)
        } else if self.towns.1 == town {
            Some(self.length())
        } else {
            None
        }
    }
}

fn shared_town(a: &Road, b: &Road) -> Option<usize> {
    [a.towns.0, a.towns.1]
        .into_iter()
        .find(|&t| t == b.towns.0 || t == b.towns.1)
}

/// Scores detected segments against planted roads.
///
/// A segment is correct when both endpoints lie within `tol_km` of the same
/// road, or of two roads meeting at a town (a route through the town). It
/// then spans the stretch of road between its endpoints. A planted edge is
/// recovered when the union of spanned stretches covers it.
pub fn evaluate_roads(
    segments: &[RoadSegment],
    positions: &HashMap<u32, ProjectedPoint>,
    roads: &[PlantedRoad],
    proj: &Projection,
    tol_km: f64,
) -> Result<RoadEvaluation> {
    let pos = |id: u32| {
        positions
            .get(&id)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("station {id} has no position")))
    };
    let geo: Vec<Road> = roads.iter().map(|r| Road::new(r, proj)).collect();
    let mut spans: Vec<Vec<(f64, f64)>> = vec![Vec::new(); geo.len()];
    let mut correct = 0;
    for s in segments {
        let (pa, pb) = (pos(s.from)?, pos(s.to)?);
        let la: Vec<(f64, f64)> = geo.iter().map(|r| r.locate(pa)).collect();
        let lb: Vec<(f64, f64)> = geo.iter().map(|r| r.locate(pb)).collect();
        let mut ok = false;
        for r in 0..geo.len() {
            if la[r].0 <= tol_km && lb[r].0 <= tol_km {
                ok = true;
                spans[r].push((la[r].1.min(lb[r].1), la[r].1.max(lb[r].1)));
            }
        }
        for r1 in 0..geo.len() {
            for r2 in 0..geo.len() {
                if r1 == r2 || la[r1].0 > tol_km || lb[r2].0 > tol_km {
                    continue;
                }
                let Some(town) = shared_town(&geo[r1], &geo[r2]) else { continue };
                ok = true;
                let e1 = geo[r1].end_at(town).unwrap();
                let e2 = geo[r2].end_at(town).unwrap();
                spans[r1].push((la[r1].1.min(e1), la[r1].1.max(e1)));
                spans[r2].push((lb[r2].1.min(e2), lb[r2].1.max(e2)));
            }
        }
        if ok {
            correct += 1;
        }
    }

    let mut planted = 0;
    let mut covered = 0;
    for (r, road) in roads.iter().enumerate() {
        let mut iv = std::mem::take(&mut spans[r]);
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in iv {
            match merged.last_mut() {
                Some(last) if lo <= last.1 + 1e-9 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        for (a, b) in road.edges() {
            planted += 1;
            let (sa, sb) = (geo[r].locate(pos(a)?).1, geo[r].locate(pos(b)?).1);
            let (lo, hi) = (sa.min(sb), sa.max(sb));
            if merged.iter().any(|&(x, y)| x <= lo + 1e-6 && y >= hi - 1e-6) {
                covered += 1;
            }
        }
    }

    Ok(RoadEvaluation {
        precision: if segments.is_empty() { 0.0 } else { correct as f64 / segments.len() as f64 },
        recall: if planted == 0 { 0.0 } else { covered as f64 / planted as f64 },
        segments: segments.len(),
        correct_segments: correct,
        planted_edges: planted,
        covered_edges: covered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // two roads meeting at town 1: A (0,0)-(40,0) and B (40,0)-(40,40),
    // stations every 10 km
    fn fixture() -> (Vec<PlantedRoad>, HashMap<u32, ProjectedPoint>, Projection) {
        let proj = Projection::new(0.0, 0.0);
        let mut positions = HashMap::new();
        let mut id = 1;
        let mut ids_a = Vec::new();
        for k in 0..=4 {
            positions.insert(id, ProjectedPoint::new(10.0 * k as f64, 0.0));
            ids_a.push(id);
            id += 1;
        }
        let mut ids_b = vec![*ids_a.last().unwrap()];
        for k in 1..=4 {
            positions.insert(id, ProjectedPoint::new(40.0, 10.0 * k as f64));
            ids_b.push(id);
            id += 1;
        }
        positions.insert(99, ProjectedPoint::new(0.0, 40.0));
        let line = |pts: &[(f64, f64)]| pts.iter().map(|&(x, y)| proj.inverse(ProjectedPoint::new(x, y))).collect();
        let roads = vec![
            PlantedRoad { id: 0, towns: (0, 1), polyline: line(&[(0.0, 0.0), (40.0, 0.0)]), stations: ids_a },
            PlantedRoad { id: 1, towns: (1, 2), polyline: line(&[(40.0, 0.0), (40.0, 40.0)]), stations: ids_b },
        ];
        (roads, positions, proj)
    }

    fn seg(from: u32, to: u32) -> RoadSegment {
        RoadSegment { from, to, weight: 10, component: 0 }
    }

    #[test]
    fn exact_edges_score_perfectly() {
        let (roads, pos, proj) = fixture();
        let segs: Vec<RoadSegment> = roads.iter().flat_map(|r| r.edges().map(|(a, b)| seg(a, b))).collect();
        let ev = evaluate_roads(&segs, &pos, &roads, &proj, 1.0).unwrap();
        assert_eq!(ev.precision, 1.0);
        assert_eq!(ev.recall, 1.0);
        assert_eq!(ev.planted_edges, 8);
    }

    #[test]
    fn long_skips_and_corner_cuts_cover() {
        let (roads, pos, proj) = fixture();
        // 1 -> 4 along road A, then 4 -> 7 cutting the corner at town 1
        let segs = [seg(1, 4), seg(4, 7), seg(7, 9)];
        let ev = evaluate_roads(&segs, &pos, &roads, &proj, 1.0).unwrap();
        assert_eq!(ev.precision, 1.0);
        assert_eq!(ev.recall, 1.0);
    }

    #[test]
    fn off_network_segment_counts_against_precision() {
        let (roads, pos, proj) = fixture();
        let segs = [seg(1, 2), seg(1, 99)];
        let ev = evaluate_roads(&segs, &pos, &roads, &proj, 1.0).unwrap();
        assert_eq!(ev.correct_segments, 1);
        assert_eq!(ev.precision, 0.5);
        assert_eq!(ev.covered_edges, 1);
    }

    #[test]
    fn nothing_detected() {
        let (roads, pos, proj) = fixture();
        let ev = evaluate_roads(&[], &pos, &roads, &proj, 1.0).unwrap();
        assert_eq!((ev.precision, ev.recall), (0.0, 0.0));
    }
}
