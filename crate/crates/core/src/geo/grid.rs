use std::collections::{BTreeMap, HashMap};

use super::{PlanarRegion, ProjectedPoint, Projection};
use crate::ingest::{CdrEvent, PopulationRaster, StationTable};

/// Square grid anchored at a fixed origin. Cell `(i, j)` covers
/// `[x0 + i*side, x0 + (i+1)*side) x [y0 + j*side, y0 + (j+1)*side)`, so a
/// point on a shared edge belongs to the cell with the larger index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: ProjectedPoint,
    pub side_km: f64,
}

impl GridSpec {
    pub fn new(origin: ProjectedPoint, side_km: f64) -> Self {
        assert!(side_km > 0.0, "grid side must be positive");
        GridSpec { origin, side_km }
    }

    /// Grid anchored at the lower-left corner of the boundary's bounding box.
    pub fn anchored(boundary: &PlanarRegion, side_km: f64) -> Self {
        GridSpec::new(boundary.bbox().min, side_km)
    }

    pub fn index(&self, p: ProjectedPoint) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.side_km).floor() as i64,
            ((p.y - self.origin.y) / self.side_km).floor() as i64,
        )
    }

    pub fn centroid(&self, i: i64, j: i64) -> ProjectedPoint {
        ProjectedPoint::new(
            self.origin.x + (i as f64 + 0.5) * self.side_km,
            self.origin.y + (j as f64 + 0.5) * self.side_km,
        )
    }
}

/// Population and call activity inside one grid square.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBin {
    pub i: i64,
    pub j: i64,
    pub side_km: f64,
    pub population: f64,
    pub call_count: u64,
    /// Total call duration in seconds.
    pub call_duration: f64,
}

/// Counts population (by raster-centroid containment) and calls (by the
/// position of the handling station) on a square grid. Bins with neither are
/// omitted; the rest come back ordered by `(i, j)`.
pub fn grid_bin<'a>(
    raster: &PopulationRaster,
    events: impl IntoIterator<Item = &'a CdrEvent>,
    stations: &StationTable,
    proj: &Projection,
    spec: &GridSpec,
) -> Vec<GridBin> {
    let mut bins: BTreeMap<(i64, i64), GridBin> = BTreeMap::new();
    let empty = |key: (i64, i64)| GridBin {
        i: key.0,
        j: key.1,
        side_km: spec.side_km,
        population: 0.0,
        call_count: 0,
        call_duration: 0.0,
    };
    for ((lon, lat), pop) in raster.populated_cells() {
        let key = spec.index(proj.forward(lon, lat));
        bins.entry(key).or_insert_with(|| empty(key)).population += pop;
    }
    let station_bin: HashMap<u32, (i64, i64)> = stations
        .stations()
        .iter()
        .map(|s| (s.id, spec.index(proj.forward(s.lon, s.lat))))
        .collect();
    for ev in events {
        if let Some(&key) = station_bin.get(&ev.station_id) {
            let b = bins.entry(key).or_insert_with(|| empty(key));
            b.call_count += 1;
            b.call_duration += ev.duration_s.unwrap_or(0) as f64;
        }
    }
    bins.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::BaseStation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn edge_point_goes_to_larger_index() {
        let g = GridSpec::new(ProjectedPoint::new(0.0, 0.0), 5.0);
        assert_eq!(g.index(ProjectedPoint::new(10.0, 5.0)), (2, 1));
        assert_eq!(g.index(ProjectedPoint::new(9.999, 4.999)), (1, 0));
        assert_eq!(g.index(ProjectedPoint::new(-0.1, 0.0)), (-1, 0));
    }

    #[test]
    fn one_station_ten_calls() {
        let proj = Projection::new(0.0, 0.0);
        let stations = StationTable::new(vec![BaseStation::new(1, 0.01, 0.01)]).unwrap();
        let raster = PopulationRaster::new(1, 1, 0.0, 0.0, 0.02, -9999.0, vec![3.0]).unwrap();
        let events: Vec<_> = (0..10).map(|t| CdrEvent::new(1, t, 1)).collect();
        let bins = grid_bin(&raster, &events, &stations, &proj, &GridSpec::new(ProjectedPoint::new(0.0, 0.0), 5.0));
        assert_eq!(bins.len(), 1);
        assert_eq!(bins[0].call_count, 10);
        assert_eq!(bins[0].population, 3.0);
    }

    #[test]
    fn totals_are_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let proj = Projection::new(-5.0, 7.0);
        let stations: Vec<_> = (0..80)
            .map(|i| BaseStation::new(i, rng.gen_range(-6.0..-4.0), rng.gen_range(6.0..8.0)))
            .collect();
        let table = StationTable::new(stations).unwrap();
        let values: Vec<f64> = (0..40 * 40).map(|_| rng.gen_range(0..500) as f64).collect();
        let total_pop: f64 = values.iter().sum();
        let raster = PopulationRaster::new(40, 40, -6.0, 6.0, 0.05, -9999.0, values).unwrap();
        let events: Vec<_> = (0..5000)
            .map(|t| {
                let mut e = CdrEvent::new(t % 17, t as i64, rng.gen_range(0..80));
                e.duration_s = Some(rng.gen_range(0..300));
                e
            })
            .collect();
        let total_dur: f64 = events.iter().map(|e| e.duration_s.unwrap() as f64).sum();
        for side in [5.0, 10.0, 20.0] {
            let spec = GridSpec::new(proj.forward(-6.0, 6.0), side);
            let bins = grid_bin(&raster, &events, &table, &proj, &spec);
            assert_eq!(bins.iter().map(|b| b.call_count).sum::<u64>(), 5000);
            assert_eq!(bins.iter().map(|b| b.population).sum::<f64>(), total_pop);
            assert_eq!(bins.iter().map(|b| b.call_duration).sum::<f64>(), total_dur);
        }
    }
}
