use crate::{Error, Result};

/// Latitude and population of one coverage cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub lat: f64,
    pub population: f64,
}

/// Coverage comparison of the cells north and south of a latitude.
///
/// `extra_north` is the number of stations the north would need to reach the
/// southern population per cell, `round(n_north * (mean_north / mean_south - 1))`,
/// and `energy_increase_north` expresses it as a fraction of all stations.
/// The `*_south` fields are the mirror-image quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NorthSouthSplit {
    pub n_north: usize,
    pub n_south: usize,
    pub mean_north: f64,
    pub mean_south: f64,
    pub extra_north: i64,
    pub extra_south: i64,
    pub energy_increase_north: f64,
    pub energy_increase_south: f64,
}

/// Cells with `lat >= latitude_cut` count as north.
pub fn north_south_split(
    cells: &[CellSummary],
    latitude_cut: f64,
    total_stations: usize,
) -> Result<NorthSouthSplit> {
    let (north, south): (Vec<&CellSummary>, Vec<&CellSummary>) =
        cells.iter().partition(|c| c.lat >= latitude_cut);
    if north.is_empty() || south.is_empty() {
        return Err(Error::Insufficient(format!(
            "latitude {latitude_cut} leaves an empty partition ({} north, {} south)",
            north.len(),
            south.len()
        )));
    }
    if total_stations == 0 {
        return Err(Error::Invalid("total station count must be positive".into()));
    }
    let mean = |v: &[&CellSummary]| v.iter().map(|c| c.population).sum::<f64>() / v.len() as f64;
    let (mean_north, mean_south) = (mean(&north), mean(&south));
    if !(mean_south > 0.0 && mean_north > 0.0) {
        return Err(Error::Insufficient("mean population per cell must be positive on both sides".into()));
    }
    let extra_north = (north.len() as f64 * (mean_north / mean_south - 1.0)).round() as i64;
    let extra_south = (south.len() as f64 * (mean_south / mean_north - 1.0)).round() as i64;
    Ok(NorthSouthSplit {
        n_north: north.len(),
        n_south: south.len(),
        mean_north,
        mean_south,
        extra_north,
        extra_south,
        energy_increase_north: extra_north as f64 / total_stations as f64,
        energy_increase_south: extra_south as f64 / total_stations as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_densities_need_no_extra_stations() {
        let cells: Vec<_> = (0..20)
            .map(|i| CellSummary { lat: 5.0 + i as f64 * 0.3, population: 1000.0 })
            .collect();
        let s = north_south_split(&cells, 8.0, 20).unwrap();
        assert_eq!(s.extra_north, 0);
        assert_eq!(s.extra_south, 0);
        assert_eq!(s.energy_increase_north, 0.0);
    }

    /// 113 northern cells averaging 26 405 persons, 1125 southern ones
    /// averaging 14 414, 1238 stations in all.
    fn national_fixture() -> Vec<CellSummary> {
        // +-500 in pairs keeps the mean exact; an odd last cell sits on it
        let spread = |k: usize, n: usize| match (k + 1 == n && n % 2 == 1, k % 2) {
            (true, _) => 0.0,
            (false, 0) => 500.0,
            _ => -500.0,
        };
        let side = move |n: usize, lat: f64, mean: f64| {
            (0..n).map(move |k| CellSummary {
                lat: lat + (k % 7) as f64 * 0.1,
                population: mean + spread(k, n),
            })
        };
        side(113, 8.5, 26_405.0).chain(side(1125, 5.5, 14_414.0)).collect()
    }

    #[test]
    fn national_figures() {
        let s = north_south_split(&national_fixture(), 8.0, 1238).unwrap();
        assert_eq!(s.n_north, 113);
        assert!((s.mean_north - 26_405.0).abs() < 1e-9);
        assert!((s.mean_south - 14_414.0).abs() < 1e-9);
        assert_eq!(s.extra_north, 94);
        assert!((0.0759..=0.0760).contains(&s.energy_increase_north), "{}", s.energy_increase_north);
    }

    #[test]
    fn empty_partition_is_an_error() {
        let cells = [CellSummary { lat: 5.0, population: 1.0 }];
        assert!(north_south_split(&cells, 8.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn mirroring_swaps_outputs(
            raw in prop::collection::vec((-10.0f64..10.0, 1.0f64..1e5), 2..60),
            cut in -2.0f64..2.0,
        ) {
            let cells: Vec<_> = raw.iter().map(|&(lat, population)| CellSummary { lat, population }).collect();
            prop_assume!(cells.iter().all(|c| c.lat != cut));
            let mirrored: Vec<_> = cells.iter().map(|c| CellSummary { lat: -c.lat, population: c.population }).collect();
            if let (Ok(a), Ok(b)) = (north_south_split(&cells, cut, 100), north_south_split(&mirrored, -cut, 100)) {
                prop_assert_eq!(a.mean_north, b.mean_south);
                prop_assert_eq!(a.mean_south, b.mean_north);
                prop_assert_eq!(a.extra_north, b.extra_south);
                prop_assert_eq!(a.extra_south, b.extra_north);
                prop_assert_eq!(a.energy_increase_north, b.energy_increase_south);
            }
        }
    }
}
