use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::{Error, Result};

/// A base station: identifier plus geographic coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseStation {
    pub id: u32,
    pub lon: f64,
    pub lat: f64,
}

impl BaseStation {
    pub fn new(id: u32, lon: f64, lat: f64) -> Self {
        BaseStation { id, lon, lat }
    }
}

/// Reads a tab-separated station table (`id\tlon\tlat`, no header).
pub fn parse_stations(path: impl AsRef<Path>) -> Result<Vec<BaseStation>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_stations(BufReader::new(file), &path.display().to_string())
}

pub fn read_stations<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<BaseStation>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                source_name,
                line_no,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let id: u32 = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(source_name, line_no, format!("bad station id {:?}", fields[0])))?;
        let lon = parse_coord(fields[1], source_name, line_no, "longitude")?;
        let lat = parse_coord(fields[2], source_name, line_no, "latitude")?;
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::parse(
                source_name,
                line_no,
                format!("coordinate ({lon}, {lat}) out of range"),
            ));
        }
        if !seen.insert(id) {
            return Err(Error::DuplicateStation { id, line: line_no });
        }
        out.push(BaseStation { id, lon, lat });
    }
    Ok(out)
}

fn parse_coord(field: &str, source_name: &str, line: usize, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(source_name, line, format!("bad {what} {field:?}")))
}

/// Writes stations in the same layout [`read_stations`] accepts. Coordinates
/// use the shortest representation that parses back to the identical `f64`.
pub fn write_stations<W: Write>(mut w: W, stations: &[BaseStation]) -> std::io::Result<()> {
    for s in stations {
        writeln!(w, "{}\t{}\t{}", s.id, s.lon, s.lat)?;
    }
    Ok(())
}

/// Immutable lookup table from station id to coordinate.
#[derive(Debug, Clone, Default)]
pub struct StationTable {
    stations: Vec<BaseStation>,
    index: HashMap<u32, usize>,
}

impl StationTable {
    pub fn new(stations: Vec<BaseStation>) -> Result<Self> {
        let mut index = HashMap::with_capacity(stations.len());
        for (i, s) in stations.iter().enumerate() {
            if index.insert(s.id, i).is_some() {
                return Err(Error::DuplicateStation { id: s.id, line: i + 1 });
            }
        }
        Ok(StationTable { stations, index })
    }

    pub fn get(&self, id: u32) -> Option<&BaseStation> {
        self.index.get(&id).map(|&i| &self.stations[i])
    }

    pub fn contains(&self, id: u32) -> bool {
        self.index.contains_key(&id)
    }

    pub fn stations(&self) -> &[BaseStation] {
        &self.stations
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }
}

/// A distinct station location and the stations sharing it.
#[derive(Debug, Clone, PartialEq)]
pub struct StationLocation {
    pub lon: f64,
    pub lat: f64,
    /// Member ids, ascending. The first is the representative.
    pub members: Vec<u32>,
}

impl StationLocation {
    pub fn representative(&self) -> u32 {
        self.members[0]
    }
}

/// Groups stations whose coordinates agree within `tolerance` degrees (on
/// both axes). Grouping is transitive: chains of near neighbours merge.
///
/// Each group is placed at the coordinate of its lowest member id, and groups
/// are returned ordered by that id.
pub fn dedupe_station_locations(stations: &[BaseStation], tolerance: f64) -> Vec<StationLocation> {
    assert!(tolerance >= 0.0, "tolerance must be non-negative");
    let n = stations.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        stations[a]
            .lon
            .total_cmp(&stations[b].lon)
            .then(stations[a].lat.total_cmp(&stations[b].lat))
    });

    let mut dsu = DisjointSet::new(n);
    // sweep over longitude; only stations inside the open window can match
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if stations[j].lon - stations[i].lon > tolerance {
                break;
            }
            if (stations[j].lat - stations[i].lat).abs() <= tolerance {
                dsu.union(i, j);
            }
        }
    }

    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        groups.entry(dsu.find(i)).or_default().push(i);
    }
    let mut out: Vec<StationLocation> = groups
        .into_values()
        .map(|idx| {
            let rep = *idx.iter().min_by_key(|&&i| stations[i].id).unwrap();
            let mut members: Vec<u32> = idx.iter().map(|&i| stations[i].id).collect();
            members.sort_unstable();
            StationLocation {
                lon: stations[rep].lon,
                lat: stations[rep].lat,
                members,
            }
        })
        .collect();
    out.sort_by_key(|g| g.representative());
    out
}

pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Vec<BaseStation>> {
        read_stations(text.as_bytes(), "test")
    }

    #[test]
    fn parses_single_row() {
        let s = parse("7\t-4.01\t5.35\n").unwrap();
        assert_eq!(s, vec![BaseStation::new(7, -4.01, 5.35)]);
    }

    #[test]
    fn empty_file_gives_empty_list() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse("1\t-4.0\t5.0\n2\tabc\t5.1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_is_hard_error() {
        let err = parse("1\t-4.0\t5.0\n1\t-4.1\t5.1\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateStation { id: 1, line: 2 }));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = parse_stations("/nonexistent/ANT_POS.TSV").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn three_coincident_stations_form_one_group() {
        let s = vec![
            BaseStation::new(5, -4.0, 5.0),
            BaseStation::new(2, -4.0, 5.0),
            BaseStation::new(9, -4.0, 5.0),
            BaseStation::new(1, -5.0, 6.0),
        ];
        let g = dedupe_station_locations(&s, 0.0);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].members, vec![1]);
        assert_eq!(g[1].members, vec![2, 5, 9]);
    }

    #[test]
    fn distinct_stations_keep_their_count() {
        let s: Vec<_> = (0..20)
            .map(|i| BaseStation::new(i, i as f64 * 0.01, 0.0))
            .collect();
        assert_eq!(dedupe_station_locations(&s, 0.0).len(), 20);
    }

    #[test]
    fn representative_is_lowest_id_coordinate() {
        let s = vec![BaseStation::new(4, 1.0, 1.0), BaseStation::new(3, 1.0005, 1.0)];
        let g = dedupe_station_locations(&s, 0.001);
        assert_eq!(g.len(), 1);
        assert_eq!((g[0].lon, g[0].lat), (1.0005, 1.0));
    }

    /// O(n^2) pairwise-merge oracle.
    fn brute_force_groups(s: &[BaseStation], tol: f64) -> usize {
        let mut dsu = DisjointSet::new(s.len());
        for i in 0..s.len() {
            for j in 0..s.len() {
                if (s[i].lon - s[j].lon).abs() <= tol && (s[i].lat - s[j].lat).abs() <= tol {
                    dsu.union(i, j);
                }
            }
        }
        (0..s.len()).filter(|&i| dsu.find(i) == i).count()
    }

    fn stations_strategy() -> impl Strategy<Value = Vec<BaseStation>> {
        // coarse lattice so exact and near coincidences are common
        prop::collection::vec((0i32..30, 0i32..30), 0..500).prop_map(|pts| {
            pts.into_iter()
                .enumerate()
                .map(|(i, (a, b))| BaseStation::new(i as u32, a as f64 * 0.01, b as f64 * 0.01))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sweep_matches_pairwise_oracle(s in stations_strategy(), tol_steps in 0u32..3) {
            let tol = tol_steps as f64 * 0.0100001;
            prop_assert_eq!(dedupe_station_locations(&s, tol).len(), brute_force_groups(&s, tol));
        }

        #[test]
        fn dedupe_is_idempotent(s in stations_strategy(), tol_steps in 0u32..3) {
            let tol = tol_steps as f64 * 0.0100001;
            let once = dedupe_station_locations(&s, tol);
            let reps: Vec<BaseStation> = once
                .iter()
                .map(|g| BaseStation::new(g.representative(), g.lon, g.lat))
                .collect();
            let twice = dedupe_station_locations(&reps, tol);
            prop_assert_eq!(twice.len(), once.len());
            for (a, b) in once.iter().zip(&twice) {
                prop_assert_eq!((a.lon, a.lat, a.representative()), (b.lon, b.lat, b.representative()));
            }
        }

        #[test]
        fn write_then_parse_round_trips(
            raw in prop::collection::vec((-180.0f64..=180.0, -90.0f64..=90.0), 0..50)
        ) {
            let s: Vec<_> = raw.iter().enumerate().map(|(i, &(lon, lat))| BaseStation::new(i as u32, lon, lat)).collect();
            let mut buf = Vec::new();
            write_stations(&mut buf, &s).unwrap();
            prop_assert_eq!(read_stations(buf.as_slice(), "buf").unwrap(), s);
        }
    }
}
