//! Deterministic synthetic datasets in the same formats as the real inputs.
//!
//! The generated country is a rectangle-ish outline holding a handful of
//! towns joined by wiggly roads. Stations sit at town centres, around
//! them, along the roads at a fixed spacing and scattered over the rest of
//! the land. Agents live at raster-weighted homes; those inside a town make
//! day trips along the shortest road path to another town. Every agent
//! emits events from a stationary renewal process with Lomax inter-event
//! gaps, and each event is attributed to the station nearest the agent's
//! true position at that instant.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use geojson::{Feature, FeatureCollection, GeoJson, Geometry, JsonObject, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::{
    write_cdr, write_stations, BaseStation, BoundarySet, CdrEvent, PopulationRaster, Region,
    RegionRole,
};
use crate::geo::{ProjectedPoint, Projection, SiteIndex};
use crate::{Error, Result};

pub const STATIONS_FILE: &str = "ANT_POS.TSV";
pub const CDR_FILE: &str = "POS_SAMPLE_0.TSV";
pub const RASTER_FILE: &str = "population.asc";
pub const BOUNDARY_FILE: &str = "boundary.geojson";
pub const TRUTH_FILE: &str = "roads_truth.geojson";

const NODATA: f64 = -9999.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub center_lon: f64,
    pub center_lat: f64,
    pub width_km: f64,
    pub height_km: f64,
    pub n_towns: usize,
    pub n_roads: usize,
    /// Total station count. Town and road stations are placed first; the
    /// remainder is scattered.
    pub n_stations: usize,
    pub road_station_spacing_km: f64,
    /// Stations ringed around each town centre.
    pub town_satellites: usize,
    pub town_radius_km: f64,
    /// Extra stations placed at the exact coordinates of existing ones.
    pub duplicate_stations: usize,
    pub n_users: usize,
    pub days: u32,
    pub start_epoch: i64,
    pub events_per_day: f64,
    /// Tail exponent of the inter-event gap distribution (> 1).
    pub tail_exponent: f64,
    /// Daily probability that a town dweller makes a trip.
    pub trip_probability: f64,
    pub speed_kmh: (f64, f64),
    /// Mean call duration; `None` writes three-column CDR lines.
    pub mean_call_s: Option<f64>,
    pub raster_cellsize_deg: f64,
    /// Rural population density, persons per km².
    pub background_density: f64,
    pub town_population: (f64, f64),
    /// Keep the per-event trace of true positions.
    pub trace: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            center_lon: -5.5,
            center_lat: 7.5,
            width_km: 400.0,
            height_km: 400.0,
            n_towns: 8,
            n_roads: 10,
            n_stations: 400,
            road_station_spacing_km: 8.0,
            town_satellites: 4,
            town_radius_km: 4.0,
            duplicate_stations: 0,
            n_users: 500,
            days: 30,
            start_epoch: 1_322_697_600, // 2011-12-01
            events_per_day: 40.0,
            tail_exponent: 1.5,
            trip_probability: 0.3,
            speed_kmh: (40.0, 100.0),
            mean_call_s: Some(90.0),
            raster_cellsize_deg: 0.02,
            background_density: 5.0,
            town_population: (50_000.0, 400_000.0),
            trace: false,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_stations == 0 {
            return Err(Error::Invalid("synthetic config needs at least one station".into()));
        }
        if self.n_towns < 2 {
            return Err(Error::Invalid("synthetic config needs at least two towns".into()));
        }
        if self.tail_exponent <= 1.0 {
            return Err(Error::Invalid(format!(
                "tail exponent {} must exceed 1 for a finite mean gap",
                self.tail_exponent
            )));
        }
        if !(self.events_per_day > 0.0) {
            return Err(Error::Invalid("events_per_day must be positive".into()));
        }
        if !(self.speed_kmh.0 > 0.0 && self.speed_kmh.0 <= self.speed_kmh.1) {
            return Err(Error::Invalid("speed range must be positive and ordered".into()));
        }
        if !(self.width_km > 0.0 && self.height_km > 0.0 && self.road_station_spacing_km > 0.0) {
            return Err(Error::Invalid("domain size and station spacing must be positive".into()));
        }
        Ok(())
    }

    /// Mean inter-event gap in seconds.
    pub fn mean_gap_s(&self) -> f64 {
        86_400.0 / self.events_per_day
    }

    /// Scale of the Lomax gap distribution with the configured mean.
    pub fn gap_scale_s(&self) -> f64 {
        self.mean_gap_s() * (self.tail_exponent - 1.0)
    }
}

/// A planted road between two towns, with the stations placed along it in
/// order from `towns.0` to `towns.1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedRoad {
    pub id: usize,
    pub towns: (usize, usize),
    /// Polyline in (lon, lat).
    pub polyline: Vec<(f64, f64)>,
    pub stations: Vec<u32>,
}

impl PlantedRoad {
    /// Consecutive station pairs along the road.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.stations.windows(2).map(|w| (w[0], w[1]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Town {
    pub lon: f64,
    pub lat: f64,
    pub population: f64,
    pub station_id: u32,
}

/// True position of an agent at one emitted event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub user_id: u64,
    pub timestamp: i64,
    pub position: ProjectedPoint,
    pub station_id: u32,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub projection: Projection,
    pub stations: Vec<BaseStation>,
    pub events: Vec<CdrEvent>,
    pub raster: PopulationRaster,
    pub boundary: BoundarySet,
    pub towns: Vec<Town>,
    pub roads: Vec<PlantedRoad>,
    /// Per-event true positions, in event order; empty unless requested.
    pub trace: Vec<TraceEntry>,
    /// Number of agents living inside a town (the ones that travel).
    pub urban_users: usize,
}

impl SynthDataset {
    /// Writes the five dataset files into `dir` and returns their paths.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();

        let path = dir.join(STATIONS_FILE);
        write_file(&path, |w| write_stations(w, &self.stations))?;
        written.push(path);

        let path = dir.join(CDR_FILE);
        write_file(&path, |w| write_cdr(w, &self.events))?;
        written.push(path);

        let path = dir.join(RASTER_FILE);
        write_file(&path, |w| self.raster.write(w))?;
        written.push(path);

        let path = dir.join(BOUNDARY_FILE);
        let text = GeoJson::FeatureCollection(self.boundary.to_geojson()).to_string();
        write_file(&path, |w| w.write_all(text.as_bytes()))?;
        written.push(path);

        let path = dir.join(TRUTH_FILE);
        let text = GeoJson::FeatureCollection(roads_to_geojson(&self.roads)).to_string();
        write_file(&path, |w| w.write_all(text.as_bytes()))?;
        written.push(path);

        Ok(written)
    }
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Ground-truth roads as LineString features. Each road feature carries its
/// ordered station list; each consecutive station pair is also written as
/// an `edge` feature.
pub fn roads_to_geojson(roads: &[PlantedRoad]) -> FeatureCollection {
    let mut features = Vec::new();
    for r in roads {
        let mut props = JsonObject::new();
        props.insert("kind".into(), "road".into());
        props.insert("road".into(), r.id.into());
        props.insert("town_a".into(), r.towns.0.into());
        props.insert("town_b".into(), r.towns.1.into());
        props.insert("stations".into(), r.stations.clone().into());
        let coords = r.polyline.iter().map(|&(x, y)| vec![x, y]).collect();
        features.push(Feature {
            geometry: Some(Geometry::new(Value::LineString(coords))),
            properties: Some(props),
            ..Default::default()
        });
    }
    for r in roads {
        for (a, b) in r.edges() {
            let mut props = JsonObject::new();
            props.insert("kind".into(), "edge".into());
            props.insert("road".into(), r.id.into());
            props.insert("from".into(), a.into());
            props.insert("to".into(), b.into());
            features.push(Feature {
                geometry: None,
                properties: Some(props),
                ..Default::default()
            });
        }
    }
    FeatureCollection {
        bbox: None,
        features,
        foreign_members: None,
    }
}

/// Reads the road features written by [`roads_to_geojson`].
pub fn read_roads(path: impl AsRef<Path>) -> Result<Vec<PlantedRoad>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fc = match text.parse::<GeoJson>()? {
        GeoJson::FeatureCollection(fc) => fc,
        _ => return Err(Error::Invalid(format!("{}: expected a FeatureCollection", path.display()))),
    };
    let mut roads = Vec::new();
    for f in fc.features {
        if f.property("kind").and_then(|v| v.as_str()) != Some("road") {
            continue;
        }
        let bad = || Error::Invalid(format!("{}: malformed road feature", path.display()));
        let get = |k: &str| f.property(k).and_then(|v| v.as_u64()).ok_or_else(bad);
        let id = get("road")? as usize;
        let towns = (get("town_a")? as usize, get("town_b")? as usize);
        let stations = f
            .property("stations")
            .and_then(|v| v.as_array())
            .ok_or_else(bad)?
            .iter()
            .map(|v| v.as_u64().map(|s| s as u32).ok_or_else(bad))
            .collect::<Result<Vec<_>>>()?;
        let polyline = match f.geometry.as_ref().map(|g| &g.value) {
            Some(Value::LineString(ls)) => ls.iter().map(|p| (p[0], p[1])).collect(),
            _ => return Err(bad()),
        };
        roads.push(PlantedRoad {
            id,
            towns,
            polyline,
            stations,
        });
    }
    roads.sort_by_key(|r| r.id);
    Ok(roads)
}

fn lomax(rng: &mut impl Rng, shape: f64, scale: f64) -> f64 {
    let u: f64 = rng.gen();
    scale * ((1.0 - u).powf(-1.0 / shape) - 1.0)
}

fn polyline_length(pts: &[ProjectedPoint]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Point at arc length `s` along a polyline.
fn point_along(pts: &[ProjectedPoint], mut s: f64) -> ProjectedPoint {
    for w in pts.windows(2) {
        let len = w[0].dist(w[1]);
        if s <= len && len > 0.0 {
            return w[0] + (w[1] - w[0]) * (s / len);
        }
        s -= len;
    }
    *pts.last().unwrap()
}

fn segments_cross(a: ProjectedPoint, b: ProjectedPoint, c: ProjectedPoint, d: ProjectedPoint) -> bool {
    let o = |p: ProjectedPoint, q: ProjectedPoint, r: ProjectedPoint| (q - p).cross(r - p);
    let (d1, d2) = (o(a, b, c), o(a, b, d));
    let (d3, d4) = (o(c, d, a), o(c, d, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

struct Layout {
    towns: Vec<ProjectedPoint>,
    town_pop: Vec<f64>,
    town_station: Vec<u32>,
    /// (town a, town b, projected polyline, station ids in order)
    roads: Vec<(usize, usize, Vec<ProjectedPoint>, Vec<u32>)>,
    station_pos: Vec<ProjectedPoint>,
    boundary: Vec<ProjectedPoint>,
}

fn build_layout(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Layout> {
    let (hw, hh) = (cfg.width_km / 2.0, cfg.height_km / 2.0);

    // outline: points around the rectangle pushed outward by up to 5%
    let mut boundary = Vec::new();
    let per_side = 4;
    let corners = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)];
    for k in 0..4 {
        let (x0, y0) = corners[k];
        let (x1, y1) = corners[(k + 1) % 4];
        let (nx, ny) = ((y1 - y0).signum(), -(x1 - x0).signum());
        for s in 0..per_side {
            let f = s as f64 / per_side as f64;
            let push = if s == 0 { 0.0 } else { rng.gen_range(0.0..0.05) * cfg.width_km.min(cfg.height_km) };
            boundary.push(ProjectedPoint::new(x0 + (x1 - x0) * f + nx * push, y0 + (y1 - y0) * f + ny * push));
        }
    }

    // towns in the inner 80% with a minimum separation
    let min_sep = 0.6 * (cfg.width_km * cfg.height_km / cfg.n_towns as f64).sqrt();
    let mut towns: Vec<ProjectedPoint> = Vec::new();
    let mut sep = min_sep;
    while towns.len() < cfg.n_towns {
        let mut placed = false;
        for _ in 0..1000 {
            let p = ProjectedPoint::new(rng.gen_range(-0.8 * hw..0.8 * hw), rng.gen_range(-0.8 * hh..0.8 * hh));
            if towns.iter().all(|t| t.dist(p) >= sep) {
                towns.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            sep *= 0.9;
        }
    }
    let (pmin, pmax) = cfg.town_population;
    let town_pop: Vec<f64> = (0..cfg.n_towns)
        .map(|_| (rng.gen_range(pmin.ln()..=pmax.ln())).exp())
        .collect();

    // road network: minimum spanning tree, then shortest non-crossing extras
    let n = towns.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((towns[a].dist(towns[b]), a, b));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then((p.1, p.2).cmp(&(q.1, q.2))));
    let mut dsu = super::stations::DisjointSet::new(n);
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    for &(_, a, b) in &pairs {
        if dsu.find(a) != dsu.find(b) {
            dsu.union(a, b);
            chosen.push((a, b));
        }
    }
    for &(_, a, b) in &pairs {
        if chosen.len() >= cfg.n_roads {
            break;
        }
        if chosen.contains(&(a, b)) {
            continue;
        }
        let crosses = chosen.iter().any(|&(c, d)| {
            let shared = a == c || a == d || b == c || b == d;
            !shared && segments_cross(towns[a], towns[b], towns[c], towns[d])
        });
        if !crosses {
            chosen.push((a, b));
        }
    }

    let mut station_pos: Vec<ProjectedPoint> = Vec::new();
    let mut town_station = Vec::new();
    for &t in &towns {
        town_station.push(station_pos.len() as u32 + 1);
        station_pos.push(t);
    }
    for &t in &towns {
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        for k in 0..cfg.town_satellites {
            let ang = phase + std::f64::consts::TAU * k as f64 / cfg.town_satellites as f64;
            let r = cfg.town_radius_km * rng.gen_range(0.4..0.8);
            station_pos.push(t + ProjectedPoint::new(ang.cos(), ang.sin()) * r);
        }
    }

    let mut roads = Vec::new();
    for &(a, b) in &chosen {
        let (pa, pb) = (towns[a], towns[b]);
        let d = pb - pa;
        let len = d.norm_sq().sqrt();
        let normal = ProjectedPoint::new(-d.y, d.x) * (1.0 / len);
        let amp1 = rng.gen_range(-0.08..0.08) * len;
        let amp2 = rng.gen_range(-0.03..0.03) * len;
        let steps = (len / 2.0).ceil().max(2.0) as usize;
        let poly: Vec<ProjectedPoint> = (0..=steps)
            .map(|k| {
                let s = k as f64 / steps as f64;
                let off = amp1 * (std::f64::consts::PI * s).sin() + amp2 * (2.0 * std::f64::consts::PI * s).sin();
                pa + d * s + normal * off
            })
            .collect();
        let total = polyline_length(&poly);
        let mut ids = vec![town_station[a]];
        let count = (total / cfg.road_station_spacing_km).round().max(1.0) as usize;
        let step = total / count as f64;
        for k in 1..count {
            let p = point_along(&poly, step * k as f64);
            ids.push(station_pos.len() as u32 + 1);
            station_pos.push(p);
        }
        ids.push(town_station[b]);
        roads.push((a, b, poly, ids));
    }

    // scattered fill inside the rectangle, kept away from existing stations
    let structural = station_pos.len();
    if structural > cfg.n_stations {
        log::warn!(
            "town and road layout needs {structural} stations, more than the configured {}",
            cfg.n_stations
        );
    }
    let fill = cfg.n_stations.saturating_sub(structural);
    let keep_off = 0.6 * cfg.road_station_spacing_km;
    let mut attempts = 0;
    let mut placed = 0;
    while placed < fill {
        let p = ProjectedPoint::new(rng.gen_range(-hw..hw), rng.gen_range(-hh..hh));
        attempts += 1;
        if attempts < 200 * fill.max(1) && station_pos.iter().any(|q| q.dist(p) < keep_off) {
            continue;
        }
        station_pos.push(p);
        placed += 1;
    }

    for _ in 0..cfg.duplicate_stations {
        let k = rng.gen_range(0..station_pos.len());
        station_pos.push(station_pos[k]);
    }

    Ok(Layout {
        towns,
        town_pop,
        town_station,
        roads,
        station_pos,
        boundary,
    })
}

fn build_raster(cfg: &SynthConfig, layout: &Layout, proj: &Projection, boundary: &[ProjectedPoint]) -> Result<PopulationRaster> {
    let lonlat: Vec<(f64, f64)> = boundary.iter().map(|&p| proj.inverse(p)).collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &lonlat {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let cs = cfg.raster_cellsize_deg;
    let ncols = ((x1 - x0) / cs).ceil() as usize;
    let nrows = ((y1 - y0) / cs).ceil() as usize;
    let sigma = cfg.town_radius_km / 2.0;
    let values: Vec<f64> = (0..nrows)
        .into_par_iter()
        .flat_map_iter(|row| {
            let lat = y0 + (nrows - row) as f64 * cs - cs / 2.0;
            let layout = &layout;
            (0..ncols).map(move |col| {
                let lon = x0 + (col as f64 + 0.5) * cs;
                let p = proj.forward(lon, lat);
                if !crate::geo::ring_contains(boundary, p) {
                    return NODATA;
                }
                // cell area in km² from the local scale of the projection
                let dx = proj.forward(lon + cs, lat).x - p.x;
                let dy = proj.forward(lon, lat + cs).y - p.y;
                let area = dx.abs() * dy.abs();
                let mut density = cfg.background_density;
                for (t, &pop) in layout.towns.iter().zip(&layout.town_pop) {
                    let d2 = t.dist_sq(p);
                    density += pop / (2.0 * std::f64::consts::PI * sigma * sigma) * (-d2 / (2.0 * sigma * sigma)).exp();
                }
                (density * area).round()
            })
        })
        .collect();
    PopulationRaster::new(ncols, nrows, x0, y0, cs, NODATA, values)
}

/// Piecewise-linear movement: times in seconds since the epoch and positions.
#[derive(Debug, Clone)]
struct Trip {
    times: Vec<f64>,
    points: Vec<ProjectedPoint>,
}

impl Trip {
    fn position(&self, t: f64) -> ProjectedPoint {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.points[0];
        }
        if k >= self.times.len() {
            return *self.points.last().unwrap();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        self.points[k - 1] + (self.points[k] - self.points[k - 1]) * f
    }
}

struct RoadGraph {
    /// next hop on the shortest path, `next[a][b]`
    next: Vec<Vec<Option<usize>>>,
    /// road index joining each adjacent town pair
    road_of: Vec<Vec<Option<usize>>>,
}

impl RoadGraph {
    fn new(layout: &Layout) -> Self {
        let n = layout.towns.len();
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        let mut next = vec![vec![None; n]; n];
        let mut road_of = vec![vec![None; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0.0;
            next[i][i] = Some(i);
        }
        for (k, (a, b, poly, _)) in layout.roads.iter().enumerate() {
            let len = polyline_length(poly);
            dist[*a][*b] = len;
            dist[*b][*a] = len;
            next[*a][*b] = Some(*b);
            next[*b][*a] = Some(*a);
            road_of[*a][*b] = Some(k);
            road_of[*b][*a] = Some(k);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if dist[i][k] + dist[k][j] < dist[i][j] {
                        dist[i][j] = dist[i][k] + dist[k][j];
                        next[i][j] = next[i][k];
                    }
                }
            }
        }
        RoadGraph { next, road_of }
    }

    /// Road polyline points from town `a` to town `b`.
    fn path(&self, layout: &Layout, a: usize, b: usize) -> Vec<ProjectedPoint> {
        let mut pts = vec![layout.towns[a]];
        let mut cur = a;
        while cur != b {
            let Some(nxt) = self.next[cur][b] else { break };
            let road = &layout.roads[self.road_of[cur][nxt].expect("adjacent towns share a road")];
            if road.0 == cur {
                pts.extend(road.2.iter().skip(1));
            } else {
                pts.extend(road.2.iter().rev().skip(1));
            }
            cur = nxt;
        }
        pts
    }
}

fn plan_trips(
    cfg: &SynthConfig,
    layout: &Layout,
    graph: &RoadGraph,
    home: ProjectedPoint,
    home_town: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Trip> {
    let mut trips = Vec::new();
    let start = cfg.start_epoch as f64;
    let mut free_from = start;
    for day in 0..cfg.days {
        if rng.gen::<f64>() >= cfg.trip_probability {
            continue;
        }
        let day0 = start + day as f64 * 86_400.0;
        let depart = day0 + rng.gen_range(6.0..14.0) * 3600.0;
        let mut dest_town = rng.gen_range(0..layout.towns.len() - 1);
        if dest_town >= home_town {
            dest_town += 1;
        }
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = cfg.town_radius_km * rng.gen::<f64>().sqrt();
        let dest = layout.towns[dest_town] + ProjectedPoint::new(ang.cos(), ang.sin()) * r;
        let speed = rng.gen_range(cfg.speed_kmh.0..=cfg.speed_kmh.1) / 3600.0;
        let stay = rng.gen_range(1.0..4.0) * 3600.0;

        let mut out = vec![home];
        out.extend(graph.path(layout, home_town, dest_town));
        out.push(dest);
        let mut back = out.clone();
        back.reverse();

        let mut times = vec![depart];
        let mut points = vec![out[0]];
        for w in out.windows(2) {
            times.push(times.last().unwrap() + w[0].dist(w[1]) / speed);
            points.push(w[1]);
        }
        times.push(times.last().unwrap() + stay);
        points.push(dest);
        for w in back.windows(2) {
            times.push(times.last().unwrap() + w[0].dist(w[1]) / speed);
            points.push(w[1]);
        }
        // skip trips that overlap the previous one or run past the next morning
        if depart < free_from || *times.last().unwrap() > day0 + 86_400.0 + 6.0 * 3600.0 {
            continue;
        }
        free_from = *times.last().unwrap();
        trips.push(Trip { times, points });
    }
    trips
}

struct UserOutput {
    events: Vec<CdrEvent>,
    trace: Vec<TraceEntry>,
    urban: bool,
}

/// A square country of `side_deg` degrees centred on (0, 0) whose west and
/// east halves hold `west` and `east` persons per raster cell, with
/// `cells` x `cells` raster cells. The halves are subdivisions named
/// "west" and "east".
pub fn split_square(side_deg: f64, cells: usize, west: f64, east: f64) -> Result<(PopulationRaster, BoundarySet, Projection)> {
    if cells < 2 || cells % 2 != 0 {
        return Err(Error::Invalid(format!("split square needs an even cell count, got {cells}")));
    }
    let h = side_deg / 2.0;
    let values = (0..cells * cells)
        .map(|k| if k % cells < cells / 2 { west } else { east })
        .collect();
    let raster = PopulationRaster::new(cells, cells, -h, -h, side_deg / cells as f64, -9999.0, values)?;
    let rect = |x0: f64, x1: f64| vec![(x0, -h), (x1, -h), (x1, h), (x0, h)];
    let boundary = BoundarySet::new(vec![
        Region::simple("square", RegionRole::Outline, rect(-h, h))?,
        Region::simple("west", RegionRole::Subdivision, rect(-h, 0.0))?,
        Region::simple("east", RegionRole::Subdivision, rect(0.0, h))?,
    ])?;
    Ok((raster, boundary, Projection::new(0.0, 0.0)))
}


/// Generates a dataset. The result depends only on `cfg` and `seed`.
pub fn generate_synthetic(cfg: &SynthConfig, seed: u64) -> Result<SynthDataset> {
    cfg.validate()?;
    let proj = Projection::new(cfg.center_lon, cfg.center_lat);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = build_layout(cfg, &mut rng)?;

    let stations: Vec<BaseStation> = layout
        .station_pos
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let (lon, lat) = proj.inverse(p);
            BaseStation::new(i as u32 + 1, lon, lat)
        })
        .collect();
    // consumers see the written coordinates, so match against those
    let station_xy: Vec<ProjectedPoint> = stations.iter().map(|s| proj.forward(s.lon, s.lat)).collect();
    let index = SiteIndex::new(&station_xy);

    let boundary_ring: Vec<(f64, f64)> = layout.boundary.iter().map(|&p| proj.inverse(p)).collect();
    let mut regions = vec![Region::simple("synthetic", RegionRole::Outline, boundary_ring)?];
    // quadrant subdivisions about the projection centre
    let big = 2.0 * (cfg.width_km + cfg.height_km);
    for (name, sx, sy) in [("north-east", 1.0, 1.0), ("north-west", -1.0, 1.0), ("south-west", -1.0, -1.0), ("south-east", 1.0, -1.0)] {
        let (a, b) = (ProjectedPoint::new(0.0, 0.0), ProjectedPoint::new(sx * big, sy * big));
        let (lo, hi) = (ProjectedPoint::new(a.x.min(b.x), a.y.min(b.y)), ProjectedPoint::new(a.x.max(b.x), a.y.max(b.y)));
        let quad = [lo, ProjectedPoint::new(hi.x, lo.y), hi, ProjectedPoint::new(lo.x, hi.y)];
        let ring: Vec<(f64, f64)> = crate::geo::clip_ring_convex(&layout.boundary, &quad)
            .iter()
            .map(|&p| proj.inverse(p))
            .collect();
        regions.push(Region::simple(name, RegionRole::Subdivision, ring)?);
    }
    let boundary = BoundarySet::new(regions)?;
    let raster = build_raster(cfg, &layout, &proj, &layout.boundary)?;

    // home sampling weights
    let mut cells = Vec::new();
    let mut cum = Vec::new();
    let mut acc = 0.0;
    for row in 0..raster.nrows {
        for col in 0..raster.ncols {
            if let Some(v) = raster.value(row, col) {
                if v > 0.0 {
                    acc += v;
                    cells.push((row, col));
                    cum.push(acc);
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::Invalid("synthetic raster has no population".into()));
    }

    let graph = RoadGraph::new(&layout);
    let end = cfg.start_epoch as f64 + cfg.days as f64 * 86_400.0;
    let shape = cfg.tail_exponent;
    let scale = cfg.gap_scale_s();
    let duration_dist = cfg.mean_call_s.map(|m| Exp::new(1.0 / m.max(1e-9)).expect("positive rate"));

    let per_user: Vec<UserOutput> = (0..cfg.n_users)
        .into_par_iter()
        .map(|u| {
            let mut r = rng.clone();
            r.set_stream(u as u64 + 1);
            let target = r.gen_range(0.0..acc);
            let (row, col) = cells[cum.partition_point(|&c| c <= target).min(cells.len() - 1)];
            let (clon, clat) = raster.centroid(row, col);
            let half = raster.cellsize / 2.0;
            let lon = clon + r.gen_range(-half..half);
            let lat = clat + r.gen_range(-half..half);
            let home = proj.forward(lon, lat);
            let (home_town, town_d) = layout
                .towns
                .iter()
                .enumerate()
                .map(|(i, t)| (i, t.dist(home)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let urban = town_d <= cfg.town_radius_km;
            let trips = if urban {
                plan_trips(cfg, &layout, &graph, home, home_town, &mut r)
            } else {
                Vec::new()
            };

            let user_id = u as u64 + 1;
            let mut events = Vec::new();
            let mut trace = Vec::new();
            let mut t = cfg.start_epoch as f64 + lomax(&mut r, shape - 1.0, scale);
            let mut last_ts = i64::MIN;
            let mut trip_k = 0;
            while t < end {
                while trip_k < trips.len() && *trips[trip_k].times.last().unwrap() < t {
                    trip_k += 1;
                }
                let pos = match trips.get(trip_k) {
                    Some(tr) if tr.times[0] <= t => tr.position(t),
                    _ => home,
                };
                let (idx, _) = index.nearest(pos).expect("at least one station");
                let station_id = stations[idx].id;
                let ts = (t.floor() as i64).max(last_ts + 1);
                last_ts = ts;
                let mut ev = CdrEvent::new(user_id, ts, station_id);
                if let Some(d) = &duration_dist {
                    ev.duration_s = Some(d.sample(&mut r).round() as u32);
                }
                events.push(ev);
                if cfg.trace {
                    trace.push(TraceEntry {
                        user_id,
                        timestamp: ts,
                        position: pos,
                        station_id,
                    });
                }
                t += lomax(&mut r, shape, scale);
            }
            UserOutput { events, trace, urban }
        })
        .collect();

    let urban_users = per_user.iter().filter(|u| u.urban).count();
    let mut events = Vec::with_capacity(per_user.iter().map(|u| u.events.len()).sum());
    let mut trace = Vec::new();
    for u in per_user {
        events.extend(u.events);
        trace.extend(u.trace);
    }

    let towns = layout
        .towns
        .iter()
        .zip(&layout.town_pop)
        .zip(&layout.town_station)
        .map(|((&p, &population), &station_id)| {
            let (lon, lat) = proj.inverse(p);
            Town {
                lon,
                lat,
                population,
                station_id,
            }
        })
        .collect();
    let roads = layout
        .roads
        .iter()
        .enumerate()
        .map(|(id, (a, b, poly, ids))| PlantedRoad {
            id,
            towns: (*a, *b),
            polyline: poly.iter().map(|&p| proj.inverse(p)).collect(),
            stations: ids.clone(),
        })
        .collect();

    log::info!(
        "synthetic dataset: {} stations, {} users ({} urban), {} events",
        stations.len(),
        cfg.n_users,
        urban_users,
        events.len()
    );
    Ok(SynthDataset {
        projection: proj,
        stations,
        events,
        raster,
        boundary,
        towns,
        roads,
        trace,
        urban_users,
    })
}
