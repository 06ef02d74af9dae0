//! Inputs are loaded on first use and shared between the analyses of one run.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use cdrscope::geo::{PlanarRegion, ProjectedPoint, Projection};
use cdrscope::ingest::synth::{read_roads, PlantedRoad};
use cdrscope::ingest::{
    dedupe_station_locations, parse_stations, read_cdr, BaseStation, BoundarySet, CdrEvent, PopulationRaster,
    StationLocation, StationTable,
};
use once_cell::unsync::OnceCell;

use crate::config::RunConfig;
use crate::error::CliError;

pub struct Stations {
    pub list: Vec<BaseStation>,
    pub table: StationTable,
    /// Distinct locations; their representatives label Voronoi sites and
    /// road vertices.
    pub locations: Vec<StationLocation>,
    /// Station id to the representative id of its location.
    pub representative: HashMap<u32, u32>,
}

pub struct Inputs<'a> {
    cfg: &'a RunConfig,
    read: RefCell<BTreeSet<PathBuf>>,
    stations: OnceCell<Stations>,
    events: OnceCell<Vec<CdrEvent>>,
    raster: OnceCell<PopulationRaster>,
    boundary: OnceCell<BoundarySet>,
    truth: OnceCell<Vec<PlantedRoad>>,
}

fn required<'p>(path: &'p Option<PathBuf>, what: &str, command: &str) -> Result<&'p Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Input(format!("{command} needs --{what}")))
}

impl<'a> Inputs<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        Inputs {
            cfg,
            read: RefCell::default(),
            stations: OnceCell::new(),
            events: OnceCell::new(),
            raster: OnceCell::new(),
            boundary: OnceCell::new(),
            truth: OnceCell::new(),
        }
    }

    /// Every file read so far.
    pub fn files_read(&self) -> Vec<PathBuf> {
        self.read.borrow().iter().cloned().collect()
    }

    fn note(&self, p: &Path) {
        self.read.borrow_mut().insert(p.to_path_buf());
    }

    pub fn stations(&self, command: &str) -> Result<&Stations, CliError> {
        self.stations.get_or_try_init(|| {
            let path = required(&self.cfg.stations, "stations", command)?;
            self.note(path);
            let list = parse_stations(path)?;
            let table = StationTable::new(list.clone())?;
            let locations = dedupe_station_locations(&list, self.cfg.dedupe_tolerance);
            let representative = locations
                .iter()
                .flat_map(|l| l.members.iter().map(move |&m| (m, l.representative())))
                .collect();
            if locations.len() < list.len() {
                log::info!("{} stations at {} distinct locations", list.len(), locations.len());
            }
            Ok(Stations {
                list,
                table,
                locations,
                representative,
            })
        })
    }

    pub fn events(&self, command: &str) -> Result<&[CdrEvent], CliError> {
        self.events
            .get_or_try_init(|| {
                if self.cfg.cdr.is_none() {
                    return Err(CliError::Input(format!("{command} needs --cdr")));
                }
                let stations = self.stations(command)?;
                let mut all = Vec::new();
                for path in self.cfg.cdr_files()? {
                    self.note(&path);
                    let (events, report) = read_cdr(&path, &stations.table)?;
                    if report.total() > 0 {
                        log::warn!(
                            "{}: skipped {} lines ({} unknown station, {} corrupt)",
                            path.display(),
                            report.total(),
                            report.unknown_station,
                            report.corrupt
                        );
                        for (line, msg) in &report.samples {
                            log::debug!("{}:{line}: {msg}", path.display());
                        }
                    }
                    all.extend(events);
                }
                log::info!("{} CDR events", all.len());
                Ok(all)
            })
            .map(Vec::as_slice)
    }

    pub fn has_events(&self) -> bool {
        self.cfg.cdr.is_some()
    }

    /// Events with station ids replaced by their location representative.
    pub fn located_events(&self, command: &str) -> Result<Vec<CdrEvent>, CliError> {
        let rep = &self.stations(command)?.representative;
        Ok(self
            .events(command)?
            .iter()
            .map(|e| CdrEvent {
                station_id: rep[&e.station_id],
                ..*e
            })
            .collect())
    }

    pub fn raster(&self, command: &str) -> Result<&PopulationRaster, CliError> {
        self.raster.get_or_try_init(|| {
            let path = required(&self.cfg.raster, "raster", command)?;
            self.note(path);
            Ok(PopulationRaster::from_path(path)?)
        })
    }

    pub fn boundary(&self, command: &str) -> Result<&BoundarySet, CliError> {
        self.boundary.get_or_try_init(|| {
            let path = required(&self.cfg.boundary, "boundary", command)?;
            self.note(path);
            Ok(BoundarySet::from_path(path)?)
        })
    }

    pub fn truth(&self) -> Result<Option<&[PlantedRoad]>, CliError> {
        let Some(path) = &self.cfg.truth else {
            return Ok(None);
        };
        self.truth
            .get_or_try_init(|| {
                self.note(path);
                Ok::<_, CliError>(read_roads(path)?)
            })
            .map(|r| Some(r.as_slice()))
    }

    /// Centred on the boundary outline when one is given, else on the
    /// stations.
    pub fn projection(&self, command: &str) -> Result<Projection, CliError> {
        if self.cfg.boundary.is_some() {
            return Ok(Projection::centered_on(self.boundary(command)?.outline().bbox()));
        }
        let s = self.stations(command)?;
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for st in &s.list {
            b = (b.0.min(st.lon), b.1.min(st.lat), b.2.max(st.lon), b.3.max(st.lat));
        }
        if s.list.is_empty() {
            return Err(CliError::Input("station table is empty".into()));
        }
        Ok(Projection::centered_on(b))
    }

    pub fn outline(&self, command: &str, proj: &Projection) -> Result<PlanarRegion, CliError> {
        Ok(PlanarRegion::project(self.boundary(command)?.outline(), proj))
    }

    /// Projected position of every station id, at its location's
    /// coordinates.
    pub fn positions(&self, command: &str, proj: &Projection) -> Result<HashMap<u32, ProjectedPoint>, CliError> {
        let s = self.stations(command)?;
        Ok(s.locations
            .iter()
            .flat_map(|l| {
                let p = proj.forward(l.lon, l.lat);
                l.members.iter().map(move |&m| (m, p))
            })
            .collect())
    }
}
