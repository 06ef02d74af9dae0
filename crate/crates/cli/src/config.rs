//! Run configuration: a flat `key = value` file overlaid by command-line
//! flags.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use cdrscope::ingest::synth::SynthConfig;
use cdrscope::kv::{get_parsed, parse_key_values};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Keys accepted at top level. `energy.*` and `synth.*` are passed through
/// to the energy scenario and the synthetic generator.
const KEYS: &[&str] = &[
    "stations",
    "cdr",
    "raster",
    "boundary",
    "truth",
    "out",
    "seed",
    "v_min",
    "v_max",
    "dt_min",
    "dt_max",
    "min_weight",
    "min_component",
    "grid_side",
    "cutoff",
    "scenario",
    "cartogram_grid",
    "dedupe_tolerance",
    "latitude_cut",
    "max_lag",
    "eval_tolerance",
];

const SYNTH_KEYS: &[&str] = &["users", "days", "events_per_day", "stations", "towns", "roads"];

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub stations: Option<PathBuf>,
    /// Glob pattern; every match is read in path order.
    pub cdr: Option<String>,
    pub raster: Option<PathBuf>,
    pub boundary: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
    pub min_weight: Option<u64>,
    pub min_component: Option<usize>,
    pub grid_sides: Vec<f64>,
    pub cutoff: Option<f64>,
    pub scenario: Option<String>,
    pub cartogram_grid: usize,
    pub dedupe_tolerance: f64,
    pub latitude_cut: f64,
    pub max_lag_km: f64,
    pub eval_tolerance_km: f64,
    pub energy: BTreeMap<String, String>,
    synth: BTreeMap<String, String>,
    /// The merged key/value layer, used for hashing.
    merged: BTreeMap<String, String>,
}

impl RunConfig {
    /// Merges `file` (if any) with `flags`, flags winning. Relative paths in
    /// the file resolve against the file's directory.
    pub fn load(file: Option<&Path>, flags: BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut merged = BTreeMap::new();
        let mut base_dir = PathBuf::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
            merged = parse_key_values(&text, &path.display().to_string())?;
            base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        }
        // keys whose value still comes from the file after flags are applied
        let from_file: BTreeSet<String> = merged.keys().filter(|k| !flags.contains_key(*k)).cloned().collect();
        merged.extend(flags);
        for key in merged.keys() {
            let known = KEYS.contains(&key.as_str())
                || key.strip_prefix("energy.").is_some_and(|k| !k.is_empty())
                || key.strip_prefix("synth.").is_some_and(|k| SYNTH_KEYS.contains(&k));
            if !known {
                return Err(CliError::Input(format!("unknown configuration key {key:?}")));
            }
        }
        let resolve = |key: &str| -> Option<PathBuf> {
            merged.get(key).map(|v| {
                let p = PathBuf::from(v);
                if p.is_relative() && from_file.contains(key) {
                    base_dir.join(p)
                } else {
                    p
                }
            })
        };
        let cdr = resolve("cdr").map(|p| p.to_string_lossy().into_owned());
        let grid_sides = match merged.get("grid_side") {
            None => vec![5.0, 10.0, 20.0],
            Some(v) => v
                .split(',')
                .map(|s| match s.trim().parse::<f64>() {
                    Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
                    _ => Err(CliError::Input(format!("bad grid side {s:?}"))),
                })
                .collect::<Result<_, _>>()?,
        };
        let cartogram_grid = get_parsed::<usize>(&merged, "cartogram_grid")?.unwrap_or(256);
        if cartogram_grid < 4 || !cartogram_grid.is_power_of_two() {
            return Err(CliError::Input(format!(
                "cartogram grid {cartogram_grid} must be a power of two of at least 4"
            )));
        }
        let sub = |prefix: &str| -> BTreeMap<String, String> {
            merged
                .iter()
                .filter_map(|(k, v)| k.strip_prefix(prefix).map(|k| (k.to_string(), v.clone())))
                .collect()
        };
        Ok(RunConfig {
            stations: resolve("stations"),
            cdr,
            raster: resolve("raster"),
            boundary: resolve("boundary"),
            truth: resolve("truth"),
            out: resolve("out").unwrap_or_else(|| PathBuf::from("out")),
            seed: get_parsed(&merged, "seed")?.unwrap_or(DEFAULT_SEED),
            v_min: get_parsed(&merged, "v_min")?,
            v_max: get_parsed(&merged, "v_max")?,
            dt_min: get_parsed(&merged, "dt_min")?,
            dt_max: get_parsed(&merged, "dt_max")?,
            min_weight: get_parsed(&merged, "min_weight")?,
            min_component: get_parsed(&merged, "min_component")?,
            grid_sides,
            cutoff: get_parsed(&merged, "cutoff")?,
            scenario: merged.get("scenario").cloned(),
            cartogram_grid,
            dedupe_tolerance: get_parsed(&merged, "dedupe_tolerance")?.unwrap_or(0.0),
            latitude_cut: get_parsed(&merged, "latitude_cut")?.unwrap_or(8.0),
            max_lag_km: get_parsed(&merged, "max_lag")?.unwrap_or(200.0),
            eval_tolerance_km: get_parsed(&merged, "eval_tolerance")?.unwrap_or(5.0),
            energy: sub("energy."),
            synth: sub("synth."),
            merged,
        })
    }

    /// Every referenced input must exist; the CDR glob must match.
    pub fn validate(&self) -> Result<(), CliError> {
        for (key, path) in [
            ("stations", &self.stations),
            ("raster", &self.raster),
            ("boundary", &self.boundary),
            ("truth", &self.truth),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(CliError::Input(format!("{key} file {} does not exist", p.display())));
                }
            }
        }
        if self.cdr.is_some() {
            self.cdr_files()?;
        }
        if !(self.dedupe_tolerance >= 0.0) {
            return Err(CliError::Input("dedupe_tolerance must be non-negative".into()));
        }
        if !(self.max_lag_km > 0.0 && self.eval_tolerance_km > 0.0) {
            return Err(CliError::Input("max_lag and eval_tolerance must be positive".into()));
        }
        Ok(())
    }

    /// CDR files matching the glob, sorted.
    pub fn cdr_files(&self) -> Result<Vec<PathBuf>, CliError> {
        let Some(pattern) = &self.cdr else {
            return Ok(Vec::new());
        };
        let paths = glob::glob(pattern).map_err(|e| CliError::Input(format!("bad CDR pattern {pattern:?}: {e}")))?;
        let mut files = Vec::new();
        for p in paths {
            let p = p.map_err(|e| CliError::Input(format!("cannot read {}: {e}", e.path().display())))?;
            if p.is_file() {
                files.push(p);
            }
        }
        files.sort();
        if files.is_empty() {
            return Err(CliError::Input(format!("CDR pattern {pattern:?} matches no files")));
        }
        Ok(files)
    }

    pub fn synth_config(&self) -> Result<SynthConfig, CliError> {
        let mut c = SynthConfig::default();
        let m = &self.synth;
        if let Some(v) = get_parsed(m, "users")? {
            c.n_users = v;
        }
        if let Some(v) = get_parsed(m, "days")? {
            c.days = v;
        }
        if let Some(v) = get_parsed(m, "events_per_day")? {
            c.events_per_day = v;
        }
        if let Some(v) = get_parsed(m, "stations")? {
            c.n_stations = v;
        }
        if let Some(v) = get_parsed(m, "towns")? {
            c.n_towns = v;
        }
        if let Some(v) = get_parsed(m, "roads")? {
            c.n_roads = v;
        }
        Ok(c)
    }

    /// Points the input paths at a freshly synthesized dataset.
    pub fn use_dataset(&mut self, dir: &Path) {
        use cdrscope::ingest::synth::{BOUNDARY_FILE, CDR_FILE, RASTER_FILE, STATIONS_FILE, TRUTH_FILE};
        self.stations = Some(dir.join(STATIONS_FILE));
        self.cdr = Some(dir.join(CDR_FILE).to_string_lossy().into_owned());
        self.raster = Some(dir.join(RASTER_FILE));
        self.boundary = Some(dir.join(BOUNDARY_FILE));
        self.truth = Some(dir.join(TRUTH_FILE));
    }

    pub fn has_any_input(&self) -> bool {
        self.stations.is_some() || self.cdr.is_some() || self.raster.is_some() || self.boundary.is_some()
    }

    /// Merged settings without the output directory, which does not affect
    /// results.
    pub fn settings(&self) -> BTreeMap<String, String> {
        let mut m = self.merged.clone();
        m.remove("out");
        m.entry("seed".into()).or_insert_with(|| self.seed.to_string());
        m
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.settings() {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}
