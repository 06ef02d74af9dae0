use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod inputs;
mod manifest;

use commands::Run;
use config::RunConfig;
use error::CliError;
use inputs::Inputs;
use manifest::Output;

/// Geospatial analytics over call detail records.
///
/// Settings come from an optional key = value file (`--config`); flags
/// override it. Every run writes its artifacts and a manifest.json into the
/// output directory.
#[derive(Debug, Parser)]
#[command(name = "cdrscope", version)]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory [default: out]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for all randomness [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Station table (id, lon, lat; tab separated)
    #[arg(long, global = true, value_name = "PATH")]
    stations: Option<PathBuf>,
    /// CDR files, as a glob pattern
    #[arg(long, global = true, value_name = "GLOB")]
    cdr: Option<String>,
    /// Population raster (ESRI ASCII grid)
    #[arg(long, global = true, value_name = "PATH")]
    raster: Option<PathBuf>,
    /// Boundary polygons (GeoJSON)
    #[arg(long, global = true, value_name = "PATH")]
    boundary: Option<PathBuf>,
    /// Planted road network for evaluating road detection (GeoJSON)
    #[arg(long, global = true, value_name = "PATH")]
    truth: Option<PathBuf>,
    /// Lower velocity bound, km/h
    #[arg(long, global = true)]
    v_min: Option<f64>,
    /// Upper velocity bound, km/h
    #[arg(long, global = true)]
    v_max: Option<f64>,
    /// Shortest accepted gap between events, s
    #[arg(long, global = true)]
    dt_min: Option<f64>,
    /// Longest accepted gap between events, s
    #[arg(long, global = true)]
    dt_max: Option<f64>,
    /// Edges seen fewer times are dropped
    #[arg(long, global = true)]
    min_weight: Option<u64>,
    /// Components with fewer stations are dropped
    #[arg(long, global = true)]
    min_component: Option<usize>,
    /// Grid side(s) in km, comma separated [default: 5,10,20]
    #[arg(long, global = true)]
    grid_side: Option<String>,
    /// Population cutoff between small and large regimes
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Energy scenario: base, i or ii [default: all three]
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Cartogram grid size, a power of two [default: 256]
    #[arg(long, global = true)]
    cartogram_grid: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Write a synthetic dataset (stations, CDRs, raster, boundary, roads)
    Synth,
    /// Voronoi coverage cells, population per cell, north/south split
    Voronoi,
    /// Population cartogram of the boundary regions and stations
    Cartogram,
    /// Log-log regression of call intensity on population
    Scaling,
    /// Spatial autocorrelation of calls and population
    Autocorr,
    /// Network energy and emissions table
    Energy,
    /// Road inference from consecutive events
    Roads,
    /// Distance/time heatmap of consecutive events
    Heatmap,
    /// Every analysis; synthesizes data when no inputs are given
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Voronoi => "voronoi",
            Command::Cartogram => "cartogram",
            Command::Scaling => "scaling",
            Command::Autocorr => "autocorr",
            Command::Energy => "energy",
            Command::Roads => "roads",
            Command::Heatmap => "heatmap",
            Command::All => "all",
        }
    }
}

impl Cli {
    fn flags(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.to_string_lossy().into_owned());
        put("out", path(&self.out));
        put("seed", self.seed.map(|v| v.to_string()));
        put("stations", path(&self.stations));
        put("cdr", self.cdr.clone());
        put("raster", path(&self.raster));
        put("boundary", path(&self.boundary));
        put("truth", path(&self.truth));
        put("v_min", self.v_min.map(|v| v.to_string()));
        put("v_max", self.v_max.map(|v| v.to_string()));
        put("dt_min", self.dt_min.map(|v| v.to_string()));
        put("dt_max", self.dt_max.map(|v| v.to_string()));
        put("min_weight", self.min_weight.map(|v| v.to_string()));
        put("min_component", self.min_component.map(|v| v.to_string()));
        put("grid_side", self.grid_side.clone());
        put("cutoff", self.cutoff.map(|v| v.to_string()));
        put("scenario", self.scenario.clone());
        put("cartogram_grid", self.cartogram_grid.map(|v| v.to_string()));
        m
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CDRSCOPE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("CDRSCOPE_THREADS must be a positive integer, got {v:?}")))?;
    // fails only if a pool already exists, which cannot happen this early
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::warn!("thread pool already initialised; CDRSCOPE_THREADS ignored");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    init_threads()?;
    let mut cfg = RunConfig::load(cli.config.as_deref(), cli.flags())?;
    let mut out = Output::new(&cfg.out)?;
    let command = cli.command;
    let synthesize = command == Command::Synth || (command == Command::All && !cfg.has_any_input());
    if synthesize {
        let dir = commands::synth(&cfg, &mut out)?;
        if command == Command::All {
            cfg.use_dataset(&dir);
        }
    }
    cfg.validate()?;
    let mut run = Run {
        cfg: &cfg,
        inputs: Inputs::new(&cfg),
        out,
    };
    match command {
        Command::Synth => {}
        Command::Voronoi => run.voronoi()?,
        Command::Cartogram => run.cartogram()?,
        Command::Scaling => run.scaling()?,
        Command::Autocorr => run.autocorr()?,
        Command::Energy => print!("{}", run.energy()?),
        Command::Roads => run.roads()?,
        Command::Heatmap => run.heatmap()?,
        Command::All => {
            run.energy()?;
            run.voronoi()?;
            run.scaling()?;
            run.autocorr()?;
            run.roads()?;
            run.heatmap()?;
            run.cartogram()?;
        }
    }
    let inputs = run.inputs.files_read();
    let manifest = run.out.write_manifest(command.name(), &cfg, &inputs)?;
    log::info!("wrote {}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
