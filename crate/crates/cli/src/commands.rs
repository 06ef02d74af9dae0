use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;

use cdrscope::cartogram::{
    build_density, layer_geojson, region_shares, side_by_side_svg, solve_cartogram, MapLayer, SolverParams,
    StationMark,
};
use cdrscope::energy::{run_scenario, write_markdown, write_table_csv, EnergyScenario};
use cdrscope::geo::{
    cell_populations, grid_bin, north_south_split, rank_plot, voronoi, voronoi_geojson, write_rank_csv,
    CellSummary, GridBin, GridSpec, PlanarRegion, ProjectedPoint,
};
use cdrscope::ingest::synth::generate_synthetic;
use cdrscope::mobility::{
    detect_roads, evaluate_roads, extract_transitions, segments_geojson, transition_heatmap, write_heatmap_csv,
    write_segments_csv, Binning, RoadParams,
};
use cdrscope::scaling::{
    autocorrelation, fit_loglog, regime_cutoff, write_autocorr_csv, write_regression_csv, Field, Intensity, Regime,
};
use cdrscope::Error;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::inputs::Inputs;
use crate::manifest::Output;

/// Directory below the output directory that receives synthesized data.
pub const DATA_DIR: &str = "data";

pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub inputs: Inputs<'a>,
    pub out: Output,
}

fn geojson_text(fc: geojson::FeatureCollection) -> String {
    geojson::GeoJson::FeatureCollection(fc).to_string() + "\n"
}

/// Writes a synthetic dataset below `data/` and returns its directory.
pub fn synth(cfg: &RunConfig, out: &mut Output) -> Result<PathBuf, CliError> {
    let ds = generate_synthetic(&cfg.synth_config()?, cfg.seed)?;
    log::info!(
        "synthesized {} stations, {} events, {} roads",
        ds.stations.len(),
        ds.events.len(),
        ds.roads.len()
    );
    let dir = out.dir().join(DATA_DIR);
    for p in ds.write_to_dir(&dir).map_err(CliError::writing)? {
        out.record(p);
    }
    Ok(dir)
}

impl Run<'_> {
    pub fn voronoi(&mut self) -> Result<(), CliError> {
        const CMD: &str = "voronoi";
        let inp = &self.inputs;
        let proj = inp.projection(CMD)?;
        let outline = inp.outline(CMD, &proj)?;
        let stations = inp.stations(CMD)?;
        let raster = inp.raster(CMD)?;
        let sites: Vec<ProjectedPoint> = stations.locations.iter().map(|l| proj.forward(l.lon, l.lat)).collect();
        let labels: Vec<u32> = stations.locations.iter().map(|l| l.representative()).collect();
        let diagram = voronoi(&sites, &outline)?;
        let pops = cell_populations(&diagram, raster, &proj);
        let diagram = diagram.with_populations(&pops);
        log::info!(
            "{} cells, {:.0} persons assigned, {:.0} outside the boundary",
            diagram.cells.len(),
            pops.assigned,
            pops.outside
        );
        let rank = rank_plot(&pops.per_cell)?;
        let cells: Vec<CellSummary> = stations
            .locations
            .iter()
            .zip(&pops.per_cell)
            .map(|(l, &population)| CellSummary { lat: l.lat, population })
            .collect();
        let split = north_south_split(&cells, self.cfg.latitude_cut, cells.len())?;

        self.out.write_text("voronoi.geojson", &geojson_text(voronoi_geojson(&diagram, &proj, &labels)))?;
        self.out.write("voronoi_rank.csv", |w| write_rank_csv(w, &rank))?;
        let cut = self.cfg.latitude_cut;
        self.out.write("north_south.csv", |w| {
            writeln!(w, "quantity,value")?;
            writeln!(w, "latitude_cut,{cut}")?;
            writeln!(w, "cells,{}", cells.len())?;
            writeln!(w, "mean_population,{:.6}", rank.mean)?;
            writeln!(w, "median_population,{:.6}", rank.median)?;
            writeln!(w, "within_half_median,{}", rank.within_half_median)?;
            writeln!(w, "n_north,{}", split.n_north)?;
            writeln!(w, "n_south,{}", split.n_south)?;
            writeln!(w, "mean_north,{:.6}", split.mean_north)?;
            writeln!(w, "mean_south,{:.6}", split.mean_south)?;
            writeln!(w, "extra_north,{}", split.extra_north)?;
            writeln!(w, "extra_south,{}", split.extra_south)?;
            writeln!(w, "energy_increase_north,{:.6}", split.energy_increase_north)?;
            writeln!(w, "energy_increase_south,{:.6}", split.energy_increase_south)
        })?;
        Ok(())
    }

    pub fn cartogram(&mut self) -> Result<(), CliError> {
        const CMD: &str = "cartogram";
        let inp = &self.inputs;
        let proj = inp.projection(CMD)?;
        let boundary = inp.boundary(CMD)?;
        let raster = inp.raster(CMD)?;
        let n = self.cfg.cartogram_grid;
        let field = build_density(raster, boundary, &proj, n, n)?;
        let t = solve_cartogram(&field, &SolverParams::default())?;
        log::info!(
            "cartogram converged after {} steps at t = {:.3}, {} inverted cells",
            t.stats.steps,
            t.stats.final_time,
            t.inverted_cells()
        );

        let mut regions: Vec<PlanarRegion> = boundary.subdivisions().map(|r| PlanarRegion::project(r, &proj)).collect();
        if regions.is_empty() {
            regions.push(PlanarRegion::project(boundary.outline(), &proj));
        }
        let mut marks = Vec::new();
        if self.cfg.stations.is_some() {
            let stations = inp.stations(CMD)?;
            let mut calls: HashMap<u32, u64> = HashMap::new();
            if inp.has_events() {
                for e in inp.events(CMD)? {
                    *calls.entry(stations.representative[&e.station_id]).or_default() += 1;
                }
            }
            for l in &stations.locations {
                let id = l.representative();
                marks.push(StationMark {
                    id,
                    position: proj.forward(l.lon, l.lat),
                    calls: calls.get(&id).copied().unwrap_or(0),
                });
            }
        }
        let original = MapLayer {
            regions: regions.clone(),
            stations: marks.clone(),
        };
        let mut moved = MapLayer {
            regions: regions.iter().map(|r| t.transform_region(r)).collect::<Result<_, _>>()?,
            stations: Vec::with_capacity(marks.len()),
        };
        for m in marks {
            match t.forward(m.position) {
                Ok(position) => moved.stations.push(StationMark { position, ..m }),
                Err(Error::OutsideDomain { .. }) => log::warn!("station {} lies outside the cartogram domain", m.id),
                Err(e) => return Err(e.into()),
            }
        }
        let shares = region_shares(&t, raster, boundary, &proj)?;

        self.out.write_text("cartogram_original.geojson", &geojson_text(layer_geojson(&original, &proj)))?;
        self.out.write_text("cartogram.geojson", &geojson_text(layer_geojson(&moved, &proj)))?;
        self.out.write_text("cartogram.svg", &side_by_side_svg(&original, &moved))?;
        self.out.write("cartogram_shares.csv", |w| {
            writeln!(w, "region,population,population_fraction,area_fraction_before,area_fraction_after,error")?;
            for s in &shares {
                writeln!(
                    w,
                    "{},{:.3},{:.6},{:.6},{:.6},{:.6}",
                    s.name,
                    s.population,
                    s.population_fraction,
                    s.area_fraction_before,
                    s.area_fraction_after,
                    s.error()
                )?;
            }
            Ok(())
        })?;
        let st = t.stats;
        let (inverted, folded) = (t.inverted_cells(), t.folded_cells());
        self.out.write("cartogram_stats.csv", |w| {
            writeln!(w, "quantity,value")?;
            writeln!(w, "grid,{n}")?;
            writeln!(w, "cell_km,{:.6}", t.cell_km)?;
            writeln!(w, "steps,{}", st.steps)?;
            writeln!(w, "start_time,{:.6e}", st.start_time)?;
            writeln!(w, "final_time,{:.6e}", st.final_time)?;
            writeln!(w, "residual_cells,{:.6e}", st.residual)?;
            writeln!(w, "max_mass_drift,{:.3e}", st.max_mass_drift)?;
            writeln!(w, "max_displacement_km,{:.6}", t.max_displacement())?;
            writeln!(w, "inverted_cells,{inverted}")?;
            writeln!(w, "folded_cells,{folded}")
        })?;
        Ok(())
    }

    fn grid_bins(&self, cmd: &str, side: f64) -> Result<Vec<GridBin>, CliError> {
        let inp = &self.inputs;
        let proj = inp.projection(cmd)?;
        let outline = inp.outline(cmd, &proj)?;
        let spec = GridSpec::anchored(&outline, side);
        let stations = inp.stations(cmd)?;
        Ok(grid_bin(inp.raster(cmd)?, inp.events(cmd)?, &stations.table, &proj, &spec))
    }

    pub fn scaling(&mut self) -> Result<(), CliError> {
        const CMD: &str = "scaling";
        let with_duration = self.inputs.events(CMD)?.iter().any(|e| e.duration_s.is_some());
        let mut intensities = vec![Intensity::Count];
        if with_duration {
            intensities.push(Intensity::Duration);
        }
        let mut rows = Vec::new();
        for &side in &self.cfg.grid_sides {
            let cutoff = regime_cutoff(side, self.cfg.cutoff)?;
            let bins = self.grid_bins(CMD, side)?;
            for &intensity in &intensities {
                for regime in [Regime::Small, Regime::Large] {
                    match fit_loglog(&bins, cutoff, regime, intensity) {
                        Ok(r) => rows.push(r),
                        Err(Error::Insufficient(msg)) => log::warn!("{side} km grid: {msg}; fit skipped"),
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::Insufficient("no regime had enough populated bins to fit".into()).into());
        }
        self.out.write("scaling.csv", |w| write_regression_csv(w, &rows))?;
        Ok(())
    }

    pub fn autocorr(&mut self) -> Result<(), CliError> {
        const CMD: &str = "autocorr";
        for &side in &self.cfg.grid_sides {
            let bins = self.grid_bins(CMD, side)?;
            let calls = autocorrelation(&bins, Field::Calls, self.cfg.max_lag_km, side)?;
            let pop = autocorrelation(&bins, Field::Population, self.cfg.max_lag_km, side)?;
            self.out
                .write(&format!("autocorr_{side}km.csv"), |w| write_autocorr_csv(w, &calls, &pop))?;
        }
        Ok(())
    }

    /// Returns the table as CSV text.
    pub fn energy(&mut self) -> Result<String, CliError> {
        let starts = match &self.cfg.scenario {
            None => EnergyScenario::standard(),
            Some(name) => vec![EnergyScenario::by_name(name)
                .ok_or_else(|| CliError::Input(format!("unknown scenario {name:?}; use base, i or ii")))?],
        };
        let reports = starts
            .into_iter()
            .map(|s| run_scenario(&EnergyScenario::from_key_values(&self.cfg.energy, s)?))
            .collect::<Result<Vec<_>, _>>()?;
        let mut csv = Vec::new();
        write_table_csv(&mut csv, &reports).expect("writing to memory");
        let csv = String::from_utf8(csv).expect("table is UTF-8");
        self.out.write_text("energy_table.csv", &csv)?;
        self.out.write("energy_table.md", |w| write_markdown(w, &reports))?;
        Ok(csv)
    }

    fn road_params(&self, events: &[cdrscope::ingest::CdrEvent]) -> RoadParams {
        let c = self.cfg;
        let mut p = RoadParams::for_events(events);
        p.filter.v_min = c.v_min.unwrap_or(p.filter.v_min);
        p.filter.v_max = c.v_max.unwrap_or(p.filter.v_max);
        p.filter.dt_min = c.dt_min.unwrap_or(p.filter.dt_min);
        p.filter.dt_max = c.dt_max.unwrap_or(p.filter.dt_max);
        p.min_weight = c.min_weight.unwrap_or(p.min_weight);
        p.min_component = c.min_component.unwrap_or(p.min_component);
        p
    }

    pub fn roads(&mut self) -> Result<(), CliError> {
        const CMD: &str = "roads";
        let inp = &self.inputs;
        let proj = inp.projection(CMD)?;
        let pos = inp.positions(CMD, &proj)?;
        let events = inp.located_events(CMD)?;
        let params = self.road_params(&events);
        if params.min_weight < 1 || params.min_component < 1 {
            return Err(CliError::Input("min_weight and min_component must be at least 1".into()));
        }
        let det = detect_roads(&events, &pos, &params)?;
        let eval = match inp.truth()? {
            Some(roads) => Some(evaluate_roads(&det.segments, &pos, roads, &proj, self.cfg.eval_tolerance_km)?),
            None => None,
        };
        let fc = segments_geojson(&det.segments, &inp.stations(CMD)?.list);
        self.out.write_text("roads.geojson", &geojson_text(fc))?;
        self.out.write("roads.csv", |w| write_segments_csv(w, &det.segments))?;
        let tol = self.cfg.eval_tolerance_km;
        self.out.write("roads_summary.csv", |w| {
            writeln!(w, "quantity,value")?;
            writeln!(w, "v_min,{}", params.filter.v_min)?;
            writeln!(w, "v_max,{}", params.filter.v_max)?;
            writeln!(w, "dt_min,{}", params.filter.dt_min)?;
            writeln!(w, "dt_max,{}", params.filter.dt_max)?;
            writeln!(w, "min_weight,{}", params.min_weight)?;
            writeln!(w, "min_component,{}", params.min_component)?;
            writeln!(w, "transitions,{}", det.transitions)?;
            writeln!(w, "accepted,{}", det.accepted)?;
            writeln!(w, "edges,{}", det.graph.len())?;
            writeln!(w, "segments,{}", det.segments.len())?;
            if let Some(ev) = &eval {
                writeln!(w, "tolerance_km,{tol}")?;
                writeln!(w, "precision,{:.6}", ev.precision)?;
                writeln!(w, "recall,{:.6}", ev.recall)?;
                writeln!(w, "correct_segments,{}", ev.correct_segments)?;
                writeln!(w, "planted_edges,{}", ev.planted_edges)?;
                writeln!(w, "covered_edges,{}", ev.covered_edges)?;
            }
            Ok(())
        })?;
        if let Some(ev) = eval {
            log::info!("road precision {:.3}, recall {:.3}", ev.precision, ev.recall);
        }
        Ok(())
    }

    pub fn heatmap(&mut self) -> Result<(), CliError> {
        const CMD: &str = "heatmap";
        let inp = &self.inputs;
        let proj = inp.projection(CMD)?;
        let pos = inp.positions(CMD, &proj)?;
        let ts = extract_transitions(&inp.located_events(CMD)?, &pos)?;
        let h = transition_heatmap(
            &ts,
            Binning::Log {
                min: 0.1,
                max: 1000.0,
                count: 40,
            },
            Binning::Log {
                min: 1.0,
                max: 30.0 * 86_400.0,
                count: 40,
            },
        )?;
        self.out.write("heatmap.csv", |w| write_heatmap_csv(w, &h))?;
        Ok(())
    }
}
