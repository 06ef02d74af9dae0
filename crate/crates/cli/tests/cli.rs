use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cdrscope(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdrscope"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// A small synthetic dataset under `<tmp>/out/data`.
fn small_dataset(tmp: &Path) {
    std::fs::write(tmp.join("small.cfg"), "synth.users = 60\nsynth.days = 6\n").unwrap();
    let o = cdrscope(tmp, &["synth", "--config", "small.cfg", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = TempDir::new().unwrap();
    let o = cdrscope(tmp.path(), &["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("cartogram"));
    assert_eq!(code(&cdrscope(tmp.path(), &["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&cdrscope(tmp.path(), &[])), 1);
    assert_eq!(code(&cdrscope(tmp.path(), &["frobnicate"])), 1);
    assert_eq!(code(&cdrscope(tmp.path(), &["energy", "--v-min", "fast"])), 1);
}

#[test]
fn energy_base_scenario_writes_one_column() {
    let tmp = TempDir::new().unwrap();
    let o = cdrscope(tmp.path(), &["energy", "--scenario", "base", "--out", "e"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "quantity,BASE");
    assert_eq!(lines.len(), 8);
    assert!(lines[3].ends_with(",68.32"), "{}", lines[3]);
    let on_disk = std::fs::read_to_string(tmp.path().join("e/energy_table.csv")).unwrap();
    assert_eq!(on_disk, stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("run.cfg"), "scenario = ii\nenergy.market_share = 0.35\n").unwrap();
    let o = cdrscope(tmp.path(), &["energy", "--config", "run.cfg", "--scenario", "base", "--out", "e"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("quantity,BASE\n"));
    // 0.35 share: 1238 / 0.35 rounds to 3537 stations, 3537 * 2.1 * 8760 h
    assert!(stdout.contains(",65.07\n"), "{stdout}");
    let m = manifest(&tmp.path().join("e"));
    assert_eq!(m["config"]["scenario"], "base");
    assert_eq!(m["config"]["energy.market_share"], "0.35");
}

#[test]
fn unknown_scenario_and_unknown_key_are_input_errors() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&cdrscope(tmp.path(), &["energy", "--scenario", "iv"])), 2);
    std::fs::write(tmp.path().join("bad.cfg"), "v_mni = 3\n").unwrap();
    let o = cdrscope(tmp.path(), &["energy", "--config", "bad.cfg"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("v_mni"));
}

#[test]
fn missing_inputs_are_input_errors() {
    let tmp = TempDir::new().unwrap();
    let o = cdrscope(tmp.path(), &["voronoi"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--boundary") || stderr(&o).contains("--stations"), "{}", stderr(&o));
    let o = cdrscope(tmp.path(), &["roads", "--stations", "nowhere.tsv"]);
    assert_eq!(code(&o), 2);
    let o = cdrscope(tmp.path(), &["roads", "--cdr", "none_*.tsv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("matches no files"));
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cdrscope"))
        .current_dir(tmp.path())
        .env("CDRSCOPE_THREADS", "0")
        .args(["energy"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn corrupt_station_file_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    small_dataset(tmp.path());
    std::fs::write(tmp.path().join("broken.tsv"), "1\tnot-a-number\t5.0\n").unwrap();
    let o = cdrscope(
        tmp.path(),
        &["roads", "--stations", "broken.tsv", "--cdr", "out/data/POS_SAMPLE_0.TSV"],
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn empty_partition_is_a_computation_error() {
    let tmp = TempDir::new().unwrap();
    small_dataset(tmp.path());
    std::fs::write(
        tmp.path().join("north.cfg"),
        "stations = out/data/ANT_POS.TSV\nraster = out/data/population.asc\nboundary = out/data/boundary.geojson\nlatitude_cut = 60\n",
    )
    .unwrap();
    let o = cdrscope(tmp.path(), &["voronoi", "--config", "north.cfg", "--out", "v"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("empty partition"));
}

#[test]
fn config_paths_resolve_against_the_config_directory() {
    let tmp = TempDir::new().unwrap();
    small_dataset(tmp.path());
    let sub = tmp.path().join("out");
    std::fs::write(
        sub.join("run.cfg"),
        "stations = data/ANT_POS.TSV\ncdr = data/POS_*.TSV\nraster = data/population.asc\nboundary = data/boundary.geojson\n",
    )
    .unwrap();
    let o = cdrscope(tmp.path(), &["heatmap", "--config", "out/run.cfg", "--out", "h"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest(&tmp.path().join("h"));
    let inputs: Vec<&String> = m["inputs"].as_object().unwrap().keys().collect();
    // stations, CDRs and the boundary (for the projection centre)
    assert_eq!(inputs.len(), 3, "{inputs:?}");
    assert!(inputs.iter().all(|k| k.starts_with("out/data/")), "{inputs:?}");
}

#[test]
fn roads_on_synthetic_fixture_match_planted_network() {
    let tmp = TempDir::new().unwrap();
    let o = cdrscope(tmp.path(), &["synth", "--out", "d"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = cdrscope(
        tmp.path(),
        &[
            "roads",
            "--stations",
            "d/data/ANT_POS.TSV",
            "--cdr",
            "d/data/POS_SAMPLE_0.TSV",
            "--boundary",
            "d/data/boundary.geojson",
            "--truth",
            "d/data/roads_truth.geojson",
            "--out",
            "r",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: BTreeMap<String, String> = std::fs::read_to_string(tmp.path().join("r/roads_summary.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect();
    let get = |k: &str| summary[k].parse::<f64>().unwrap();
    assert!(get("recall") >= 0.9, "{summary:?}");
    assert!(get("precision") >= 0.8, "{summary:?}");
    let gj: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("r/roads.geojson")).unwrap()).unwrap();
    let features = gj["features"].as_array().unwrap();
    assert_eq!(features.len() as f64, get("segments"));
    assert!(features.iter().all(|f| f["properties"]["weight"].as_u64().unwrap() >= 10));
}

#[test]
fn raising_min_weight_never_adds_segments() {
    let tmp = TempDir::new().unwrap();
    small_dataset(tmp.path());
    let mut prev: Option<Vec<String>> = None;
    for w in ["1", "3", "10"] {
        let out = format!("w{w}");
        let o = cdrscope(
            tmp.path(),
            &[
                "roads",
                "--stations",
                "out/data/ANT_POS.TSV",
                "--cdr",
                "out/data/POS_SAMPLE_0.TSV",
                "--min-weight",
                w,
                "--min-component",
                "2",
                "--out",
                &out,
            ],
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let edges: Vec<String> = std::fs::read_to_string(tmp.path().join(&out).join("roads.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.splitn(3, ',').take(2).collect::<Vec<_>>().join(","))
            .collect();
        if let Some(p) = &prev {
            assert!(edges.iter().all(|e| p.contains(e)));
        }
        prev = Some(edges);
    }
}

#[test]
fn all_lists_every_artifact_and_is_repeatable() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(
        tmp.path().join("small.cfg"),
        "synth.users = 80\nsynth.days = 6\ncartogram_grid = 32\ngrid_side = 10,20\n",
    )
    .unwrap();
    for out in ["a", "b"] {
        let o = cdrscope(tmp.path(), &["all", "--config", "small.cfg", "--seed", "9", "--out", out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let ma = std::fs::read(a.join("manifest.json")).unwrap();
    assert_eq!(ma, std::fs::read(b.join("manifest.json")).unwrap());

    let m = manifest(&a);
    assert_eq!(m["command"], "all");
    assert_eq!(m["seed"], 9);
    let listed: Vec<String> = m["artifacts"].as_object().unwrap().keys().cloned().collect();
    let mut on_disk = Vec::new();
    for entry in walk(&a) {
        let rel = entry.strip_prefix(&a).unwrap().to_string_lossy().replace('\\', "/");
        if rel != "manifest.json" {
            on_disk.push(rel);
        }
    }
    on_disk.sort();
    assert_eq!(listed, on_disk);
    for rel in &listed {
        assert_eq!(std::fs::read(a.join(rel)).unwrap(), std::fs::read(b.join(rel)).unwrap(), "{rel}");
    }
    for name in ["cartogram.svg", "roads.geojson", "voronoi.geojson", "scaling.csv", "heatmap.csv"] {
        assert!(listed.iter().any(|l| l == name), "{name} missing");
    }
}

#[test]
fn different_seeds_give_different_data() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("small.cfg"), "synth.users = 30\nsynth.days = 3\n").unwrap();
    for (seed, out) in [("1", "a"), ("2", "b")] {
        let o = cdrscope(tmp.path(), &["synth", "--config", "small.cfg", "--seed", seed, "--out", out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (a, b) = (manifest(&tmp.path().join("a")), manifest(&tmp.path().join("b")));
    assert_ne!(a["config_sha256"], b["config_sha256"]);
    assert_ne!(a["artifacts"]["data/POS_SAMPLE_0.TSV"], b["artifacts"]["data/POS_SAMPLE_0.TSV"]);
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}
