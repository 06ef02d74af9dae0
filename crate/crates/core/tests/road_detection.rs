use std::collections::{BTreeMap, BTreeSet, HashMap};

use cdrscope::geo::{ProjectedPoint, Projection};
use cdrscope::ingest::synth::{generate_synthetic, SynthConfig, SynthDataset};
use cdrscope::ingest::CdrEvent;
use cdrscope::mobility::{
    detect_roads, evaluate_roads, extract_transitions, transition_heatmap, Binning, RoadParams,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn positions(ds: &SynthDataset) -> (Projection, HashMap<u32, ProjectedPoint>) {
    let proj = Projection::centered_on(ds.boundary.outline().bbox());
    let pos = ds.stations.iter().map(|s| (s.id, proj.forward(s.lon, s.lat))).collect();
    (proj, pos)
}

#[test]
fn planted_roads_recovered_at_default_thresholds() {
    let ds = generate_synthetic(&SynthConfig::default(), 42).unwrap();
    let (proj, pos) = positions(&ds);
    let det = detect_roads(&ds.events, &pos, &RoadParams::for_events(&ds.events)).unwrap();
    let ev = evaluate_roads(&det.segments, &pos, &ds.roads, &proj, 5.0).unwrap();
    assert!(ev.recall >= 0.9, "{ev:?}");
    assert!(ev.precision >= 0.8, "{ev:?}");
}

#[test]
fn transition_count_is_events_minus_one_per_user() {
    let cfg = SynthConfig {
        n_users: 60,
        days: 10,
        ..SynthConfig::default()
    };
    let ds = generate_synthetic(&cfg, 7).unwrap();
    let (_, pos) = positions(&ds);
    let ts = extract_transitions(&ds.events, &pos).unwrap();
    let mut per_user: BTreeMap<u64, usize> = BTreeMap::new();
    for e in &ds.events {
        *per_user.entry(e.user_id).or_default() += 1;
    }
    let mut t_user: BTreeMap<u64, usize> = BTreeMap::new();
    for t in &ts {
        *t_user.entry(t.user_id).or_default() += 1;
    }
    for (u, n) in per_user {
        assert_eq!(t_user.get(&u).copied().unwrap_or(0), n - 1, "user {u}");
    }
}

#[test]
fn segments_independent_of_event_order() {
    let cfg = SynthConfig {
        n_users: 200,
        days: 15,
        ..SynthConfig::default()
    };
    let ds = generate_synthetic(&cfg, 3).unwrap();
    let (_, pos) = positions(&ds);
    let params = RoadParams::for_events(&ds.events);
    let a = detect_roads(&ds.events, &pos, &params).unwrap();
    let mut shuffled: Vec<CdrEvent> = ds.events.clone();
    shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
    let b = detect_roads(&shuffled, &pos, &params).unwrap();
    assert_eq!(a.segments, b.segments);
    assert_eq!(a.graph, b.graph);
}

#[test]
fn threshold_sweeps_are_monotone() {
    let cfg = SynthConfig {
        n_users: 300,
        days: 20,
        ..SynthConfig::default()
    };
    let ds = generate_synthetic(&cfg, 5).unwrap();
    let (_, pos) = positions(&ds);
    let base = RoadParams::for_events(&ds.events);
    let keys = |p: &RoadParams| -> BTreeSet<(u32, u32)> {
        detect_roads(&ds.events, &pos, p)
            .unwrap()
            .segments
            .iter()
            .map(|s| (s.from, s.to))
            .collect()
    };
    let mut prev = keys(&RoadParams { min_weight: 1, ..base });
    for w in [2, 5, 10, 20, 40] {
        let cur = keys(&RoadParams { min_weight: w, ..base });
        assert!(cur.is_subset(&prev));
        prev = cur;
    }
    let mut prev = keys(&RoadParams { min_component: 1, ..base });
    for c in [2, 5, 10, 20] {
        let cur = keys(&RoadParams { min_component: c, ..base });
        assert!(cur.is_subset(&prev));
        prev = cur;
    }
}

/// Tail exponent of gaps in `[u, upper]` under a Lomax law with known
/// scale, by maximum likelihood for the doubly truncated Pareto form of
/// `(x + scale) / (u + scale)`. Returns the estimate and its standard error.
fn truncated_tail_mle(gaps: &[f64], scale: f64, u: f64, upper: f64) -> (f64, f64) {
    let ys: Vec<f64> = gaps
        .iter()
        .filter(|&&x| x >= u && x <= upper)
        .map(|&x| ((x + scale) / (u + scale)).ln())
        .collect();
    let k = ys.len() as f64;
    let s: f64 = ys.iter().sum();
    let ln_r = ((upper + scale) / (u + scale)).ln();
    let score = |a: f64| {
        let rm = (-a * ln_r).exp();
        k / a - s - k * rm * ln_r / (1.0 - rm)
    };
    let (mut lo, mut hi) = (1e-3, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if score(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    // observed information of the truncated likelihood
    let rm = (-a * ln_r).exp();
    let info = k / (a * a) - k * ln_r * ln_r * rm / (1.0 - rm).powi(2);
    (a, 1.0 / info.sqrt())
}

#[test]
fn inter_event_gaps_have_configured_tail() {
    let cfg = SynthConfig {
        n_users: 100,
        days: 30,
        events_per_day: 10.0,
        ..SynthConfig::default()
    };
    let ds = generate_synthetic(&cfg, 17).unwrap();
    let (_, pos) = positions(&ds);
    let ts = extract_transitions(&ds.events, &pos).unwrap();
    let gaps: Vec<f64> = ts.iter().map(|t| t.dt_s as f64).collect();
    let scale = cfg.gap_scale_s();
    let (a, se) = truncated_tail_mle(&gaps, scale, scale, 6.0 * 3600.0);
    assert!(
        (a - cfg.tail_exponent).abs() <= 3.0 * se,
        "estimated {a} +- {se}, configured {}",
        cfg.tail_exponent
    );

    // the same gaps through the heatmap keep their mass
    let h = transition_heatmap(
        &ts,
        Binning::Linear { min: 0.0, width: 5.0, count: 40 },
        Binning::Log { min: 1.0, max: 30.0 * 86_400.0, count: 30 },
    )
    .unwrap();
    assert_eq!(h.total(), ts.len() as u64);
}
