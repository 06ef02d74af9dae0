use super::Transition;
use crate::{Error, Result};

/// Bin layout along one axis. Values beyond either end are counted in the
/// first or last bin so that no transition is lost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Binning {
    Linear { min: f64, width: f64, count: usize },
    /// Equal widths in log10 between `min` and `max` (both > 0).
    Log { min: f64, max: f64, count: usize },
}

impl Binning {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Binning::Linear { width, count, .. } => width > 0.0 && count > 0,
            Binning::Log { min, max, count } => min > 0.0 && max > min && count > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid binning {self:?}")))
        }
    }

    pub fn count(&self) -> usize {
        match *self {
            Binning::Linear { count, .. } | Binning::Log { count, .. } => count,
        }
    }

    /// The `count + 1` bin edges.
    pub fn edges(&self) -> Vec<f64> {
        match *self {
            Binning::Linear { min, width, count } => (0..=count).map(|k| min + width * k as f64).collect(),
            Binning::Log { min, max, count } => {
                let (a, b) = (min.log10(), max.log10());
                (0..=count)
                    .map(|k| 10f64.powf(a + (b - a) * k as f64 / count as f64))
                    .collect()
            }
        }
    }

    pub fn index(&self, v: f64) -> usize {
        let pos = match *self {
            Binning::Linear { min, width, .. } => (v - min) / width,
            Binning::Log { min, max, count } => {
                if v <= 0.0 {
                    0.0
                } else {
                    (v.log10() - min.log10()) / (max.log10() - min.log10()) * count as f64
                }
            }
        };
        if pos.is_nan() || pos < 0.0 {
            0
        } else {
            (pos.floor() as usize).min(self.count() - 1)
        }
    }
}

/// Counts of transitions by (distance, elapsed time).
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub distance: Binning,
    pub time: Binning,
    /// `counts[i][j]`: distance bin `i`, time bin `j`.
    pub counts: Vec<Vec<u64>>,
}

impl Heatmap {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

pub fn transition_heatmap(ts: &[Transition], distance: Binning, time: Binning) -> Result<Heatmap> {
    distance.validate()?;
    time.validate()?;
    let mut counts = vec![vec![0u64; time.count()]; distance.count()];
    for t in ts {
        counts[distance.index(t.distance_km)][time.index(t.dt_s as f64)] += 1;
    }
    Ok(Heatmap { distance, time, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tr(d: f64, dt: i64) -> Transition {
        Transition {
            user_id: 0,
            from_station: 0,
            to_station: 1,
            t_start: 0,
            t_end: dt,
            distance_km: d,
            dt_s: dt,
            velocity_kmh: 0.0,
        }
    }

    #[test]
    fn single_transition_single_cell() {
        let h = transition_heatmap(
            &[tr(12.0, 700)],
            Binning::Linear { min: 0.0, width: 5.0, count: 10 },
            Binning::Log { min: 1.0, max: 1e5, count: 5 },
        )
        .unwrap();
        assert_eq!(h.total(), 1);
        assert_eq!(h.counts[2][2], 1);
    }

    #[test]
    fn log_edges() {
        let b = Binning::Log { min: 1.0, max: 1000.0, count: 3 };
        let e = b.edges();
        assert!((e[1] - 10.0).abs() < 1e-9 && (e[3] - 1000.0).abs() < 1e-9);
        assert_eq!(b.index(0.0), 0);
        assert_eq!(b.index(10.0), 1);
        assert_eq!(b.index(1e9), 2);
    }

    #[test]
    fn bad_binning_rejected() {
        let ok = Binning::Linear { min: 0.0, width: 1.0, count: 1 };
        assert!(transition_heatmap(&[], Binning::Linear { min: 0.0, width: 0.0, count: 3 }, ok).is_err());
        assert!(transition_heatmap(&[], ok, Binning::Log { min: 0.0, max: 1.0, count: 3 }).is_err());
    }

    proptest! {
        #[test]
        fn mass_equals_transition_count(
            raw in proptest::collection::vec((-5.0f64..500.0, -10i64..100_000), 0..200)
        ) {
            let ts: Vec<Transition> = raw.iter().map(|&(d, dt)| tr(d, dt)).collect();
            let h = transition_heatmap(
                &ts,
                Binning::Linear { min: 0.0, width: 10.0, count: 20 },
                Binning::Log { min: 1.0, max: 86_400.0, count: 12 },
            ).unwrap();
            prop_assert_eq!(h.total(), ts.len() as u64);
        }
    }
}
