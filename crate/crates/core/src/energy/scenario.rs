use std::collections::BTreeMap;

use super::constants::*;
use crate::kv::get_parsed;
use crate::{Error, Result};

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Inputs of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyScenario {
    pub name: String,
    /// Fixed effective intensity, kgCO2e/kWh. When `None` the intensity is
    /// blended from the grid and diesel figures by `diesel_fraction`.
    pub carbon_intensity: Option<f64>,
    pub grid_intensity: f64,
    pub diesel_intensity: f64,
    /// Aggregate power per base station, kW.
    pub power_per_bs: f64,
    pub oci_station_count: u64,
    pub market_share: f64,
    pub national_ghg: f64,
    pub national_energy: f64,
    pub subscribers: f64,
    /// Share of base-station electricity produced by diesel generators.
    pub diesel_fraction: f64,
    /// Count only grid-supplied energy against national production.
    pub grid_accounting: bool,
}

impl EnergyScenario {
    pub fn base() -> Self {
        EnergyScenario {
            name: "BASE".into(),
            carbon_intensity: None,
            grid_intensity: GRID_INTENSITY,
            diesel_intensity: DIESEL_INTENSITY,
            power_per_bs: POWER_PER_BS_KW,
            oci_station_count: OCI_STATION_COUNT,
            market_share: OCI_MARKET_SHARE,
            national_ghg: NATIONAL_GHG_KT,
            national_energy: NATIONAL_ENERGY_GWH,
            subscribers: SUBSCRIBERS,
            diesel_fraction: 0.0,
            grid_accounting: false,
        }
    }

    /// Power per station cut by a quarter.
    pub fn scenario_i() -> Self {
        EnergyScenario {
            name: "I".into(),
            power_per_bs: 0.75 * POWER_PER_BS_KW,
            ..Self::base()
        }
    }

    /// Half the station electricity from diesel, with the grid share alone
    /// counted against national production.
    pub fn scenario_ii() -> Self {
        EnergyScenario {
            name: "II".into(),
            carbon_intensity: Some(HALF_DIESEL_INTENSITY),
            diesel_fraction: 0.5,
            grid_accounting: true,
            ..Self::base()
        }
    }

    pub fn standard() -> Vec<Self> {
        vec![Self::base(), Self::scenario_i(), Self::scenario_ii()]
    }

    /// `base`, `i` or `ii`, case-insensitive.
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "base" => Some(Self::base()),
            "i" | "1" => Some(Self::scenario_i()),
            "ii" | "2" => Some(Self::scenario_ii()),
            _ => None,
        }
    }

    /// Overrides fields from `key = value` entries. Recognised keys match
    /// the field names; `scenario` picks a named starting point.
    pub fn from_key_values(map: &BTreeMap<String, String>, start: EnergyScenario) -> Result<Self> {
        let mut s = match map.get("scenario") {
            Some(n) => Self::by_name(n).ok_or_else(|| Error::Invalid(format!("unknown scenario {n:?}")))?,
            None => start,
        };
        if let Some(n) = map.get("name") {
            s.name = n.clone();
        }
        if let Some(v) = get_parsed::<f64>(map, "carbon_intensity")? {
            s.carbon_intensity = Some(v);
        }
        macro_rules! set {
            ($($key:ident),*) => {$(
                if let Some(v) = get_parsed(map, stringify!($key))? {
                    s.$key = v;
                }
            )*};
        }
        set!(
            grid_intensity,
            diesel_intensity,
            power_per_bs,
            oci_station_count,
            market_share,
            national_ghg,
            national_energy,
            subscribers,
            diesel_fraction,
            grid_accounting
        );
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grid_intensity", self.grid_intensity),
            ("diesel_intensity", self.diesel_intensity),
            ("power_per_bs", self.power_per_bs),
            ("national_ghg", self.national_ghg),
            ("national_energy", self.national_energy),
            ("subscribers", self.subscribers),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Invalid(format!("{k} must be positive, got {v}")));
            }
        }
        if let Some(c) = self.carbon_intensity {
            if !(c > 0.0) {
                return Err(Error::Invalid(format!("carbon_intensity must be positive, got {c}")));
            }
        }
        if self.oci_station_count == 0 {
            return Err(Error::Invalid("oci_station_count must be positive".into()));
        }
        if !(self.market_share > 0.0 && self.market_share <= 1.0) {
            return Err(Error::Invalid(format!("market_share {} outside (0, 1]", self.market_share)));
        }
        if !(0.0..=1.0).contains(&self.diesel_fraction) {
            return Err(Error::Invalid(format!("diesel_fraction {} outside [0, 1]", self.diesel_fraction)));
        }
        Ok(())
    }

    /// Intensity actually applied to the energy total.
    pub fn effective_intensity(&self) -> f64 {
        self.carbon_intensity
            .unwrap_or_else(|| blended_intensity(self.grid_intensity, self.diesel_intensity, self.diesel_fraction))
    }
}

pub fn blended_intensity(grid: f64, diesel: f64, diesel_fraction: f64) -> f64 {
    (1.0 - diesel_fraction) * grid + diesel_fraction * diesel
}

/// National station count, assuming competitors deploy at the operator's
/// density: `round(oci_count / market_share)`.
pub fn total_stations(oci_count: u64, market_share: f64) -> Result<u64> {
    if !(market_share > 0.0) {
        return Err(Error::Invalid(format!("market share {market_share} must be positive")));
    }
    Ok((oci_count as f64 / market_share).round() as u64)
}

/// Outputs of one scenario, at full precision.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub name: String,
    pub carbon_intensity: f64,
    pub power_per_bs: f64,
    pub total_bs: u64,
    /// GWh per year.
    pub total_energy: f64,
    pub energy_pct: f64,
    /// ktCO2e per year.
    pub total_ghg: f64,
    pub ghg_pct: f64,
    /// kWh per subscriber per year, from the operator's own stations.
    pub per_subscriber: f64,
}

pub fn run_scenario(s: &EnergyScenario) -> Result<EnergyReport> {
    s.validate()?;
    let total_bs = total_stations(s.oci_station_count, s.market_share)?;
    let intensity = s.effective_intensity();
    // kWh -> GWh
    let total_energy = total_bs as f64 * s.power_per_bs * HOURS_PER_YEAR / 1e6;
    // GWh * kg/kWh = Gg = kt
    let total_ghg = total_energy * intensity;
    let counted = if s.grid_accounting {
        total_energy * (1.0 - s.diesel_fraction)
    } else {
        total_energy
    };
    let per_subscriber = s.oci_station_count as f64 * s.power_per_bs * HOURS_PER_YEAR / s.subscribers;
    Ok(EnergyReport {
        name: s.name.clone(),
        carbon_intensity: intensity,
        power_per_bs: s.power_per_bs,
        total_bs,
        total_energy,
        energy_pct: 100.0 * counted / s.national_energy,
        total_ghg,
        ghg_pct: 100.0 * total_ghg / s.national_ghg,
        per_subscriber,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kv::parse_key_values;
    use proptest::prelude::*;

    #[test]
    fn station_totals() {
        assert_eq!(total_stations(1238, 1.0 / 3.0).unwrap(), 3714);
        assert_eq!(total_stations(1238, 1.0).unwrap(), 1238);
        assert_eq!(total_stations(1238, 0.35).unwrap(), 3537);
        assert!(total_stations(1238, 0.0).is_err());
    }

    #[test]
    fn base_energy_from_station_arithmetic() {
        let r = run_scenario(&EnergyScenario::base()).unwrap();
        assert_eq!(r.total_bs, 3714);
        assert!((r.total_energy - 3714.0 * 2.1 * 8760.0 / 1e6).abs() < 1e-12);
        assert!((r.per_subscriber - 1238.0 * 2.1 * 8760.0 / 5.94e6).abs() < 1e-12);
    }

    #[test]
    fn half_diesel_blend_differs_from_quoted_intensity() {
        assert!((blended_intensity(0.426, 0.788, 0.5) - 0.607).abs() < 1e-12);
        assert_eq!(EnergyScenario::scenario_ii().effective_intensity(), 0.602);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let mut s = EnergyScenario::base();
        s.market_share = 1.5;
        assert!(run_scenario(&s).is_err());
        let mut s = EnergyScenario::base();
        s.diesel_fraction = -0.1;
        assert!(run_scenario(&s).is_err());
        let mut s = EnergyScenario::base();
        s.subscribers = 0.0;
        assert!(run_scenario(&s).is_err());
    }

    #[test]
    fn key_values_override() {
        let m = parse_key_values("scenario = ii\nname = custom\npower_per_bs = 1.0\ngrid_accounting = false\n", "t").unwrap();
        let s = EnergyScenario::from_key_values(&m, EnergyScenario::base()).unwrap();
        assert_eq!(s.name, "custom");
        assert_eq!(s.power_per_bs, 1.0);
        assert_eq!(s.carbon_intensity, Some(0.602));
        assert!(!s.grid_accounting);
        let bad = parse_key_values("market_share = abc\n", "t").unwrap();
        assert!(EnergyScenario::from_key_values(&bad, EnergyScenario::base()).is_err());
        let unknown = parse_key_values("scenario = iv\n", "t").unwrap();
        assert!(EnergyScenario::from_key_values(&unknown, EnergyScenario::base()).is_err());
    }

    #[test]
    fn ghg_is_energy_times_intensity() {
        for s in EnergyScenario::standard() {
            let r = run_scenario(&s).unwrap();
            assert_eq!(r.total_ghg, r.total_energy * s.effective_intensity());
        }
    }

    proptest! {
        #[test]
        fn power_scales_linearly(k in prop::sample::select(vec![0.5, 0.75, 2.0]), p in 0.1f64..10.0) {
            let s = EnergyScenario { power_per_bs: p, ..EnergyScenario::base() };
            let t = EnergyScenario { power_per_bs: k * p, ..s.clone() };
            let (a, b) = (run_scenario(&s).unwrap(), run_scenario(&t).unwrap());
            for (x, y) in [(a.total_energy, b.total_energy), (a.total_ghg, b.total_ghg), (a.per_subscriber, b.per_subscriber)] {
                prop_assert!((y - k * x).abs() <= 1e-12 * y.abs());
            }
        }

        #[test]
        fn more_diesel_never_lowers_ghg(f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0, grid in 0.1f64..0.7, extra in 0.0f64..0.5) {
            let (lo, hi) = (f1.min(f2), f1.max(f2));
            let mk = |f| EnergyScenario {
                diesel_fraction: f,
                grid_intensity: grid,
                diesel_intensity: grid + extra,
                ..EnergyScenario::base()
            };
            prop_assert!(run_scenario(&mk(hi)).unwrap().total_ghg >= run_scenario(&mk(lo)).unwrap().total_ghg);
        }
    }
}
