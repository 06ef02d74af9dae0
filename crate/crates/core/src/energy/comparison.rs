use super::constants::*;
use super::EnergyReport;

/// Figures a report is compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparators {
    pub per_subscriber_kwh: Vec<(String, f64)>,
    pub energy_pct: Vec<(String, f64)>,
    pub ghg_pct: Vec<(String, f64)>,
}

impl Default for Comparators {
    fn default() -> Self {
        Comparators {
            per_subscriber_kwh: vec![
                ("Vodafone Germany".into(), DE_KWH_PER_SUB),
                ("reported operator average".into(), LITERATURE_KWH_PER_SUB.2),
            ],
            energy_pct: vec![("Germany mobile networks".into(), DE_MOBILE_ENERGY_PCT)],
            ghg_pct: vec![
                ("global mobile networks".into(), GLOBAL_MOBILE_GHG_PCT),
                ("Germany mobile networks".into(), DE_MOBILE_GHG_PCT),
            ],
        }
    }
}

impl Comparators {
    /// A report's own figures as comparators.
    pub fn from_report(r: &EnergyReport) -> Self {
        Comparators {
            per_subscriber_kwh: vec![(r.name.clone(), r.per_subscriber)],
            energy_pct: vec![(r.name.clone(), r.energy_pct)],
            ghg_pct: vec![(r.name.clone(), r.ghg_pct)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: &'static str,
    pub reference: String,
    pub ours: f64,
    pub theirs: f64,
    pub ratio: f64,
}

pub fn country_comparison(report: &EnergyReport, refs: &Comparators) -> Vec<ComparisonRow> {
    let mut rows = Vec::new();
    let groups: [(&'static str, f64, &Vec<(String, f64)>); 3] = [
        ("kwh_per_subscriber", report.per_subscriber, &refs.per_subscriber_kwh),
        ("energy_pct", report.energy_pct, &refs.energy_pct),
        ("ghg_pct", report.ghg_pct, &refs.ghg_pct),
    ];
    for (metric, ours, list) in groups {
        for (name, theirs) in list {
            rows.push(ComparisonRow {
                metric,
                reference: name.clone(),
                ours,
                theirs: *theirs,
                ratio: ours / theirs,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{run_scenario, EnergyScenario};

    #[test]
    fn base_against_published_references() {
        let r = run_scenario(&EnergyScenario::base()).unwrap();
        let rows = country_comparison(&r, &Comparators::default());
        let de = rows.iter().find(|x| x.reference == "Vodafone Germany").unwrap();
        assert!((de.ratio - 3.83 / 16.5).abs() < 0.001);
        let global = rows.iter().find(|x| x.reference == "global mobile networks").unwrap();
        assert!((global.ratio - 2.2).abs() < 0.01);
    }

    #[test]
    fn report_against_itself() {
        let r = run_scenario(&EnergyScenario::scenario_ii()).unwrap();
        for row in country_comparison(&r, &Comparators::from_report(&r)) {
            assert_eq!(row.ratio, 1.0);
        }
    }
}
