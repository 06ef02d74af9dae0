use std::io::Write;

use super::EnergyReport;

/// Rounds half away from zero at two decimals. Values within 1e-9 of a
/// rounding midpoint count as the midpoint, so 1.575 shows as 1.58 even
/// though its binary value sits just below.
pub fn display_round(v: f64) -> f64 {
    let scaled = v * 100.0;
    let snapped = (scaled * 1e7).round() / 1e7;
    snapped.round() / 100.0
}

/// The table rows as (label, one value per report), unrounded.
pub fn table_rows(reports: &[EnergyReport]) -> Vec<(&'static str, Vec<f64>)> {
    let col = |f: fn(&EnergyReport) -> f64| reports.iter().map(f).collect::<Vec<_>>();
    vec![
        ("Carbon intensity of electricity (kgCO2e/kWh)", col(|r| r.carbon_intensity)),
        ("Average aggregate power consumption per BS (kW)", col(|r| r.power_per_bs)),
        ("Total national energy consumption by mobile networks (GWh)", col(|r| r.total_energy)),
        ("National energy consumption by mobile networks (percent of total)", col(|r| r.energy_pct)),
        ("Total national GHG emissions by mobile networks (ktCO2e)", col(|r| r.total_ghg)),
        ("National GHG emissions by mobile networks (percent of total)", col(|r| r.ghg_pct)),
        ("Annual energy consumption per subscriber (kWh/sub)", col(|r| r.per_subscriber)),
    ]
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Rows as in the published table, one column per scenario, values
/// rounded for display.
pub fn write_table_csv<W: Write>(mut w: W, reports: &[EnergyReport]) -> std::io::Result<()> {
    write!(w, "quantity")?;
    for r in reports {
        write!(w, ",{}", csv_field(&r.name))?;
    }
    writeln!(w)?;
    for (label, vals) in table_rows(reports) {
        write!(w, "{}", csv_field(label))?;
        for v in vals {
            write!(w, ",{:.2}", display_round(v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_markdown<W: Write>(mut w: W, reports: &[EnergyReport]) -> std::io::Result<()> {
    write!(w, "| |")?;
    for r in reports {
        write!(w, " {} |", r.name)?;
    }
    writeln!(w)?;
    write!(w, "|---|")?;
    for _ in reports {
        write!(w, "---:|")?;
    }
    writeln!(w)?;
    for (label, vals) in table_rows(reports) {
        write!(w, "| {label} |")?;
        for v in vals {
            write!(w, " {:.2} |", display_round(v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
