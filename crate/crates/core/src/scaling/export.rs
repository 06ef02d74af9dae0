use std::io::Write;

use super::{AutocorrelationSeries, RegressionResult};

/// One row per fit: grid side, intensity, regime, slope, interval.
pub fn write_regression_csv<W: Write>(mut w: W, rows: &[RegressionResult]) -> std::io::Result<()> {
    writeln!(w, "grid_km,intensity,regime,n,a,b,ci_low,ci_high")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
            r.grid_side_km, r.intensity, r.regime, r.n, r.slope, r.intercept, r.ci_low, r.ci_high
        )?;
    }
    Ok(())
}

/// Call and population series side by side. Both must share the same bins.
/// Empty bins are written as blank fields.
pub fn write_autocorr_csv<W: Write>(
    mut w: W,
    calls: &AutocorrelationSeries,
    population: &AutocorrelationSeries,
) -> std::io::Result<()> {
    assert_eq!(calls.centers_km, population.centers_km);
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    writeln!(w, "d_km,c_call,c_pop,pairs")?;
    for k in 0..calls.centers_km.len() {
        writeln!(
            w,
            "{},{},{},{}",
            calls.centers_km[k],
            fmt(calls.values[k]),
            fmt(population.values[k]),
            calls.pairs[k]
        )?;
    }
    Ok(())
}
