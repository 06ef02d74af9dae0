use std::fmt;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::geo::GridBin;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// population <= cutoff
    Small,
    /// population > cutoff
    Large,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Small => "small",
            Regime::Large => "large",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Intensity {
    Count,
    Duration,
}

impl fmt::Display for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Intensity::Count => "count",
            Intensity::Duration => "duration",
        })
    }
}

/// Population cutoff between the two regimes for a grid side. The built-in
/// table covers 5, 10 and 20 km; other sides need an override.
pub fn regime_cutoff(grid_side_km: f64, override_cutoff: Option<f64>) -> Result<f64> {
    if let Some(c) = override_cutoff {
        return Ok(c);
    }
    match grid_side_km {
        s if s == 5.0 => Ok(10_000.0),
        s if s == 10.0 => Ok(20_000.0),
        s if s == 20.0 => Ok(40_000.0),
        s => Err(Error::Invalid(format!("no default population cutoff for a {s} km grid"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub n: usize,
}

impl OlsFit {
    /// Two-sided t interval on the slope at `level` (e.g. 0.95).
    pub fn slope_interval(&self, level: f64) -> (f64, f64) {
        let t = StudentsT::new(0.0, 1.0, (self.n - 2) as f64)
            .expect("at least one degree of freedom")
            .inverse_cdf(0.5 + level / 2.0);
        (self.slope - t * self.se_slope, self.slope + t * self.se_slope)
    }
}

/// Simple linear regression of `ys` on `xs`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<OlsFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 3 {
        return Err(Error::Insufficient(format!("{n} points, need at least 3")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::Insufficient("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let se_slope = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(OlsFit {
        slope,
        intercept,
        se_slope,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub n: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub regime: Regime,
    pub intensity: Intensity,
    pub grid_side_km: f64,
}

/// Log-log OLS of call intensity on population for one regime, with a 95%
/// t interval on the slope. Bins without calls or without population are
/// left out before taking logs.
pub fn fit_loglog(
    bins: &[GridBin],
    cutoff: f64,
    regime: Regime,
    intensity: Intensity,
) -> Result<RegressionResult> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut side = f64::NAN;
    for b in bins {
        let y = match intensity {
            Intensity::Count => b.call_count as f64,
            Intensity::Duration => b.call_duration,
        };
        if b.call_count == 0 || !(y > 0.0) || !(b.population > 0.0) {
            continue;
        }
        let in_regime = match regime {
            Regime::Small => b.population <= cutoff,
            Regime::Large => b.population > cutoff,
        };
        if in_regime {
            xs.push(b.population.ln());
            ys.push(y.ln());
            side = b.side_km;
        }
    }
    let fit = ols(&xs, &ys).map_err(|e| match e {
        Error::Insufficient(msg) => Error::Insufficient(format!("{regime} regime, {intensity}: {msg}")),
        other => other,
    })?;
    let (ci_low, ci_high) = fit.slope_interval(0.95);
    Ok(RegressionResult {
        slope: fit.slope,
        intercept: fit.intercept,
        n: fit.n,
        ci_low,
        ci_high,
        regime,
        intensity,
        grid_side_km: side,
    })
}
