//! Scaling of call activity with population.
//!
//! [`fit_loglog`] fits `log(intensity) = a log(population) + b` by ordinary
//! least squares on grid bins, separately below and above a population
//! cutoff. [`autocorrelation`] measures how far a gridded field stays
//! correlated with itself.

mod autocorr;
mod export;
mod regression;

pub use autocorr::{autocorrelation, autocorrelation_brute_force, AutocorrelationSeries, Field};
pub use export::{write_autocorr_csv, write_regression_csv};
pub use regression::{fit_loglog, ols, regime_cutoff, Intensity, OlsFit, Regime, RegressionResult};
