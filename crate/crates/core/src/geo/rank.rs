use crate::{Error, Result};

/// Values in descending order with their 1-based ranks, plus summary
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RankPlot {
    pub series: Vec<(usize, f64)>,
    pub mean: f64,
    pub median: f64,
    /// Number of values within 50% of the median, i.e. in
    /// `[0.5 * median, 1.5 * median]`.
    pub within_half_median: usize,
}

pub fn rank_plot(values: &[f64]) -> Result<RankPlot> {
    if values.is_empty() {
        return Err(Error::Insufficient("rank plot of an empty series".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let within_half_median = sorted
        .iter()
        .filter(|&&v| (v - median).abs() <= 0.5 * median.abs())
        .count();
    Ok(RankPlot {
        series: sorted.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect(),
        mean,
        median,
        within_half_median,
    })
}
