use rayon::prelude::*;

use crate::geo::GridBin;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Calls,
    Population,
}

impl Field {
    fn value(&self, b: &GridBin) -> f64 {
        match self {
            Field::Calls => b.call_count as f64,
            Field::Population => b.population,
        }
    }
}

/// `C(d)` on distance bins centred at `k * bin_width`; bin `k` holds pairs
/// with centroid distance in `[(k - 1/2) w, (k + 1/2) w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrelationSeries {
    pub centers_km: Vec<f64>,
    /// `None` where a bin has no pairs.
    pub values: Vec<Option<f64>>,
    pub pairs: Vec<u64>,
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn merge(&mut self, o: Sum) {
        self.add(o.s);
        self.add(o.c);
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

struct Prepared {
    cells: Vec<(i64, i64, f64)>,
    side: f64,
    nbins: usize,
    width: f64,
}

fn prepare(bins: &[GridBin], field: Field, max_lag_km: f64, bin_width_km: f64) -> Result<Prepared> {
    if !(bin_width_km > 0.0 && max_lag_km >= 0.0) {
        return Err(Error::Invalid("bin width must be positive and max lag non-negative".into()));
    }
    if bins.len() < 2 {
        return Err(Error::Insufficient(format!("{} occupied cells, need at least 2", bins.len())));
    }
    let side = bins[0].side_km;
    let n = bins.len() as f64;
    let mut mean = Sum::default();
    for b in bins {
        mean.add(field.value(b));
    }
    let mean = mean.value() / n;
    let mut var = Sum::default();
    for b in bins {
        let d = field.value(b) - mean;
        var.add(d * d);
    }
    let var = var.value() / n;
    let sd = var.sqrt();
    if !(var > 0.0) || bins.iter().all(|b| field.value(b) == field.value(&bins[0])) {
        return Err(Error::ZeroVariance);
    }
    let cells = bins
        .iter()
        .map(|b| (b.i, b.j, (field.value(b) - mean) / sd))
        .collect();
    let nbins = (max_lag_km / bin_width_km + 0.5).floor() as usize + 1;
    Ok(Prepared {
        cells,
        side,
        nbins,
        width: bin_width_km,
    })
}

fn bin_of(d: f64, width: f64) -> usize {
    (d / width + 0.5).floor() as usize
}

fn finish(sums: Vec<Sum>, pairs: Vec<u64>, width: f64) -> AutocorrelationSeries {
    let values = sums
        .iter()
        .zip(&pairs)
        .map(|(s, &n)| (n > 0).then(|| s.value() / n as f64))
        .collect();
    AutocorrelationSeries {
        centers_km: (0..pairs.len()).map(|k| k as f64 * width).collect(),
        values,
        pairs,
    }
}

/// Spatial autocorrelation of a gridded field over all occupied bins:
/// `C(d)` is the mean of `(x_i - m)(x_j - m) / s^2` over unordered cell
/// pairs (each cell also paired with itself at distance 0) whose centroid
/// distance falls in the bin of `d`. `m` and `s^2` are the mean and
/// population variance over all occupied cells, so `C(0) = 1` when bin 0
/// holds only the self pairs.
///
/// Pairs are enumerated by grid offset: every pair at a given offset shares
/// one distance, so each offset is summed separately and added to its bin.
pub fn autocorrelation(
    bins: &[GridBin],
    field: Field,
    max_lag_km: f64,
    bin_width_km: f64,
) -> Result<AutocorrelationSeries> {
    let p = prepare(bins, field, max_lag_km, bin_width_km)?;
    let (mut i0, mut j0, mut i1, mut j1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for &(i, j, _) in &p.cells {
        i0 = i0.min(i);
        j0 = j0.min(j);
        i1 = i1.max(i);
        j1 = j1.max(j);
    }
    let (w, h) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
    let mut dense: Vec<Option<f64>> = vec![None; w * h];
    for &(i, j, z) in &p.cells {
        dense[(j - j0) as usize * w + (i - i0) as usize] = Some(z);
    }

    let reach = ((p.nbins as f64 - 0.5) * p.width / p.side).ceil() as i64;
    // one offset from each {o, -o} pair, plus the zero offset for self pairs
    let mut offsets = Vec::new();
    for di in 0..=reach.min(w as i64 - 1) {
        for dj in -reach.min(h as i64 - 1)..=reach.min(h as i64 - 1) {
            if di == 0 && dj < 0 {
                continue;
            }
            let d = p.side * ((di * di + dj * dj) as f64).sqrt();
            let k = bin_of(d, p.width);
            if k < p.nbins {
                offsets.push((di, dj, k));
            }
        }
    }

    let per_offset: Vec<(usize, Sum, u64)> = offsets
        .par_iter()
        .map(|&(di, dj, k)| {
            let mut s = Sum::default();
            let mut n = 0u64;
            for y in 0..h as i64 {
                let y2 = y + dj;
                if y2 < 0 || y2 >= h as i64 {
                    continue;
                }
                for x in 0..w as i64 - di {
                    let a = dense[y as usize * w + x as usize];
                    let b = dense[y2 as usize * w + (x + di) as usize];
                    if let (Some(a), Some(b)) = (a, b) {
                        s.add(a * b);
                        n += 1;
                    }
                }
            }
            (k, s, n)
        })
        .collect();

    let mut sums = vec![Sum::default(); p.nbins];
    let mut pairs = vec![0u64; p.nbins];
    for (k, s, n) in per_offset {
        sums[k].merge(s);
        pairs[k] += n;
    }
    Ok(finish(sums, pairs, p.width))
}

/// All-pairs evaluation of the same estimator, for checking.
pub fn autocorrelation_brute_force(
    bins: &[GridBin],
    field: Field,
    max_lag_km: f64,
    bin_width_km: f64,
) -> Result<AutocorrelationSeries> {
    let p = prepare(bins, field, max_lag_km, bin_width_km)?;
    let mut sums = vec![Sum::default(); p.nbins];
    let mut pairs = vec![0u64; p.nbins];
    for a in 0..p.cells.len() {
        for b in a..p.cells.len() {
            let (ia, ja, za) = p.cells[a];
            let (ib, jb, zb) = p.cells[b];
            let d = p.side * (((ia - ib).pow(2) + (ja - jb).pow(2)) as f64).sqrt();
            let k = bin_of(d, p.width);
            if k < p.nbins {
                sums[k].add(za * zb);
                pairs[k] += 1;
            }
        }
    }
    Ok(finish(sums, pairs, p.width))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn cell(i: i64, j: i64, pop: f64, calls: u64) -> GridBin {
        GridBin {
            i,
            j,
            side_km: 5.0,
            population: pop,
            call_count: calls,
            call_duration: 0.0,
        }
    }

    fn close(a: &AutocorrelationSeries, b: &AutocorrelationSeries) -> bool {
        a.pairs == b.pairs
            && a.values.iter().zip(&b.values).all(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
                (None, None) => true,
                _ => false,
            })
    }

    #[test]
    fn constant_field_is_an_error() {
        let bins: Vec<GridBin> = (0..10).map(|k| cell(k, 0, 7.0, 3)).collect();
        assert!(matches!(autocorrelation(&bins, Field::Calls, 20.0, 5.0), Err(Error::ZeroVariance)));
        assert!(matches!(autocorrelation(&bins[..1], Field::Calls, 20.0, 5.0), Err(Error::Insufficient(_))));
    }

    #[test]
    fn self_bin_is_one() {
        let bins: Vec<GridBin> = (0..30).map(|k| cell(k % 6, k / 6, (k * k % 17) as f64, k as u64)).collect();
        let s = autocorrelation(&bins, Field::Population, 30.0, 5.0).unwrap();
        assert!((s.values[0].unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.pairs[0], 30);
        assert_eq!(s.centers_km[2], 10.0);
    }

    #[test]
    fn alternating_stripes_anticorrelate_at_one_step() {
        let bins: Vec<GridBin> = (0..20)
            .flat_map(|i| (0..20).map(move |j| cell(i, j, if i % 2 == 0 { 1.0 } else { 3.0 }, 0)))
            .collect();
        let s = autocorrelation(&bins, Field::Population, 10.0, 5.0).unwrap();
        // bin 1 spans [2.5, 7.5) km: horizontal and diagonal neighbours
        // differ (-1), vertical ones agree (+1)
        let horiz = 19 * 20;
        let vert = 20 * 19;
        let diag = 2 * 19 * 19;
        let expected = (vert - horiz - diag) as f64 / (horiz + vert + diag) as f64;
        assert!((s.values[1].unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn iid_field_has_no_correlation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let bins: Vec<GridBin> = (0..40)
            .flat_map(|i| (0..25).map(move |j| (i, j)))
            .map(|(i, j)| cell(i, j, rng.gen_range(0.0..1000.0), rng.gen_range(0..50)))
            .collect();
        for field in [Field::Calls, Field::Population] {
            let s = autocorrelation(&bins, field, 60.0, 5.0).unwrap();
            for k in 1..s.pairs.len() {
                if s.pairs[k] >= 100 {
                    assert!(s.values[k].unwrap().abs() < 0.1, "bin {k}: {:?}", s.values[k]);
                }
            }
        }
    }

    #[test]
    fn empty_bins_are_flagged() {
        let bins = vec![cell(0, 0, 1.0, 1), cell(10, 0, 2.0, 2)];
        let s = autocorrelation(&bins, Field::Calls, 20.0, 5.0).unwrap();
        assert!(s.values[1].is_none());
        assert_eq!(s.pairs[1], 0);
    }

    fn bins_strategy() -> impl Strategy<Value = Vec<GridBin>> {
        proptest::collection::btree_map((0i64..20, 0i64..20), (0.0f64..5000.0, 0u64..300), 2..200)
            .prop_map(|m| m.into_iter().map(|((i, j), (p, c))| cell(i, j, p, c)).collect())
    }

    proptest! {
        #[test]
        fn binned_matches_all_pairs(bins in bins_strategy(), width in 3.0f64..15.0, lag in 0.0f64..80.0) {
            for field in [Field::Calls, Field::Population] {
                let fast = autocorrelation(&bins, field, lag, width);
                let slow = autocorrelation_brute_force(&bins, field, lag, width);
                match (fast, slow) {
                    (Ok(a), Ok(b)) => prop_assert!(close(&a, &b), "{:?} vs {:?}", a, b),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
                }
            }
        }

        #[test]
        fn affine_invariant(bins in bins_strategy(), alpha in 0.01f64..100.0, beta in -1e4f64..1e4) {
            let moved: Vec<GridBin> = bins.iter().map(|b| GridBin { population: alpha * b.population + beta, ..b.clone() }).collect();
            let a = autocorrelation(&bins, Field::Population, 40.0, 5.0);
            let b = autocorrelation(&moved, Field::Population, 40.0, 5.0);
            if let (Ok(a), Ok(b)) = (a, b) {
                prop_assert!(close(&a, &b));
            }
        }
    }
}
