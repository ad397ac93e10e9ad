//! Nearest-neighbour spacings of the sorted points.

use serde::{Deserialize, Serialize};

use super::paircorr::CorrelationHistogram;
use crate::error::{Error, Result};
use crate::parallel;
use crate::sequences::{phi_values, SequenceSpec};

/// Sup-distance allowed between the gap CDF at N = 10^6 and `1 - e^{-s}` on [0, 6].
/// An implementer calibration, not a derived bound.
pub const EXPONENTIAL_KS_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub sorted_values: Vec<f64>,
    /// `N (theta_j - theta_{j-1})` for `j = 1..=N`.
    pub scaled_gaps: Vec<f64>,
    /// The first gap is taken from `theta_0 = theta_N - 1`.
    pub wraparound: bool,
}

/// Sorted `phi_N(1..=N)` and the `N` scaled gaps, wraparound gap first.
pub fn gap_distribution(spec: &SequenceSpec) -> Result<GapSample> {
    if spec.n < 1 {
        return Err(Error::InvalidInput("gap distribution needs N >= 1".into()));
    }
    let pts = phi_values(&spec.at(spec.n).with_beta(spec.beta.clone()))?;
    let mut sorted = pts.values;
    parallel::sort_f64(&mut sorted);
    let n = sorted.len();
    let nf = n as f64;
    let mut gaps = Vec::with_capacity(n);
    gaps.push(nf * (sorted[0] - (sorted[n - 1] - 1.0)));
    gaps.extend(sorted.windows(2).map(|w| nf * (w[1] - w[0])));
    Ok(GapSample { sorted_values: sorted, scaled_gaps: gaps, wraparound: true })
}

impl GapSample {
    pub fn len(&self) -> usize {
        self.scaled_gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled_gaps.is_empty()
    }

    fn sorted_gaps(&self) -> Vec<f64> {
        let mut g = self.scaled_gaps.clone();
        parallel::sort_f64(&mut g);
        g
    }

    /// Fraction of scaled gaps `<= s` at each grid point.
    pub fn ecdf(&self, grid: &[f64]) -> Vec<f64> {
        let g = self.sorted_gaps();
        let n = g.len() as f64;
        grid.iter().map(|&s| g.partition_point(|&x| x <= s) as f64 / n).collect()
    }

    /// `sup |F_N(s) - cdf(s)|` over `s` in `[lo, hi]`, including left limits at the jumps.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F, lo: f64, hi: f64) -> f64 {
        let g = self.sorted_gaps();
        let n = g.len() as f64;
        let at = |s: f64| g.partition_point(|&x| x <= s) as f64 / n;
        let mut d = (at(lo) - cdf(lo)).abs().max((at(hi) - cdf(hi)).abs());
        for (k, &x) in g.iter().enumerate() {
            if x < lo || x > hi {
                continue;
            }
            let f = cdf(x);
            d = d.max(((k + 1) as f64 / n - f).abs()).max((f - k as f64 / n).abs());
        }
        d
    }

    /// Distance to the Poisson prediction `1 - e^{-s}`.
    pub fn ks_exponential(&self, lo: f64, hi: f64) -> f64 {
        self.ks_distance(|s| 1.0 - (-s).exp(), lo, hi)
    }

    /// Gap counts per bin, normalized so densities integrate to the gap fraction in range.
    pub fn histogram(&self, edges: &[f64]) -> Result<CorrelationHistogram> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("bin edges must be strictly increasing".into()));
        }
        let g = self.sorted_gaps();
        let counts = edges
            .windows(2)
            .map(|w| (g.partition_point(|&x| x < w[1]) - g.partition_point(|&x| x < w[0])) as u64)
            .collect();
        Ok(CorrelationHistogram { bin_edges: edges.to_vec(), counts, normalization: g.len() as f64, n: g.len() as u64 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::ExtReal;

    fn sqrt2(n: u64) -> SequenceSpec {
        SequenceSpec::new(ExtReal::parse("sqrt:2", 64).unwrap(), n)
    }

    #[test]
    fn single_point_has_unit_gap() {
        let g = gap_distribution(&sqrt2(1)).unwrap();
        assert_eq!(g.scaled_gaps.len(), 1);
        assert!((g.scaled_gaps[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_direct_sort() {
        let r2 = std::f64::consts::SQRT_2;
        let mut v: Vec<f64> = (1..=4)
            .map(|n: i32| {
                let t = (n as f64 - r2).powi(2) / 8.0;
                t - t.floor()
            })
            .collect();
        v.sort_by(f64::total_cmp);
        let g = gap_distribution(&sqrt2(4)).unwrap();
        for (a, b) in g.sorted_values.iter().zip(&v) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((g.scaled_gaps[0] - 4.0 * (v[0] + 1.0 - v[3])).abs() < 1e-13);
        for j in 1..4 {
            assert!((g.scaled_gaps[j] - 4.0 * (v[j] - v[j - 1])).abs() < 1e-13);
        }
    }

    #[test]
    fn gaps_sum_to_n() {
        let g = gap_distribution(&sqrt2(997)).unwrap();
        let s: f64 = g.scaled_gaps.iter().sum();
        assert!((s - 997.0).abs() < 1e-9);
        assert!(g.scaled_gaps.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let gaps: Vec<f64> = (0..n).map(|k| -(1.0 - (k as f64 + 0.5) / n as f64).ln()).collect();
        let g = GapSample { sorted_values: vec![], scaled_gaps: gaps, wraparound: true };
        assert!((g.ks_exponential(0.0, 50.0) - 0.5 / n as f64).abs() < 1e-12);
    }
}
