//! Sharp pair correlation by sort-and-search over the circle.

use serde::{Deserialize, Serialize};

use super::intervals::{Interval, IntervalSet};
use crate::error::{Error, Result};
use crate::parallel;
use crate::sequences::{phi_values, SequenceSpec};

/// Differences closer than this to a window endpoint are reported as ambiguous.
pub const GUARD_BAND: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub value: f64,
    /// Ordered pairs counted.
    pub pairs: u64,
    #[serde(rename = "N")]
    pub n: u64,
    /// Pairs whose difference lies within [`GUARD_BAND`] of a window endpoint.
    pub ambiguous: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Divide a count by `normalization * bin_width` to get a density.
    pub normalization: f64,
    #[serde(rename = "N")]
    pub n: u64,
}

impl CorrelationHistogram {
    pub fn densities(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(&c, e)| c as f64 / (self.normalization * (e[1] - e[0])))
            .collect()
    }

    /// `(bin_lo, bin_hi, density)` rows.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        self.bin_edges.windows(2).zip(self.densities()).map(|(e, d)| (e[0], e[1], d)).collect()
    }
}

/// An arc of the circle `[0, 1)`.
#[derive(Clone, Copy, Debug)]
struct Arc {
    lo: f64,
    hi: f64,
    closed_lo: bool,
    closed_hi: bool,
}

/// Project `A / N + Z` onto the circle as merged arcs.
fn circle_arcs(a: &IntervalSet, n: u64) -> Vec<Arc> {
    let mut pieces = Vec::new();
    for iv in a.intervals() {
        let s = iv.scale(1.0 / n as f64);
        if s.len() >= 1.0 {
            pieces.push(Interval::new(0.0, 1.0));
            continue;
        }
        let lo = s.lo - s.lo.floor();
        let hi = lo + s.len();
        if hi <= 1.0 {
            let closed_hi = s.closed_hi && hi < 1.0;
            pieces.push(Interval { lo, hi, closed_lo: s.closed_lo, closed_hi });
            if s.closed_hi && hi == 1.0 {
                pieces.push(Interval::closed(0.0, 0.0));
            }
        } else {
            pieces.push(Interval { lo, hi: 1.0, closed_lo: s.closed_lo, closed_hi: false });
            pieces.push(Interval { lo: 0.0, hi: hi - 1.0, closed_lo: true, closed_hi: s.closed_hi });
        }
    }
    IntervalSet::new(pieces)
        .intervals()
        .iter()
        .map(|i| Arc { lo: i.lo, hi: i.hi, closed_lo: i.closed_lo, closed_hi: i.closed_hi })
        .collect()
}

/// Sorted circle points with periodic counting.
struct Circle<'a> {
    sorted: &'a [f64],
}

impl Circle<'_> {
    /// Number of periodic points `x_i + m < t` minus the same count at 0.
    #[inline]
    fn below(&self, t: f64) -> i64 {
        let f = t.floor();
        let r = t - f;
        f as i64 * self.sorted.len() as i64 + self.sorted.partition_point(|&x| x < r) as i64
    }

    #[inline]
    fn at_most(&self, t: f64) -> i64 {
        let f = t.floor();
        let r = t - f;
        f as i64 * self.sorted.len() as i64 + self.sorted.partition_point(|&x| x <= r) as i64
    }

    /// Points `x_i` with `x_i - x` in the arc modulo 1.
    #[inline]
    fn count(&self, x: f64, arc: &Arc) -> i64 {
        let (t0, t1) = (x + arc.lo, x + arc.hi);
        // x + 1 may round; an arc ending at 1 ends exactly one turn after x.
        let (t1, turn) = if arc.hi == 1.0 { (x, self.sorted.len() as i64) } else { (t1, 0) };
        let upper = turn + if arc.closed_hi { self.at_most(t1) } else { self.below(t1) };
        let lower = if arc.closed_lo { self.below(t0) } else { self.at_most(t0) };
        upper - lower
    }

    fn near(&self, t: f64) -> i64 {
        self.below(t + GUARD_BAND) - self.below(t - GUARD_BAND)
    }
}

fn arcs_contain_zero(arcs: &[Arc]) -> bool {
    arcs.iter().any(|a| (a.lo == 0.0 && a.closed_lo && a.hi > 0.0) || (a.lo == 0.0 && a.hi == 0.0))
}

/// Count ordered pairs `(i, j)`, `i != j`, with `x_i - y_j` in `A/N + Z`, where
/// `xs` are the values at indices `first` and `ys` at indices `second`.
fn count_pairs(xs: &[(i64, f64)], ys: &[(i64, f64)], a: &IntervalSet, n: u64) -> (u64, u64) {
    let arcs = circle_arcs(a, n);
    if arcs.is_empty() {
        return (0, 0);
    }
    let mut sorted: Vec<f64> = xs.iter().map(|p| p.1).collect();
    parallel::sort_f64(&mut sorted);
    let mut first_idx: Vec<i64> = xs.iter().map(|p| p.0).collect();
    first_idx.sort_unstable();
    let circle = Circle { sorted: &sorted };
    let zero_in = arcs_contain_zero(&arcs);
    let nf = n as f64;
    let edges: Vec<f64> = a.intervals().iter().flat_map(|iv| [iv.lo / nf, iv.hi / nf]).collect();
    let per_point = parallel::map(0..ys.len(), |j| {
        let (idx, y) = ys[j];
        let mut c: i64 = arcs.iter().map(|arc| circle.count(y, arc)).sum();
        let own_member = first_idx.binary_search(&idx).is_ok();
        if zero_in && own_member {
            c -= 1;
        }
        let mut amb: i64 = 0;
        for &e in &edges {
            amb += circle.near(y + e);
            // The point itself sits at difference 0.
            if e == e.round() && own_member {
                amb -= 1;
            }
        }
        (c as u64, amb.max(0) as u64)
    });
    per_point.into_iter().fold((0, 0), |(p, q), (a, b)| (p + a, q + b))
}

fn indexed_values(spec: &SequenceSpec, indices: &[i64]) -> Result<Vec<(i64, f64)>> {
    let phi = spec.phi()?;
    if let (Some(&lo), Some(&hi)) = (indices.first(), indices.last()) {
        phi.check(lo)?;
        phi.check(hi)?;
    }
    Ok(parallel::map(0..indices.len(), |k| (indices[k], phi.value(indices[k]))))
}

/// `R_{2,N}(A)`: ordered pairs `i != j` in `1..=N` with
/// `phi(i) - phi(j)` in `A/N + Z`, divided by `N`.
pub fn pair_correlation(spec: &SequenceSpec, a: &IntervalSet) -> Result<PairCorrelation> {
    if spec.n < 2 {
        return Err(Error::InvalidInput("pair correlation needs N >= 2".into()));
    }
    let spec = spec.at(spec.n).with_beta(spec.beta.clone());
    let pts = phi_values(&spec)?;
    let indexed: Vec<(i64, f64)> = pts.values.iter().enumerate().map(|(i, &v)| (i as i64 + 1, v)).collect();
    let (pairs, ambiguous) = count_pairs(&indexed, &indexed, a, spec.n);
    Ok(PairCorrelation { value: pairs as f64 / spec.n as f64, pairs, n: spec.n, ambiguous })
}

/// Pair correlation restricted to `i/N` in `B1` and `j/N` in `B2`
/// (or `(i - alpha)/N`, `(j - alpha)/N` when `shifted`).
pub fn pair_correlation_general(
    spec: &SequenceSpec,
    a: &IntervalSet,
    b1: &IntervalSet,
    b2: &IntervalSet,
    shifted: bool,
) -> Result<PairCorrelation> {
    spec.validate()?;
    let shift = if shifted { spec.alpha.to_f64() } else { 0.0 };
    let i1 = b1.indices(spec.n, shift);
    let i2 = b2.indices(spec.n, shift);
    let xs = indexed_values(spec, &i1)?;
    let ys = indexed_values(spec, &i2)?;
    let (pairs, ambiguous) = count_pairs(&xs, &ys, a, spec.n);
    Ok(PairCorrelation { value: pairs as f64 / spec.n as f64, pairs, n: spec.n, ambiguous })
}

/// Pair counts over consecutive windows `[edges[k], edges[k+1])`, normalized by `N`.
pub fn pair_correlation_histogram(spec: &SequenceSpec, edges: &[f64]) -> Result<CorrelationHistogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("bin edges must be strictly increasing".into()));
    }
    if spec.n < 2 {
        return Err(Error::InvalidInput("pair correlation needs N >= 2".into()));
    }
    let pts = phi_values(&spec.at(spec.n).with_beta(spec.beta.clone()))?;
    let indexed: Vec<(i64, f64)> = pts.values.iter().enumerate().map(|(i, &v)| (i as i64 + 1, v)).collect();
    let counts = edges
        .windows(2)
        .map(|w| count_pairs(&indexed, &indexed, &IntervalSet::half_open(w[0], w[1]), spec.n).0)
        .collect();
    Ok(CorrelationHistogram { bin_edges: edges.to_vec(), counts, normalization: spec.n as f64, n: spec.n })
}

/// `k + 1` equally spaced edges on `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::ExtReal;

    fn brute(values: &[(i64, f64)], ys: &[(i64, f64)], a: &IntervalSet, n: u64) -> u64 {
        let mut c = 0;
        for &(i, x) in values {
            for &(j, y) in ys {
                if i == j {
                    continue;
                }
                let d = x - y;
                let hit = (-(n as i64) - 2..=n as i64 + 2).any(|m| a.contains(n as f64 * (d + m as f64)));
                c += hit as u64;
            }
        }
        c
    }

    #[test]
    fn matches_enumeration() {
        let spec = SequenceSpec::new(ExtReal::parse("sqrt:2", 64).unwrap(), 5);
        let a: IntervalSet = "[-1,1)".parse().unwrap();
        let pts = phi_values(&spec).unwrap();
        let idx: Vec<(i64, f64)> = pts.values.iter().enumerate().map(|(i, &v)| (i as i64 + 1, v)).collect();
        let r = pair_correlation(&spec, &a).unwrap();
        assert_eq!(r.pairs, brute(&idx, &idx, &a, 5));
        for big in ["0:3.7", "-2.5:0.2;1:2", "[0,5]", "(-7,9)"] {
            let a: IntervalSet = big.parse().unwrap();
            assert_eq!(pair_correlation(&spec, &a).unwrap().pairs, brute(&idx, &idx, &a, 5), "{big}");
        }
    }

    #[test]
    fn empty_window() {
        let spec = SequenceSpec::new(ExtReal::parse("sqrt:2", 64).unwrap(), 50);
        assert_eq!(pair_correlation(&spec, &IntervalSet::empty()).unwrap().value, 0.0);
    }

    #[test]
    fn full_circle_counts_every_pair_once() {
        let spec = SequenceSpec::new(ExtReal::parse("golden", 64).unwrap(), 40);
        let r = pair_correlation(&spec, &"0:40".parse().unwrap()).unwrap();
        assert_eq!(r.pairs, 40 * 39);
        let r = pair_correlation(&spec, &"-100:100".parse().unwrap()).unwrap();
        assert_eq!(r.pairs, 40 * 39);
    }
}
