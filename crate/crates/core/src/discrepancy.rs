//! Exact discrepancy of `(n - alpha)^2 / (2N) mod 1`, Weyl sums and the
//! Erdős–Turán bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::divisor_count;
use crate::parallel;
use crate::real::ExtReal;
use crate::sequences::{phi_values, PhaseKernel, SequenceSpec};
use crate::statistics::smooth::exponential_sum;

/// Default constant in the Erdős–Turán inequality.
pub const ERDOS_TURAN_C: f64 = 3.0;
/// Points closer than this are reported as near coincidences.
pub const COINCIDENCE_BAND: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub d_exact: f64,
    pub et_bound: f64,
    pub m_used: u64,
    #[serde(rename = "tau_N")]
    pub tau_n: u64,
    /// `d_exact √N / (log N (√log N + τ(N)))`.
    pub shape_ratio: f64,
    pub near_coincidences: u64,
}

fn kernel(n: u64, alpha: &ExtReal, k_max: i64) -> Result<PhaseKernel> {
    if n < 1 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    let kernel = PhaseKernel::new(n, alpha);
    kernel.check(1, k_max)?;
    kernel.check(n as i64, k_max)?;
    Ok(kernel)
}

fn unit_weights(n: u64) -> Vec<(i64, Complex64)> {
    (1..=n as i64).map(|i| (i, Complex64::new(1.0, 0.0))).collect()
}

/// `S_k = Σ_{n=1}^N e(k (n - α)² / (2N))`.
pub fn weyl_sum(k: i64, n: u64, alpha: &ExtReal) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be nonzero".into()));
    }
    let kernel = kernel(n, alpha, k)?;
    Ok(exponential_sum(&kernel, k, &unit_weights(n)))
}

/// `|S_k|` for `k = 1..=m`.
pub fn weyl_moduli(n: u64, alpha: &ExtReal, m: u64) -> Result<Vec<f64>> {
    let kernel = kernel(n, alpha, m as i64)?;
    let w = unit_weights(n);
    Ok(parallel::map(0..m as usize, |i| exponential_sum(&kernel, i as i64 + 1, &w).norm()))
}

/// `sup_{a<b} |#{x_i in [a,b]}/N - (b - a)|` as `D⁺ + D⁻` over the sorted points.
pub fn discrepancy_exact(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("discrepancy needs at least one point".into()));
    }
    let mut x: Vec<f64> = points.iter().map(|&p| p - p.floor()).collect();
    parallel::sort_f64(&mut x);
    Ok(sorted_discrepancy(&x))
}

fn sorted_discrepancy(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mut plus, mut minus) = (0f64, 0f64);
    for (i, &xi) in x.iter().enumerate() {
        plus = plus.max((i + 1) as f64 / n - xi);
        minus = minus.max(xi - i as f64 / n);
    }
    plus + minus
}

/// Neighbouring pairs of sorted points, including across 0, closer than [`COINCIDENCE_BAND`].
pub fn near_coincidences(sorted: &[f64]) -> u64 {
    let mut c = sorted.windows(2).filter(|w| w[1] - w[0] < COINCIDENCE_BAND).count() as u64;
    if sorted.len() > 1 && sorted[0] + 1.0 - sorted[sorted.len() - 1] < COINCIDENCE_BAND {
        c += 1;
    }
    c
}

/// `C (1/m + (1/N) Σ_{k=1}^m |S_k| / k)`.
pub fn erdos_turan_bound(n: u64, alpha: &ExtReal, m: u64, c: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    let moduli = weyl_moduli(n, alpha, m)?;
    Ok(et_from_moduli(n, m, &moduli, c))
}

fn et_from_moduli(n: u64, m: u64, moduli: &[f64], c: f64) -> f64 {
    let s: f64 = moduli.iter().enumerate().map(|(i, s)| s / (i + 1) as f64).sum();
    c * (1.0 / m as f64 + s / n as f64)
}

pub fn shape_ratio(n: u64, d: f64) -> f64 {
    let l = (n as f64).ln();
    d * (n as f64).sqrt() / (l * (l.sqrt() + divisor_count(n) as f64))
}

fn sorted_points(n: u64, alpha: &ExtReal) -> Result<Vec<f64>> {
    let mut x = phi_values(&SequenceSpec::new(alpha.clone(), n))?.values;
    parallel::sort_f64(&mut x);
    Ok(x)
}

/// Exact discrepancy and the bound with `m` (default `N`).
pub fn discrepancy_report(n: u64, alpha: &ExtReal, m: Option<u64>, c: f64) -> Result<DiscrepancyReport> {
    let m = m.unwrap_or(n);
    let x = sorted_points(n, alpha)?;
    let d = sorted_discrepancy(&x);
    Ok(DiscrepancyReport {
        n,
        d_exact: d,
        et_bound: erdos_turan_bound(n, alpha, m, c)?,
        m_used: m,
        tau_n: divisor_count(n),
        shape_ratio: shape_ratio(n, d),
        near_coincidences: near_coincidences(&x),
    })
}

/// Outcome of comparing `D_N` with the bound at `m = N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    #[serde(rename = "N")]
    pub n: u64,
    pub d_exact: f64,
    /// A lower bound for the bound at `m = N`: `C/N` plus the first `terms` summands.
    pub partial_bound: f64,
    pub terms: u64,
    pub holds: bool,
}

/// Decides `D_N <= C (1/N + (1/N) Σ_{k=1}^N |S_k| / k)`. The summands are nonnegative,
/// so the sum is accumulated in blocks of `k` only until it exceeds `D_N`.
pub fn check_bound(n: u64, alpha: &ExtReal, c: f64) -> Result<BoundCheck> {
    let x = sorted_points(n, alpha)?;
    let d = sorted_discrepancy(&x);
    let kernel = kernel(n, alpha, n as i64)?;
    let w = unit_weights(n);
    let nf = n as f64;
    let mut partial = c / nf;
    let mut k = 0u64;
    let mut block = 4u64;
    while partial < d && k < n {
        let hi = (k + block).min(n);
        let lo = k;
        let s = parallel::sum_f64(lo as usize..hi as usize, |i| {
            exponential_sum(&kernel, i as i64 + 1, &w).norm() / (i + 1) as f64
        });
        partial += c * s / nf;
        k = hi;
        block *= 2;
    }
    Ok(BoundCheck { n, d_exact: d, partial_bound: partial, terms: k, holds: d <= partial })
}
