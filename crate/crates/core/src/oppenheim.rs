//! The form `Q_ξ(x) = β/2 ((x₁-α)² - (x₂-α)²) + x₃x₄` and lattice counts of its
//! values, which reproduce averages of the generalized pair correlation over `N in [M, 2M]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::real::{ExtReal, FixedAlpha};
use crate::statistics::intervals::{Interval, IntervalSet};

#[derive(Clone, Debug)]
pub struct FormSpec {
    pub alpha: ExtReal,
    pub beta: ExtReal,
    fixed: FixedAlpha,
    beta_f64: f64,
}

impl FormSpec {
    pub fn new(alpha: ExtReal, beta: ExtReal) -> Result<Self> {
        if beta.is_zero() {
            return Err(Error::InvalidInput("beta must be nonzero".into()));
        }
        Ok(Self { fixed: alpha.fixed(), beta_f64: beta.to_f64(), alpha, beta })
    }

    /// `Q_ξ` with `x₃ = x₄ = 0`, i.e. `β/2 (x₁ - x₂)(x₁ + x₂ - 2α)`.
    ///
    /// `x₁ + x₂ - 2α` is formed from the integer and fractional parts of `α`
    /// separately, so the only rounding is in the final products.
    pub fn difference_part(&self, x1: i64, x2: i64) -> f64 {
        let s = (x1 as i128 + x2 as i128 - 2 * self.fixed.int) as f64 - 2.0 * self.fixed.frac_f64;
        0.5 * self.beta_f64 * (x1 - x2) as f64 * s
    }
}

pub fn q_xi_value(x: [i64; 4], spec: &FormSpec) -> f64 {
    spec.difference_part(x[0], x[1]) + (x[2] as i128 * x[3] as i128) as f64
}

/// Number of integers `t` with `d + c t` in the interval, for `c > 0`.
fn run_length(iv: &Interval, d: f64, c: f64) -> u64 {
    let lo = (iv.lo - d) / c;
    let hi = (iv.hi - d) / c;
    let first = if iv.closed_lo { lo.ceil() } else { lo.floor() + 1.0 };
    let last = if iv.closed_hi { hi.floor() } else { hi.ceil() - 1.0 };
    if last < first {
        0
    } else {
        (last - first) as u64 + 1
    }
}

/// Which exceptional solutions are dropped from the count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusions {
    /// `x₁ = x₂`.
    pub diagonal: bool,
    /// `x₁ + x₂ = 2α`, only possible for `α` in `½Z`.
    pub antidiagonal: bool,
}

impl Default for Exclusions {
    fn default() -> Self {
        Self { diagonal: true, antidiagonal: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeCount {
    #[serde(rename = "M")]
    pub m: u64,
    /// `(1/M) Σ_{x₃=M}^{2M} count(x₃) / x₃`.
    pub value: f64,
    /// `(x₃, count)` with `count` the number of `(x₁, x₂, x₄)`.
    pub counts: Vec<(u64, u64)>,
}

/// `(1/M²) Σ_{x ∈ Z⁴} f(x₁/M, x₂/M, x₃/M) χ_A(Q_ξ(x))` with
/// `f = (1/x₃) χ_{B1}(x₁/x₃) χ_{B2}(x₂/x₃) χ_{[1,2]}(x₃)`, the `x₄` runs solved in closed form.
pub fn lattice_count_side(
    m: u64,
    a: &IntervalSet,
    b1: &IntervalSet,
    b2: &IntervalSet,
    spec: &FormSpec,
) -> Result<LatticeCount> {
    lattice_count_with(m, a, b1, b2, spec, Exclusions::default())
}

pub fn lattice_count_with(
    m: u64,
    a: &IntervalSet,
    b1: &IntervalSet,
    b2: &IntervalSet,
    spec: &FormSpec,
    exclude: Exclusions,
) -> Result<LatticeCount> {
    if m < 1 {
        return Err(Error::InvalidInput("M must be at least 1".into()));
    }
    for (name, s) in [("A", a), ("B1", b1), ("B2", b2)] {
        if let Some((lo, hi)) = s.bounds() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be bounded")));
            }
        }
    }
    let half = spec.alpha.is_half_integer();
    if half {
        for (name, s) in [("B1", b1), ("B2", b2)] {
            if s.bounds().is_some_and(|(lo, _)| lo < 0.0) {
                return Err(Error::InvalidInput(format!("for alpha in Z/2, {name} must lie in [0, inf)")));
            }
        }
    }
    let two_alpha = if half { spec.fixed.int * 2 + i128::from(spec.fixed.frac != 0) } else { 0 };
    let x3s: Vec<u64> = (m..=2 * m).collect();
    let counts = parallel::map(0..x3s.len(), |idx| {
        let x3 = x3s[idx];
        let c = x3 as f64;
        let i1 = b1.indices(x3, 0.0);
        let i2 = b2.indices(x3, 0.0);
        let mut count = 0u64;
        for &x1 in &i1 {
            for &x2 in &i2 {
                if exclude.diagonal && x1 == x2 {
                    continue;
                }
                if exclude.antidiagonal && half && (x1 + x2) as i128 == two_alpha {
                    continue;
                }
                let d = spec.difference_part(x1, x2);
                count += a.intervals().iter().map(|iv| run_length(iv, d, c)).sum::<u64>();
            }
        }
        (x3, count)
    });
    let s: f64 = counts.iter().map(|&(x3, c)| c as f64 / x3 as f64).sum();
    Ok(LatticeCount { m, value: s / m as f64, counts })
}

/// `|A| |B1| |B2|`.
pub fn volume_side(a: &IntervalSet, b1: &IntervalSet, b2: &IntervalSet) -> f64 {
    a.total_length() * b1.total_length() * b2.total_length()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OppenheimReport {
    #[serde(rename = "M")]
    pub m: u64,
    pub count_side: f64,
    pub volume_side: f64,
    pub relative_error: f64,
}

pub fn oppenheim_report(
    m: u64,
    a: &IntervalSet,
    b1: &IntervalSet,
    b2: &IntervalSet,
    spec: &FormSpec,
) -> Result<OppenheimReport> {
    let count = lattice_count_side(m, a, b1, b2, spec)?.value;
    let vol = volume_side(a, b1, b2);
    Ok(OppenheimReport { m, count_side: count, volume_side: vol, relative_error: (count - vol).abs() / vol })
}
