//! The points `beta (n - alpha)^2 / (2N) mod 1` and the phases
//! `k (n - alpha)^2 / (2N) mod 1`, reduced exactly before rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel;
use crate::real::{frac_to_f64, ratio_to_f64, wrap_unit, ExtReal, FixedAlpha};

/// Accuracy every reduced phase must certify.
pub const PHASE_TOLERANCE: f64 = 1e-12;
/// Rounding error of the double-precision tail of a reduction.
const ROUNDING: f64 = 4e-16;
const MAX_ARG: i64 = 1_000_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct SequenceSpec {
    pub alpha: ExtReal,
    pub beta: ExtReal,
    #[serde(rename = "N")]
    pub n: u64,
    /// Inclusive index range, `1..=N` by default.
    pub n_range: (i64, i64),
}

impl SequenceSpec {
    pub fn new(alpha: ExtReal, n: u64) -> Self {
        Self { alpha, beta: ExtReal::from_int(1), n, n_range: (1, n as i64) }
    }

    pub fn with_beta(mut self, beta: ExtReal) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_range(mut self, lo: i64, hi: i64) -> Self {
        self.n_range = (lo, hi);
        self
    }

    /// Same parameters with a different `N` (and the default index range).
    pub fn at(&self, n: u64) -> Self {
        Self { alpha: self.alpha.clone(), beta: self.beta.clone(), n, n_range: (1, n as i64) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        if self.beta.is_zero() {
            return Err(Error::InvalidInput("beta must be nonzero".into()));
        }
        if self.n_range.0 > self.n_range.1 {
            return Err(Error::InvalidInput("empty index range".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.n_range.1 - self.n_range.0 + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Evaluator for `phi_N(n)` at arbitrary integers `n`.
    pub fn phi(&self) -> Result<PhiEvaluator> {
        self.validate()?;
        PhiEvaluator::new(&self.alpha, &self.beta, self.n)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModOnePoints {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub spec: SequenceSpec,
    pub max_abs_error: f64,
}

/// `frac(k (n - alpha)^2 / (2N))` for fixed `N` and `alpha`.
///
/// With `alpha = A + F`, `m = n - A`:
/// `k (m - F)^2 / (2N) = k m^2 / (2N) - k m F / N + k F^2 / (2N)`.
/// The first term is reduced mod 1 in 128-bit integers; in the other two the
/// integer multiples of `F` and `F^2` are reduced by wrapping 128-bit products
/// and only the remainders below 1 are formed in double precision.
#[derive(Clone, Copy, Debug)]
pub struct PhaseKernel {
    pub n: u64,
    two_n: i128,
    alpha: FixedAlpha,
}

impl PhaseKernel {
    pub fn new(n: u64, alpha: &ExtReal) -> Self {
        assert!(n >= 1);
        Self { n, two_n: 2 * n as i128, alpha: alpha.fixed() }
    }

    pub fn alpha(&self) -> &FixedAlpha {
        &self.alpha
    }

    /// `frac(k (n - alpha)^2 / (2N))` without range checks.
    #[inline]
    pub fn frac(&self, n: i64, k: i64) -> f64 {
        let nn = self.n as i128;
        let k = k as i128;
        let m = n as i128 - self.alpha.int;
        let f = self.alpha.frac;
        // k m^2 mod 2N
        let m_red = m.rem_euclid(self.two_n);
        let t1 = (k.rem_euclid(self.two_n) * ((m_red * m_red) % self.two_n)) % self.two_n;
        let t1 = t1 as f64 / self.two_n as f64;
        // frac(k m F / N): k m = N s + r
        let q = k * m;
        let (s, r) = (q.div_euclid(nn), q.rem_euclid(nn));
        let t2 = frac_to_f64((s as u128).wrapping_mul(f)) + r as f64 * self.alpha.frac_f64 / nn as f64;
        // frac(k F^2 / (2N)): k = 2N s' + r'
        let (s2, r2) = (k.div_euclid(self.two_n), k.rem_euclid(self.two_n));
        let f2 = self.alpha.frac_sq;
        let t3 = frac_to_f64((s2 as u128).wrapping_mul(f2)) + r2 as f64 * frac_to_f64(f2) / self.two_n as f64;
        wrap_unit(t1 - t2 + t3)
    }

    /// `frac(k (2(n - alpha) + 1) / (2N))`, the step of the phase from `n` to `n + 1`.
    #[inline]
    pub fn frac_step(&self, n: i64, k: i64) -> f64 {
        let nn = self.n as i128;
        let k = k as i128;
        let m = n as i128 - self.alpha.int;
        let t1 = (k * (2 * m + 1)).rem_euclid(self.two_n) as f64 / self.two_n as f64;
        let (s, r) = (k.div_euclid(nn), k.rem_euclid(nn));
        let t2 = frac_to_f64((s as u128).wrapping_mul(self.alpha.frac)) + r as f64 * self.alpha.frac_f64 / nn as f64;
        wrap_unit(t1 - t2)
    }

    /// Bound on the error of [`PhaseKernel::frac`].
    pub fn error_bound(&self, n: i64, k: i64) -> f64 {
        let m = (n as f64 - self.alpha.to_f64()).abs() + 1.0;
        let k = (k as f64).abs();
        // Sensitivity of the phase to alpha plus truncation of F^2 and rounding.
        ROUNDING + 2.0 * k * m / self.n as f64 * self.alpha.err + (k / self.two_n as f64 + 1.0) * 2f64.powi(-126)
    }

    pub fn check(&self, n: i64, k: i64) -> Result<()> {
        if n.abs() > MAX_ARG || k.abs() > MAX_ARG {
            return Err(Error::PrecisionExhausted(format!(
                "phase arguments n={n}, k={k} exceed the 1e9 range of the exact reduction"
            )));
        }
        let b = self.error_bound(n, k);
        if b > PHASE_TOLERANCE {
            return Err(Error::PrecisionExhausted(format!(
                "phase error bound {b:.2e} exceeds {PHASE_TOLERANCE:.0e}; raise the precision"
            )));
        }
        Ok(())
    }
}

/// `frac(k (n - alpha)^2 / (2N))` with the accuracy check.
pub fn frac_quadratic(n: i64, k: i64, big_n: u64, alpha: &ExtReal) -> Result<f64> {
    if big_n < 1 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    let kernel = PhaseKernel::new(big_n, alpha);
    kernel.check(n, k)?;
    Ok(kernel.frac(n, k))
}

/// Evaluates `phi_N(n) = frac(beta (n - alpha)^2 / (2N))`.
///
/// Integer `beta` goes through [`PhaseKernel`]; other values through big
/// integer fixed-point arithmetic.
#[derive(Clone, Debug)]
pub enum PhiEvaluator {
    Integer { kernel: PhaseKernel, beta: i64 },
    General { alpha: BigInt, beta: BigInt, bits: u32, n: u64, err: f64 },
}

impl PhiEvaluator {
    pub fn new(alpha: &ExtReal, beta: &ExtReal, n: u64) -> Result<Self> {
        if let Some(b) = beta.as_integer() {
            if b.abs() <= MAX_ARG {
                return Ok(Self::Integer { kernel: PhaseKernel::new(n, alpha), beta: b });
            }
        }
        let bits = alpha.bits().max(beta.bits());
        let a = alpha.scaled() << (bits - alpha.bits());
        let b = beta.scaled() << (bits - beta.bits());
        let err = alpha.abs_error() + beta.abs_error();
        Ok(Self::General { alpha: a, beta: b, bits, n, err })
    }

    #[inline]
    pub fn value(&self, i: i64) -> f64 {
        match self {
            Self::Integer { kernel, beta } => kernel.frac(i, *beta),
            Self::General { alpha, beta, bits, n, .. } => {
                let m = (BigInt::from(i) << *bits) - alpha;
                let num = &m * &m * beta;
                let den = BigInt::from(2 * n) << (3 * bits);
                let r = num.mod_floor(&den);
                wrap_unit(ratio_to_f64(&r, &den))
            }
        }
    }

    pub fn error_bound(&self, i: i64) -> f64 {
        match self {
            Self::Integer { kernel, beta } => kernel.error_bound(i, *beta),
            Self::General { alpha, beta, bits, n, err } => {
                let scale = BigInt::one() << *bits;
                let a = ratio_to_f64(alpha, &scale);
                let b = ratio_to_f64(beta, &scale);
                let m = (i as f64 - a).abs() + 1.0;
                ROUNDING + err * (b.abs() * m + m * m) / *n as f64
            }
        }
    }

    pub fn check(&self, i: i64) -> Result<()> {
        if i.abs() > MAX_ARG {
            return Err(Error::PrecisionExhausted(format!("index {i} exceeds the 1e9 range")));
        }
        let b = self.error_bound(i);
        if b > PHASE_TOLERANCE {
            return Err(Error::PrecisionExhausted(format!(
                "error bound {b:.2e} at n={i} exceeds {PHASE_TOLERANCE:.0e}"
            )));
        }
        Ok(())
    }
}

/// `phi_N(n)` for every `n` in the index range.
pub fn phi_values(spec: &SequenceSpec) -> Result<ModOnePoints> {
    let phi = spec.phi()?;
    let (lo, hi) = spec.n_range;
    phi.check(lo)?;
    phi.check(hi)?;
    let max_abs_error = phi.error_bound(lo).max(phi.error_bound(hi));
    let values = parallel::map(0..spec.len(), |i| phi.value(lo + i as i64));
    Ok(ModOnePoints { values, spec: spec.clone(), max_abs_error })
}

/// `frac(p / q)` for integers, used by tests and oracles.
pub fn frac_ratio(p: i128, q: i128) -> f64 {
    let (_, r) = p.div_mod_floor(&q);
    r.to_f64().unwrap() / q.to_f64().unwrap()
}
