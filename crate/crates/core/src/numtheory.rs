//! Continued fractions, Diophantine type estimates, Bézout with parity,
//! Farey bands and arithmetic functions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::ExtReal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub partial_quotients: Vec<i128>,
    /// `(p_k, q_k)`
    pub convergents: Vec<(i128, i128)>,
}

/// A rational `p / q` with `q > 0`, kept unreduced.
#[derive(Clone, Debug)]
struct Ratio {
    p: BigInt,
    q: BigInt,
}

impl Ratio {
    fn floor(&self) -> BigInt {
        self.p.div_floor(&self.q)
    }
    fn is_integer(&self) -> bool {
        (&self.p % &self.q).is_zero()
    }
    /// `1 / (self - a)`, assuming `self > a`.
    fn invert_after(&self, a: &BigInt) -> Ratio {
        Ratio { p: self.q.clone(), q: &self.p - a * &self.q }
    }
}

/// Expand `x` to at most `depth` partial quotients.
///
/// Irrational inputs are bracketed by the two endpoints of their precision
/// interval; a quotient is emitted only when both endpoints agree on it.
pub fn continued_fraction(x: &ExtReal, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let mut quotients: Vec<BigInt> = Vec::new();
    if let Some((p, q)) = x.exact() {
        let mut r = Ratio { p: p.clone(), q: q.clone() };
        while quotients.len() < depth {
            let a = r.floor();
            quotients.push(a.clone());
            if r.is_integer() {
                break;
            }
            r = r.invert_after(&a);
        }
    } else {
        let one = BigInt::one() << x.bits();
        let mut lo = Ratio { p: x.scaled() - 2, q: one.clone() };
        let mut hi = Ratio { p: x.scaled() + 2, q: one };
        while quotients.len() < depth {
            let a = lo.floor();
            if a != hi.floor() || hi.is_integer() {
                return Err(Error::PrecisionExhausted(format!(
                    "partial quotient {} of {} is ambiguous at {} bits",
                    quotients.len(),
                    x,
                    x.bits()
                )));
            }
            quotients.push(a.clone());
            if lo.is_integer() {
                return Err(Error::PrecisionExhausted(format!("expansion of {x} reached the precision floor")));
            }
            let (new_lo, new_hi) = (hi.invert_after(&a), lo.invert_after(&a));
            lo = new_lo;
            hi = new_hi;
        }
    }
    let partial_quotients = quotients
        .iter()
        .map(|a| a.to_i128())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::PrecisionExhausted("partial quotient exceeds i128".into()))?;
    let convergents = convergents_of(&partial_quotients)?;
    Ok(ContinuedFraction { partial_quotients, convergents })
}

fn convergents_of(a: &[i128]) -> Result<Vec<(i128, i128)>> {
    let (mut p2, mut p1) = (0i128, 1i128);
    let (mut q2, mut q1) = (1i128, 0i128);
    let mut out = Vec::with_capacity(a.len());
    for &ak in a {
        let p = ak.checked_mul(p1).and_then(|t| t.checked_add(p2));
        let q = ak.checked_mul(q1).and_then(|t| t.checked_add(q2));
        let (p, q) = match (p, q) {
            (Some(p), Some(q)) => (p, q),
            _ => return Err(Error::PrecisionExhausted("convergent exceeds i128".into())),
        };
        out.push((p, q));
        (p2, p1, q2, q1) = (p1, p, q1, q);
    }
    Ok(out)
}

/// `ln |x - p/q|`, computed exactly from the fixed-point representation.
fn ln_abs_error(x: &ExtReal, p: i128, q: i128) -> Result<f64> {
    let num = (x.scaled() * BigInt::from(q) - (BigInt::from(p) << x.bits())).abs();
    // The representation is accurate to 2 units; demand a wide margin.
    if num < BigInt::from(1u32 << 20) * BigInt::from(q) {
        return Err(Error::PrecisionExhausted(format!("|x - {p}/{q}| is below the working precision")));
    }
    let shift = num.bits().saturating_sub(64);
    let top = (&num >> shift).to_f64().unwrap();
    Ok(top.ln() + shift as f64 * std::f64::consts::LN_2 - (q as f64).ln() - x.bits() as f64 * std::f64::consts::LN_2)
}

/// Estimate of the Diophantine type of `x` from its convergents up to `q_max`.
///
/// For consecutive convergents `p_k/q_k`, `p_{k+1}/q_{k+1}` with denominators in
/// `[sqrt(q_max), q_max]` the local exponent is the slope of
/// `log(1/|x - p/q|)` against `log q`; the estimate is the largest such slope.
/// Using slopes removes the constant `C` in `|x - p/q| > C/q^kappa`, which
/// otherwise dominates `log(1/|x - p/q|)/log q` at small `q`.
pub fn diophantine_type_estimate(x: &ExtReal, q_max: u64) -> Result<f64> {
    if q_max < 4 {
        return Err(Error::InvalidInput("q_max must be at least 4".into()));
    }
    let q_lo = (q_max as f64).sqrt();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut depth = 8;
    loop {
        let cf = continued_fraction(x, depth)?;
        let exhausted = cf.partial_quotients.len() < depth;
        let last_q = cf.convergents.last().map(|c| c.1).unwrap_or(1);
        if last_q as f64 > q_max as f64 || exhausted {
            if exhausted && (last_q as f64) <= q_max as f64 {
                return Err(Error::InvalidInput(format!("{x} is rational with denominator {last_q}")));
            }
            for &(p, q) in &cf.convergents {
                if q < 2 || (q as f64) > q_max as f64 {
                    continue;
                }
                pts.push(((q as f64).ln(), -ln_abs_error(x, p, q)?));
            }
            break;
        }
        depth *= 2;
    }
    // Keep one convergent below the window so the first slope inside it is defined.
    let first = pts.iter().position(|&(lq, _)| lq >= q_lo.ln()).unwrap_or(pts.len());
    let window = &pts[first.saturating_sub(1)..];
    let slope = window.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).fold(f64::NEG_INFINITY, f64::max);
    if slope.is_finite() {
        Ok(slope)
    } else {
        Err(Error::InvalidInput("too few convergents below q_max".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    BEven,
    AEven,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BezoutSolution {
    pub a: i64,
    pub b: i64,
    pub k: i64,
    pub n: i64,
    pub parity_constraint: Parity,
}

/// Solve `a k + b n = -1` with the requested entry even.
///
/// Starts from the extended Euclid solution and shifts once by
/// `(a, b) -> (a + n, b - k)` if the parity is wrong. A solution with `b` even
/// exists iff `k` is odd; one with `a` even exists iff `n` is odd.
pub fn bezout_with_parity(k: i64, n: i64, constraint: Parity) -> Result<BezoutSolution> {
    if n < 1 {
        return Err(Error::InvalidInput(format!("n must be positive, got {n}")));
    }
    let g = k.extended_gcd(&n);
    if g.gcd != 1 {
        return Err(Error::NotCoprime { a: k, b: n, gcd: g.gcd });
    }
    let (mut a, mut b) = (-g.x, -g.y);
    let ok = |a: i64, b: i64| match constraint {
        Parity::BEven => b.rem_euclid(2) == 0,
        Parity::AEven => a.rem_euclid(2) == 0,
    };
    if !ok(a, b) {
        a += n;
        b -= k;
    }
    if !ok(a, b) {
        return Err(Error::ParityUnreachable { k, n });
    }
    debug_assert_eq!(a as i128 * k as i128 + b as i128 * n as i128, -1);
    Ok(BezoutSolution { a, b, k, n, parity_constraint: constraint })
}

/// Whether `v0 <= M/c <= v1`, the band predicate shared with the section enumeration.
#[inline]
pub fn in_band(m: f64, c: i64, v0: f64, v1: f64) -> bool {
    let v = m / c as f64;
    v0 <= v && v <= v1
}

/// Range of `c >= 1` with `v0 <= M/c <= v1`.
pub fn band_c_range(m: f64, v0: f64, v1: f64) -> std::ops::RangeInclusive<i64> {
    let lo = ((m / v1).ceil() as i64 - 1).max(1);
    let hi = (m / v0).floor() as i64 + 1;
    let lo = (lo..=hi).find(|&c| in_band(m, c, v0, v1)).unwrap_or(hi + 1);
    let hi = (lo..=hi).rev().find(|&c| in_band(m, c, v0, v1)).unwrap_or(lo - 1);
    lo..=hi
}

/// Coprime pairs `(c, d)` with `v0 <= M/c <= v1` and `|d/c| <= L`.
pub fn farey_band(m: f64, v0: f64, v1: f64, l: f64) -> Result<Vec<(i64, i64)>> {
    if !(m > 0.0) || !(0.25 <= v0 && v0 < v1) || !(l >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "farey band needs M > 0, 1/4 <= v0 < v1, L >= 1 (got M={m}, v0={v0}, v1={v1}, L={l})"
        )));
    }
    let mut out = Vec::new();
    for c in band_c_range(m, v0, v1) {
        let dmax = (l * c as f64).floor() as i64;
        for d in -dmax..=dmax {
            if num_integer::gcd(c, d) == 1 {
                out.push((c, d));
            }
        }
    }
    Ok(out)
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisor_count(n: u64) -> u64 {
    assert!(n >= 1, "divisor_count needs n >= 1");
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1, "euler_phi needs n >= 1");
    factorize(n).iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
}

/// All positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(token: &str, depth: usize) -> Vec<i128> {
        continued_fraction(&ExtReal::parse(token, 64).unwrap(), depth).unwrap().partial_quotients
    }

    #[test]
    fn classical_expansions() {
        assert_eq!(cf("sqrt:2", 6), vec![1, 2, 2, 2, 2, 2]);
        assert_eq!(cf("7/3", 3), vec![2, 3]);
        assert_eq!(cf("pi", 4), vec![3, 7, 15, 1]);
        assert_eq!(cf("golden", 5), vec![1, 1, 1, 1, 1]);
        assert_eq!(cf("-7/3", 5), vec![-3, 1, 2]);
    }

    #[test]
    fn precision_runs_out() {
        let x = ExtReal::parse("sqrt:2", 10).unwrap();
        assert!(matches!(continued_fraction(&x, 200), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn convergent_determinants() {
        let c = continued_fraction(&ExtReal::parse("pi", 64).unwrap(), 20).unwrap();
        for k in 1..c.convergents.len() {
            let (p, q) = c.convergents[k];
            let (pp, qp) = c.convergents[k - 1];
            let sign = if k % 2 == 1 { 1 } else { -1 };
            assert_eq!(p * qp - pp * q, sign);
            assert!(q > qp);
        }
    }

    #[test]
    fn bezout_examples() {
        let s = bezout_with_parity(1, 2, Parity::BEven).unwrap();
        assert_eq!((s.a, s.b), (-1, 0));
        let s = bezout_with_parity(3, 4, Parity::BEven).unwrap();
        assert_eq!((s.a, s.b), (5, -4));
        let s = bezout_with_parity(3, 5, Parity::AEven).unwrap();
        assert_eq!((s.a, s.b), (-2, 1));
        assert!(matches!(bezout_with_parity(2, 5, Parity::BEven), Err(Error::ParityUnreachable { .. })));
        assert!(matches!(bezout_with_parity(3, 4, Parity::AEven), Err(Error::ParityUnreachable { .. })));
        assert!(matches!(bezout_with_parity(4, 6, Parity::AEven), Err(Error::NotCoprime { gcd: 2, .. })));
    }

    #[test]
    fn arithmetic_functions() {
        assert_eq!(divisor_count(12), 6);
        assert_eq!(euler_phi(10), 4);
        assert_eq!(divisor_count(5040), 60);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn farey_examples() {
        let v = farey_band(10.0, 5.0, 10.0, 1.0).unwrap();
        let cs: std::collections::BTreeSet<i64> = v.iter().map(|p| p.0).collect();
        assert_eq!(cs.into_iter().collect::<Vec<_>>(), vec![1, 2]);
        assert!(farey_band(1.0, 2.0, 3.0, 1.0).unwrap().is_empty());
        assert!(farey_band(1.0, 0.1, 3.0, 1.0).is_err());
    }
}
