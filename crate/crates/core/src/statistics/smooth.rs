//! Smooth pair correlation, the sum `Q_N(nu, h)` and its split by `gcd(k, N)`.

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::divisors;
use crate::parallel;
use crate::sequences::{PhaseKernel, SequenceSpec};
use crate::testfn::{e, TestFunction};
use crate::theta::{theta_sum_prepared, ThetaPoint};

/// Truncation error allowed in the smooth sums.
pub const SMOOTH_TAIL: f64 = 1e-10;
/// Phases in the `Q_N` recurrence are recomputed exactly this often.
const RESYNC: usize = 64;

fn compact_support(f: &TestFunction, what: &str) -> Result<(f64, f64)> {
    f.support().ok_or_else(|| Error::InvalidInput(format!("{what} must be compactly supported, got {}", f.kind())))
}

/// Integers `n` with `(n - alpha)/N` in `[lo, hi]`.
fn index_range(lo: f64, hi: f64, alpha: f64, n: u64) -> (i64, i64) {
    let nf = n as f64;
    ((alpha + lo * nf).ceil() as i64, (alpha + hi * nf).floor() as i64)
}

fn weights(h: &TestFunction, range: (i64, i64), alpha: f64, n: u64) -> Vec<(i64, Complex64)> {
    (range.0..=range.1)
        .map(|i| (i, h.eval((i as f64 - alpha) / n as f64)))
        .filter(|(_, w)| *w != Complex64::new(0.0, 0.0))
        .collect()
}

/// `(1/N) Σ_m Σ_{i,j} h1((i-α)/N) h2((j-α)/N) f(N(φ(i) - φ(j) + m))`, real part.
/// The diagonal `i = j` is included.
pub fn smooth_pair_correlation_cross(
    spec: &SequenceSpec,
    f: &TestFunction,
    h1: &TestFunction,
    h2: &TestFunction,
) -> Result<f64> {
    spec.validate()?;
    let n = spec.n;
    let nf = n as f64;
    let alpha = spec.alpha.to_f64();
    let (lo1, hi1) = compact_support(h1, "h")?;
    let (lo2, hi2) = compact_support(h2, "h")?;
    let w1 = weights(h1, index_range(lo1, hi1, alpha, n), alpha, n);
    let w2 = weights(h2, index_range(lo2, hi2, alpha, n), alpha, n);
    if w1.is_empty() || w2.is_empty() {
        return Ok(0.0);
    }
    let mass = w1.iter().map(|w| w.1.norm()).sum::<f64>() * w2.iter().map(|w| w.1.norm()).sum::<f64>() / nf;
    let (flo, fhi) = f.essential_support(SMOOTH_TAIL / 10.0 / mass.max(1.0))?;
    let phi = spec.phi()?;
    for i in [w1[0].0, w1[w1.len() - 1].0, w2[0].0, w2[w2.len() - 1].0] {
        phi.check(i)?;
    }
    let p1: Vec<f64> = w1.iter().map(|&(i, _)| phi.value(i)).collect();
    let p2: Vec<f64> = w2.iter().map(|&(j, _)| phi.value(j)).collect();
    let total = parallel::sum_complex(0..w1.len(), |a| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &(_, wj)) in w2.iter().enumerate() {
            let d = p1[a] - p2[b];
            let m_lo = (flo / nf - d).ceil() as i64;
            let m_hi = (fhi / nf - d).floor() as i64;
            let mut s = Complex64::new(0.0, 0.0);
            for m in m_lo..=m_hi {
                s += f.eval(nf * (d + m as f64));
            }
            acc += s * wj;
        }
        acc * w1[a].1
    });
    Ok(total.re / nf)
}

/// [`smooth_pair_correlation_cross`] with `h1 = h2 = h`.
pub fn smooth_pair_correlation(spec: &SequenceSpec, f: &TestFunction, h: &TestFunction) -> Result<f64> {
    smooth_pair_correlation_cross(spec, f, h, h)
}

/// One term of `Q_N`: `k`, `nu(k/N)` and `|N^{-1/2} Σ_n h((n-α)/N) e(k(n-α)²/(2N))|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QnTerm {
    pub k: i64,
    pub nu: f64,
    pub modulus_sq: f64,
}

fn require_unit_beta(spec: &SequenceSpec) -> Result<()> {
    if spec.beta.as_integer() != Some(1) {
        return Err(Error::InvalidInput(format!("Q_N is defined for beta = 1, got {}", spec.beta)));
    }
    spec.validate()
}

/// `k` with `nu(k/N)` possibly nonzero, `k != 0`.
fn k_values(nu: &TestFunction, n: u64) -> Result<Vec<i64>> {
    let (lo, hi) = compact_support(nu, "nu")?;
    let nf = n as f64;
    Ok(((lo * nf).ceil() as i64..=(hi * nf).floor() as i64).filter(|&k| k != 0).collect())
}

/// `Σ_n w_n e(k(n-α)²/(2N))` by multiplicative recurrence, resynchronised every
/// [`RESYNC`] terms from the exact reduction.
pub(crate) fn exponential_sum(kernel: &PhaseKernel, k: i64, w: &[(i64, Complex64)]) -> Complex64 {
    let n = kernel.n as i64;
    let rr = e(k.rem_euclid(n) as f64 / n as f64);
    let mut total = Complex64::new(0.0, 0.0);
    for block in w.chunks(RESYNC) {
        let mut cur = block[0].0;
        let mut z = e(kernel.frac(cur, k));
        let mut r = e(kernel.frac_step(cur, k));
        for &(i, wi) in block {
            while cur < i {
                z *= r;
                r *= rr;
                cur += 1;
            }
            total += wi * z;
        }
    }
    total
}

/// Every term of `Q_N(nu, h)`, from the exact phase reduction.
pub fn q_n_terms(spec: &SequenceSpec, nu: &TestFunction, h: &TestFunction) -> Result<Vec<QnTerm>> {
    require_unit_beta(spec)?;
    let n = spec.n;
    let alpha = spec.alpha.to_f64();
    let (lo, hi) = compact_support(h, "h")?;
    let w = weights(h, index_range(lo, hi, alpha, n), alpha, n);
    let ks = k_values(nu, n)?;
    if w.is_empty() || ks.is_empty() {
        return Ok(Vec::new());
    }
    let kernel = PhaseKernel::new(n, &spec.alpha);
    for &k in [ks[0], ks[ks.len() - 1]].iter() {
        kernel.check(w[0].0, k)?;
        kernel.check(w[w.len() - 1].0, k)?;
    }
    let nf = n as f64;
    Ok(parallel::map(0..ks.len(), |idx| {
        let k = ks[idx];
        let s = exponential_sum(&kernel, k, &w);
        QnTerm { k, nu: nu.eval_re(k as f64 / nf), modulus_sq: s.norm_sqr() / nf }
    }))
}

fn q_from_terms<'a>(terms: impl Iterator<Item = &'a QnTerm>, n: u64) -> f64 {
    terms.map(|t| t.nu * t.modulus_sq).sum::<f64>() / n as f64
}

/// `Q_N(nu, h) = (1/N) Σ_{k≠0} nu(k/N) |N^{-1/2} Σ_n h((n-α)/N) e(k(n-α)²/(2N))|²`.
pub fn q_n_direct(spec: &SequenceSpec, nu: &TestFunction, h: &TestFunction) -> Result<f64> {
    Ok(q_from_terms(q_n_terms(spec, nu, h)?.iter(), spec.n))
}

/// `|Θ_h(k/N + i/N², 0, (0, α))|²` in double precision through the theta module.
fn theta_modulus_sq(h: &TestFunction, window: (f64, f64), k: i64, n: u64, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    let p = ThetaPoint::new(k as f64 / nf, 1.0 / (nf * nf), 0.0, [0.0, alpha])?;
    Ok(theta_sum_prepared(h, window, &p)?.norm_sqr())
}

/// `Q_N` as `(1/N) Σ_{k≠0} nu(k/N) |Θ_h(k/N + i/N², 0, (0, α))|²`.
pub fn q_n_theta(spec: &SequenceSpec, nu: &TestFunction, h: &TestFunction) -> Result<f64> {
    require_unit_beta(spec)?;
    let n = spec.n;
    let alpha = spec.alpha.to_f64();
    let window = compact_support(h, "h")?;
    let ks = k_values(nu, n)?;
    let vals = parallel::map(0..ks.len(), |i| {
        let k = ks[i];
        theta_modulus_sq(h, window, k, n, alpha).map(|t| nu.eval_re(k as f64 / n as f64) * t)
    });
    let mut total = 0.0;
    for v in vals {
        total += v?;
    }
    Ok(total / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorDecomposition {
    /// Terms with `gcd(k, N) <= N^delta`, evaluated as theta sums.
    pub main: f64,
    /// `q_direct - main`.
    pub tail: f64,
    /// The same partition of the direct terms.
    pub main_direct: f64,
    pub q_direct: f64,
    /// Divisors `sigma` of `N` with `sigma <= N^delta`.
    pub sigmas: Vec<u64>,
}

/// Split `Q_N` by `sigma = gcd(k, N)`: `main` keeps `sigma <= N^delta`.
pub fn q_n_divisor_decomposition(
    spec: &SequenceSpec,
    nu: &TestFunction,
    h: &TestFunction,
    delta: f64,
) -> Result<DivisorDecomposition> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = spec.n;
    let cutoff = (n as f64).powf(delta);
    let sigmas: Vec<u64> = divisors(n).into_iter().filter(|&s| s as f64 <= cutoff).collect();
    let terms = q_n_terms(spec, nu, h)?;
    let in_main = |k: i64| (k.unsigned_abs().gcd(&n) as f64) <= cutoff;
    let q_direct = q_from_terms(terms.iter(), n);
    let main_direct = q_from_terms(terms.iter().filter(|t| in_main(t.k)), n);
    let alpha = spec.alpha.to_f64();
    let window = compact_support(h, "h")?;
    let kept: Vec<&QnTerm> = terms.iter().filter(|t| in_main(t.k)).collect();
    let vals =
        parallel::map(0..kept.len(), |i| theta_modulus_sq(h, window, kept[i].k, n, alpha).map(|t| kept[i].nu * t));
    let mut main = 0.0;
    for v in vals {
        main += v?;
    }
    main /= n as f64;
    Ok(DivisorDecomposition { main, tail: q_direct - main, main_direct, q_direct, sigmas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::ExtReal;

    fn spec(a: &str, n: u64) -> SequenceSpec {
        SequenceSpec::new(ExtReal::parse(a, 64).unwrap(), n)
    }

    /// Triple sum over a fixed wide `m` range and all indices in the support.
    fn brute(spec: &SequenceSpec, f: &TestFunction, h1: &TestFunction, h2: &TestFunction) -> f64 {
        let n = spec.n as f64;
        let a = spec.alpha.to_f64();
        let phi = |i: i64| {
            let t = (i as f64 - a).powi(2) / (2.0 * n);
            t - t.floor()
        };
        let mut s = 0.0;
        for i in -2 * spec.n as i64..=3 * spec.n as i64 {
            let x = h1.eval_re((i as f64 - a) / n);
            if x == 0.0 {
                continue;
            }
            for j in -2 * spec.n as i64..=3 * spec.n as i64 {
                let y = h2.eval_re((j as f64 - a) / n);
                if y == 0.0 {
                    continue;
                }
                for m in -40..=40 {
                    s += x * y * f.eval_re(n * (phi(i) - phi(j) + m as f64));
                }
            }
        }
        s / n
    }

    #[test]
    fn zero_weight() {
        let s = spec("sqrt:2", 7);
        let f = TestFunction::gaussian(0.0, 1.0);
        assert_eq!(smooth_pair_correlation(&s, &f, &TestFunction::Zero).unwrap_or(0.0), 0.0);
        assert_eq!(q_n_direct(&s, &TestFunction::Zero, &TestFunction::bump_on(-0.5, 1.5)).unwrap_or(0.0), 0.0);
    }

    #[test]
    fn matches_triple_sum() {
        let s = spec("sqrt:3", 12);
        let f = TestFunction::gaussian(0.0, 1.5);
        let h = TestFunction::bump_on(-0.3, 1.2);
        let v = smooth_pair_correlation(&s, &f, &h).unwrap();
        assert!((v - brute(&s, &f, &h, &h)).abs() < 1e-9, "{v}");
        let s = spec("sqrt:2", 9);
        let (h1, h2) = (TestFunction::bump_on(0.0, 1.0), TestFunction::bump_on(-0.4, 0.9));
        let v = smooth_pair_correlation_cross(&s, &f, &h1, &h2).unwrap();
        assert!((v - brute(&s, &f, &h1, &h2)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn poisson_identity() {
        let s = spec("sqrt:2", 7);
        let nu = TestFunction::gaussian(0.0, 0.8);
        let f = nu.u_phi(std::f64::consts::FRAC_PI_2).unwrap();
        let h = TestFunction::bump_on(-0.5, 1.5);
        let lhs = smooth_pair_correlation(&s, &f, &h).unwrap();
        // nu is not compactly supported; sum k directly over a wide range.
        let a = s.alpha.to_f64();
        let n = 7.0;
        let sum_h: f64 = (-10..=20).map(|i| h.eval_re((i as f64 - a) / n)).sum();
        let mut q = 0.0;
        for k in (-80i64..=80).filter(|&k| k != 0) {
            let mut z = Complex64::new(0.0, 0.0);
            for i in -10..=20 {
                z += e(k as f64 * (i as f64 - a).powi(2) / (2.0 * n)) * h.eval_re((i as f64 - a) / n);
            }
            q += nu.eval_re(k as f64 / n) * z.norm_sqr() / n;
        }
        let rhs = nu.eval_re(0.0) * sum_h * sum_h / (n * n) + q / n;
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn theta_representation() {
        let nu = TestFunction::bump_on(-1.5, 1.5);
        let h = TestFunction::bump_on(-0.5, 1.5);
        for n in [1, 2, 7, 30] {
            let s = spec("golden", n);
            let d = q_n_direct(&s, &nu, &h).unwrap();
            let t = q_n_theta(&s, &nu, &h).unwrap();
            assert!((d - t).abs() < 1e-8, "N={n}: {d} vs {t}");
        }
    }

    #[test]
    fn decomposition_partitions() {
        let nu = TestFunction::bump_on(-1.0, 1.0);
        let h = TestFunction::bump_on(-0.5, 1.5);
        let r = q_n_divisor_decomposition(&spec("sqrt:2", 12), &nu, &h, 0.5).unwrap();
        assert_eq!(r.sigmas, vec![1, 2, 3]);
        assert!((r.main + r.tail - r.q_direct).abs() < 1e-12);
        assert!((r.main - r.main_direct).abs() < 1e-8);
        let r = q_n_divisor_decomposition(&spec("sqrt:2", 13), &nu, &h, 0.5).unwrap();
        assert_eq!(r.sigmas, vec![1]);
    }
}
