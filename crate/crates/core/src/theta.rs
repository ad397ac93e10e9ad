//! Jacobi theta sums `Θ_f(τ, φ; ξ)` and the action of the group Γ̃ on their arguments.
//!
//! `Θ_f(τ, φ; ξ) = y^{1/4} Σ_n f_φ((n - ξ₂) y^{1/2}) e(½ (n - ξ₂)² x + n ξ₁)` with `τ = x + iy`
//! and `f_φ = U^φ f`. Only `|Θ_f|²` and products `Θ_f conj(Θ_g)` are invariant under Γ̃,
//! so no multiplier is tracked.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{bezout_with_parity, Parity};
use crate::parallel;
use crate::testfn::{e, TestFunction};

/// Tail allowed when truncating the sum over `n`.
pub const THETA_TAIL: f64 = 1e-10;
const MAX_TERMS: u64 = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IwasawaCoords {
    pub x: f64,
    pub y: f64,
    /// In `[0, 2π)`.
    pub phi: f64,
}

impl IwasawaCoords {
    /// `n₊(x) a(√y) r(φ)` with `r(φ) = [[cos φ, -sin φ], [sin φ, cos φ]]`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.phi.sin_cos();
        let r = self.y.sqrt();
        let (a, b) = (r * c, -r * s);
        let (cc, d) = (s / r, c / r);
        [[a + self.x * cc, b + self.x * d], [cc, d]]
    }
}

/// Iwasawa coordinates of a real matrix of determinant one, read off the bottom row.
pub fn iwasawa(m: [[f64; 2]; 2]) -> Result<IwasawaCoords> {
    let [[a, b], [c, d]] = m;
    let det = a * d - b * c;
    if (det - 1.0).abs() >= 1e-10 {
        return Err(Error::Determinant(det));
    }
    let r2 = c * c + d * d;
    Ok(IwasawaCoords { x: (a * c + b * d) / r2, y: 1.0 / r2, phi: c.atan2(d).rem_euclid(TAU) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    pub tau: Complex64,
    pub phi: f64,
    pub xi: [f64; 2],
}

impl ThetaPoint {
    pub fn new(x: f64, y: f64, phi: f64, xi: [f64; 2]) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput(format!("theta point needs Im tau > 0, got {x} + {y}i")));
        }
        Ok(Self { tau: Complex64::new(x, y), phi, xi })
    }

    pub fn x(&self) -> f64 {
        self.tau.re
    }

    pub fn y(&self) -> f64 {
        self.tau.im
    }
}

/// `(γ, (ab/2, cd/2) + m)` with `γ = [[a, b], [c, d]]` in SL(2, Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaTildeElement {
    pub matrix: [[i64; 2]; 2],
    pub m: [i64; 2],
}

impl GammaTildeElement {
    pub fn new(matrix: [[i64; 2]; 2], m: [i64; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(Error::Determinant(det as f64));
        }
        Ok(Self { matrix, m })
    }

    pub fn identity() -> Self {
        Self { matrix: [[1, 0], [0, 1]], m: [0, 0] }
    }

    /// An element with bottom row `(c, d)`, top row reduced so `|a| <= |c|/2` where possible.
    pub fn from_bottom_row(c: i64, d: i64, m: [i64; 2]) -> Result<Self> {
        let g = d.extended_gcd(&c);
        if g.gcd.abs() != 1 {
            return Err(Error::NotCoprime { a: c, b: d, gcd: g.gcd.abs() });
        }
        // d x + c y = ±1, so a = x, b = -y gives a d - b c = ±1.
        let (mut a, mut b) = (g.x * g.gcd, -g.y * g.gcd);
        if c != 0 {
            let t = (a as f64 / c as f64).round() as i64;
            a -= t * c;
            b -= t * d;
        }
        Self::new([[a, b], [c, d]], m)
    }

    /// The translation part `(ab/2, cd/2) + m`, doubled so it stays integral.
    fn doubled_translation(&self) -> [i128; 2] {
        let [[a, b], [c, d]] = self.matrix;
        [a as i128 * b as i128 + 2 * self.m[0] as i128, c as i128 * d as i128 + 2 * self.m[1] as i128]
    }

    pub fn translation(&self) -> [f64; 2] {
        let t = self.doubled_translation();
        [t[0] as f64 / 2.0, t[1] as f64 / 2.0]
    }

    /// The product `self * other`, acting as `self` after `other`.
    pub fn compose(&self, other: &Self) -> Self {
        let p = |i: usize, j: usize| {
            self.matrix[i][0] as i128 * other.matrix[0][j] as i128
                + self.matrix[i][1] as i128 * other.matrix[1][j] as i128
        };
        let matrix = [[p(0, 0), p(0, 1)], [p(1, 0), p(1, 1)]];
        let v2 = other.doubled_translation();
        let v1 = self.doubled_translation();
        let g = |i: usize| self.matrix[i][0] as i128 * v2[0] + self.matrix[i][1] as i128 * v2[1] + v1[i];
        let m0 = g(0) - matrix[0][0] * matrix[0][1];
        let m1 = g(1) - matrix[1][0] * matrix[1][1];
        debug_assert!(m0 % 2 == 0 && m1 % 2 == 0, "Γ̃ is closed under products");
        Self {
            matrix: [[matrix[0][0] as i64, matrix[0][1] as i64], [matrix[1][0] as i64, matrix[1][1] as i64]],
            m: [(m0 / 2) as i64, (m1 / 2) as i64],
        }
    }
}

/// `((aτ + b)/(cτ + d), φ + arg(cτ + d) mod 2π, γξ + (ab/2, cd/2) + m)`.
pub fn gamma_tilde_apply(g: &GammaTildeElement, p: &ThetaPoint) -> ThetaPoint {
    let [[a, b], [c, d]] = g.matrix.map(|r| r.map(|v| v as f64));
    let j = p.tau * c + d;
    let tau = (p.tau * a + b) / j;
    let t = g.translation();
    ThetaPoint {
        tau,
        phi: (p.phi + j.arg()).rem_euclid(TAU),
        xi: [a * p.xi[0] + b * p.xi[1] + t[0], c * p.xi[0] + d * p.xi[1] + t[1]],
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn frac_part(t: f64) -> f64 {
    t - t.round()
}

/// `½ (n - ξ₂)² x + n ξ₁ mod 1`, carried in double-double so that large `n² x`
/// does not eat the fractional part.
#[inline]
fn theta_phase(n: f64, x: f64, xi1: f64, xi2: f64) -> f64 {
    let (qh, ql) = two_sum(n, -xi2);
    let (sh, sl) = two_prod(qh, qh);
    let sl = sl + 2.0 * qh * ql;
    let hx = 0.5 * x;
    let (ph, pl) = two_prod(sh, hx);
    let pl = pl + sl * hx;
    let (rh, rl) = two_prod(n, xi1);
    frac_part(ph) + frac_part(rh) + (pl + rl)
}

/// Truncation threshold on `|f_φ|` so the dropped terms sum below [`THETA_TAIL`].
fn value_tolerance(y: f64) -> f64 {
    THETA_TAIL / 10.0 / (y.powf(0.25) * (1.0 + 1.0 / y.sqrt()))
}

/// `Θ` for an already transformed `f_φ` vanishing (to tolerance) outside `window`.
pub fn theta_sum_prepared(f_phi: &TestFunction, window: (f64, f64), p: &ThetaPoint) -> Result<Complex64> {
    let (x, y) = (p.x(), p.y());
    let sy = y.sqrt();
    let [xi1, xi2] = p.xi;
    let lo = (xi2 + window.0 / sy).ceil();
    let hi = (xi2 + window.1 / sy).floor();
    if hi < lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let count = hi - lo + 1.0;
    if count > MAX_TERMS as f64 {
        return Err(Error::InvalidInput(format!("theta sum would need {count:e} terms (y = {y:e})")));
    }
    let s = parallel::sum_complex(0..count as usize, |i| {
        let n = lo + i as f64;
        let w = f_phi.eval((n - xi2) * sy);
        if w == Complex64::new(0.0, 0.0) {
            return w;
        }
        w * e(theta_phase(n, x, xi1, xi2))
    });
    Ok(s * y.powf(0.25))
}

/// `f_φ` and its truncation window at height `y`.
pub fn prepare(f: &TestFunction, phi: f64, y: f64) -> Result<(TestFunction, (f64, f64))> {
    let f_phi = f.u_phi(phi)?;
    let window = f_phi.essential_support(value_tolerance(y))?;
    Ok((f_phi, window))
}

/// `Θ_f(τ, φ; ξ)`.
pub fn theta_sum(f: &TestFunction, p: &ThetaPoint) -> Result<Complex64> {
    let (f_phi, window) = prepare(f, p.phi, p.y())?;
    theta_sum_prepared(&f_phi, window, p)
}

/// `Θ_f conj(Θ_g)` at one point.
pub fn theta_cross(f: &TestFunction, g: &TestFunction, p: &ThetaPoint) -> Result<Complex64> {
    Ok(theta_sum(f, p)? * theta_sum(g, p)?.conj())
}

/// `∫_{[0,1)²} Θ_f conj(Θ_g) dξ` by the trapezoidal rule on a `points × points` grid,
/// which is exact in `ξ₁` once `points` exceeds the number of terms.
pub fn torus_integral(
    f: &TestFunction,
    g: &TestFunction,
    tau: Complex64,
    phi: f64,
    points: usize,
) -> Result<Complex64> {
    let (fp, fw) = prepare(f, phi, tau.im)?;
    let (gp, gw) = prepare(g, phi, tau.im)?;
    let h = 1.0 / points as f64;
    let rows = parallel::map(0..points, |j| -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..points {
            let p = ThetaPoint { tau, phi, xi: [i as f64 * h, j as f64 * h] };
            acc += theta_sum_prepared(&fp, fw, &p)? * theta_sum_prepared(&gp, gw, &p)?.conj();
        }
        Ok(acc)
    });
    let mut total = Complex64::new(0.0, 0.0);
    for r in rows {
        total += r?;
    }
    Ok(total * h * h)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspApprox {
    pub main: f64,
    pub error_bound: f64,
    pub m0: i64,
}

/// `ζ(s)` from above: partial sum plus the integral tail.
fn zeta_upper(s: f64) -> f64 {
    let j = 64;
    let partial: f64 = (1..=j).map(|k| (k as f64).powf(-s)).sum();
    partial + (j as f64).powf(1.0 - s) / (s - 1.0)
}

/// Single-term approximation of `|Θ_f|²` high in the cusp.
///
/// `main = y^{1/2} |f_φ(y^{1/2}(m₀ - ξ₂))|²` with `m₀` the nearest integer to `ξ₂`
/// (the even one on a tie). The bound is
/// `(4 ζ(A) 2^A + 4 ζ(A)² 4^A y^{-A/2}) C y^{(1-A)/2}`
/// with `C = sup |(1 + |x|)^A f_φ(x)|²`, from `|f_φ(x)| <= √C (1+|x|)^{-A}` and
/// `|n - ξ₂| >= |n - m₀| / 2` for `n != m₀`.
pub fn theta_cusp_approx(f: &TestFunction, p: &ThetaPoint, a_exp: f64) -> Result<CuspApprox> {
    let y = p.y();
    if y < 0.5 {
        return Err(Error::InvalidInput(format!("cusp approximation needs y >= 1/2, got {y}")));
    }
    if !(a_exp > 1.0) {
        return Err(Error::InvalidInput(format!("cusp approximation needs A > 1, got {a_exp}")));
    }
    let f_phi = f.u_phi(p.phi)?;
    let m0 = p.xi[1].round_ties_even();
    let main = y.sqrt() * f_phi.eval(y.sqrt() * (m0 - p.xi[1])).norm_sqr();
    let c = f_phi.weighted_sup_sq(a_exp)?;
    let z = zeta_upper(a_exp);
    let k = 4.0 * z * 2f64.powf(a_exp) + 4.0 * z * z * 4f64.powf(a_exp) * y.powf(-a_exp / 2.0);
    Ok(CuspApprox { main, error_bound: k * c * y.powf((1.0 - a_exp) / 2.0), m0: m0 as i64 })
}

/// The element of Γ̃ that carries `(k/(N/σ) + i/N², 0, (0, α))` to height `σ²` at angle π/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspLift {
    pub element: GammaTildeElement,
    pub from: ThetaPoint,
    pub to: ThetaPoint,
    /// `a k + b N/σ = -1`.
    pub a: i64,
    pub b: i64,
}

/// Lift for `(k, N/σ) = 1`. With `N/σ` even, `b` is taken even and the image is
/// `(a/(N/σ) + σ² i, π/2, (bα, -kα))`; with `N/σ` odd, `a` is even and the second
/// coordinate becomes `-k(α + ½)`.
pub fn cusp_lift(k: i64, n_over_sigma: i64, sigma: i64, alpha: f64) -> Result<CuspLift> {
    let parity = if n_over_sigma % 2 == 0 { Parity::BEven } else { Parity::AEven };
    let sol = bezout_with_parity(k, n_over_sigma, parity)?;
    cusp_lift_with(k, n_over_sigma, sigma, alpha, sol.a, sol.b)
}

/// [`cusp_lift`] for a caller-chosen solution of `a k + b N/σ = -1`.
pub fn cusp_lift_with(k: i64, n_over_sigma: i64, sigma: i64, alpha: f64, a: i64, b: i64) -> Result<CuspLift> {
    let q = n_over_sigma;
    if a as i128 * k as i128 + b as i128 * q as i128 != -1 {
        return Err(Error::InvalidInput(format!("({a}, {b}) does not solve a k + b N/σ = -1")));
    }
    let even = q % 2 == 0;
    if (even && b % 2 != 0) || (!even && a % 2 != 0) {
        return Err(Error::ParityUnreachable { k, n: q });
    }
    let big_n = (q * sigma) as f64;
    // ξ' = (bα + ab/2, -kα - qk/2) + m; choose m to clear the integer parts.
    let m = if even { [-(a * b) / 2, q * k / 2] } else { [-(a * b) / 2, k * (q - 1) / 2] };
    let element = GammaTildeElement::new([[a, b], [q, -k]], m)?;
    let from = ThetaPoint::new(k as f64 / q as f64, 1.0 / (big_n * big_n), 0.0, [0.0, alpha])?;
    let xi2 = if even { -(k as f64) * alpha } else { -(k as f64) * (alpha + 0.5) };
    let s = sigma as f64;
    let to = ThetaPoint::new(a as f64 / q as f64, s * s, std::f64::consts::FRAC_PI_2, [b as f64 * alpha, xi2])?;
    Ok(CuspLift { element, from, to, a, b })
}
