//! Band-limited majorants and minorants of the indicator of a union of intervals.
//!
//! `nu_hat_-(x) = S_-(x) rho_hat(x - c)` and `nu_hat_+(x) = lambda S_+(x) rho_hat(x - c)` where
//! `S_±` are Selberg's functions with frequencies in `[-Delta, Delta]`, and
//! `rho_hat(t) = sinc(π w t)^{2k}` is the transform of the autocorrelation of a
//! B-spline, so `0 <= rho_hat <= 1`. `lambda = 1 / min rho_hat` over the hull of `A`.
//! Then `nu_±` is supported in `[-(Delta + k w), Delta + k w]`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::intervals::IntervalSet;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::testfn::{CustomFunction, TestFunction};

const SPLINE_ORDER: i32 = 4;
/// Rounding slack allowed in the grid check of the sandwich inequality.
const GRID_SLACK: f64 = 1e-12;

/// `ψ₁(x)` for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    acc + r
        + r2 / 2.0
        + r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * 5.0 / 66.0))))
}

/// `1/z - ψ₁(1 + z)` for `z > 0`, without cancellation for large `z`.
fn beurling_gap(z: f64) -> f64 {
    if z < 10.0 {
        return 1.0 / z - trigamma(1.0 + z);
    }
    let r = 1.0 / z;
    let r2 = r * r;
    r2 * (0.5 - r * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 / 30.0))))
}

/// Beurling's function: `B(x) >= sgn(x)`, `∫ (B - sgn) = 1`, transform supported in `[-1, 1]`.
pub fn beurling(z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    let u = z.abs();
    let s = (PI * u).sin();
    let s2 = 2.0 * s * s / (PI * PI);
    if z > 0.0 {
        1.0 + s2 * beurling_gap(u)
    } else {
        -1.0 + s2 * (1.0 / (u * u) - beurling_gap(u))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Debug)]
struct Approximant {
    intervals: Vec<(f64, f64)>,
    side: Side,
    delta: f64,
    w: f64,
    center: f64,
    lambda: f64,
    name: &'static str,
}

impl Approximant {
    fn selberg(&self, x: f64) -> f64 {
        let d = self.delta;
        self.intervals
            .iter()
            .map(|&(a, b)| match self.side {
                Side::Plus => 0.5 * (beurling(d * (x - a)) + beurling(d * (b - x))),
                Side::Minus => -0.5 * (beurling(d * (a - x)) + beurling(d * (x - b))),
            })
            .sum()
    }

    fn rho_hat(&self, t: f64) -> f64 {
        let u = PI * self.w * t;
        let s = if u == 0.0 { 1.0 } else { u.sin() / u };
        s.powi(2 * SPLINE_ORDER)
    }

    /// Upper bound on `|f(x)|` at distance `d > 0` outside the hull.
    fn tail_bound(&self, d: f64, dc: f64) -> f64 {
        let count = self.intervals.len() as f64;
        let s = (count / (PI * PI * self.delta * self.delta * d * d)).min(2.0 * count);
        let r = (1.0 / (PI * self.w * dc)).powi(2 * SPLINE_ORDER).min(1.0);
        self.lambda * s * r
    }

    fn hull(&self) -> (f64, f64) {
        (self.intervals[0].0, self.intervals[self.intervals.len() - 1].1)
    }
}

impl CustomFunction for Approximant {
    fn name(&self) -> &'static str {
        self.name
    }

    fn eval(&self, x: f64) -> Complex64 {
        Complex64::new(self.lambda * self.selberg(x) * self.rho_hat(x - self.center), 0.0)
    }

    fn support(&self) -> Option<(f64, f64)> {
        None
    }

    fn essential_support(&self, tol: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.hull();
        let half = (hi - lo) / 2.0;
        let mut d = 1.0 / self.delta;
        while self.tail_bound(d, d + half) > tol {
            d *= 1.05;
            if d > 1e12 {
                return None;
            }
        }
        Some((lo - d, hi + d))
    }
}

#[derive(Clone, Debug)]
pub struct Approximants {
    /// `nu_hat_-`, evaluated on the real line.
    pub minus: TestFunction,
    /// `nu_hat_+`.
    pub plus: TestFunction,
    /// `nu_±(0) = ∫ nu_hat_±`.
    pub nu0_minus: f64,
    pub nu0_plus: f64,
    /// Radius of the support of `nu_±`.
    pub support_radius: f64,
}

fn integral(f: &TestFunction) -> Result<f64> {
    let (lo, hi) = f.essential_support(1e-14)?;
    let panels = (((hi - lo) * 4.0).ceil() as usize).max(8);
    Ok(quadrature::integrate(|x| f.eval_re(x), lo, hi, panels, 32))
}

/// `nu_hat_- <= chi_A <= nu_hat_+` with `nu_±` supported in `[-1/epsilon, 1/epsilon]`.
///
/// The inequality is checked on a grid of spacing `min(1e-3, |A|/1000)` over the hull of
/// `A` widened by 5, plus points just inside and outside each endpoint.
pub fn build_approximants(a: &IntervalSet, epsilon: f64) -> Result<Approximants> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("approximants need a nonempty set".into()));
    }
    let intervals: Vec<(f64, f64)> = a.intervals().iter().map(|i| (i.lo, i.hi)).collect();
    let (lo, hi) = (intervals[0].0, intervals[intervals.len() - 1].1);
    let k = SPLINE_ORDER as f64;
    let w = epsilon / k;
    let delta = 1.0 / epsilon - epsilon;
    let center = (lo + hi) / 2.0;
    let half = (hi - lo) / 2.0;
    if PI * w * half >= PI {
        return Err(Error::ConstructionFailed(format!("set of length {} too long for epsilon = {epsilon}", hi - lo)));
    }
    let make = |side: Side, lambda: f64, name: &'static str| Approximant {
        intervals: intervals.clone(),
        side,
        delta,
        w,
        center,
        lambda,
        name,
    };
    let probe = make(Side::Plus, 1.0, "");
    let lambda = 1.0 / probe.rho_hat(half);
    let minus = make(Side::Minus, 1.0, "selberg-minorant");
    let plus = make(Side::Plus, lambda, "selberg-majorant");

    let step = 1e-3f64.min((hi - lo) / 1000.0).max(1e-6);
    let count = ((hi - lo + 10.0) / step).ceil() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| lo - 5.0 + i as f64 * step).collect();
    for &(p, q) in &intervals {
        for x in [p, q] {
            grid.extend([x, x - 1e-9, x + 1e-9, x.next_down(), x.next_up()]);
        }
    }
    for &x in &grid {
        let chi = if a.contains(x) { 1.0 } else { 0.0 };
        let m = minus.eval(x).re;
        let p = plus.eval(x).re;
        if m > chi + GRID_SLACK || p < chi - GRID_SLACK {
            return Err(Error::ConstructionFailed(format!("sandwich fails at x = {x}: {m} <= {chi} <= {p}")));
        }
    }
    let minus = TestFunction::Custom(Arc::new(minus));
    let plus = TestFunction::Custom(Arc::new(plus));
    Ok(Approximants {
        nu0_minus: integral(&minus)?,
        nu0_plus: integral(&plus)?,
        minus,
        plus,
        support_radius: delta + k * w,
    })
}
