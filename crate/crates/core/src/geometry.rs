//! The group `G = SL(2,R) ⋉ R²`, Heisenberg coordinates, the section `n₊(u) a(v) n₋(w)`,
//! horocycle hits on the section and both sides of the equidistribution sums.

use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{band_c_range, euler_phi};
use crate::parallel;
use crate::quadrature;
use crate::real::ExtReal;
use crate::testfn::TestFunction;
use crate::theta::{theta_sum_prepared, ThetaPoint};

pub type Mat2 = [[f64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn mat_vec(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// `(g, ξ)` with `(g, ξ)(g', ξ') = (g g', g ξ' + ξ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub g: Mat2,
    pub xi: [f64; 2],
}

impl GroupElement {
    pub fn new(g: Mat2, xi: [f64; 2]) -> Result<Self> {
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if (det - 1.0).abs() >= 1e-12 {
            return Err(Error::Determinant(det));
        }
        Ok(Self { g, xi })
    }

    pub fn identity() -> Self {
        Self { g: [[1.0, 0.0], [0.0, 1.0]], xi: [0.0, 0.0] }
    }

    pub fn translation(xi: [f64; 2]) -> Self {
        Self { xi, ..Self::identity() }
    }

    pub fn n_plus(x: f64) -> Self {
        Self { g: [[1.0, x], [0.0, 1.0]], xi: [0.0, 0.0] }
    }

    pub fn n_minus(x: f64) -> Self {
        Self { g: [[1.0, 0.0], [x, 1.0]], xi: [0.0, 0.0] }
    }

    pub fn a(y: f64) -> Self {
        Self { g: [[y, 0.0], [0.0, 1.0 / y]], xi: [0.0, 0.0] }
    }

    pub fn r(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { g: [[c, -s], [s, c]], xi: [0.0, 0.0] }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let t = mat_vec(&self.g, other.xi);
        Self { g: mat_mul(&self.g, &other.g), xi: [t[0] + self.xi[0], t[1] + self.xi[1]] }
    }

    pub fn inv(&self) -> Self {
        let [[a, b], [c, d]] = self.g;
        let gi = [[d, -b], [-c, a]];
        let t = mat_vec(&gi, self.xi);
        Self { g: gi, xi: [-t[0], -t[1]] }
    }
}

/// Representative of `H(Z) \ H(R)` with coordinates in `[0, 1)³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergPoint {
    pub u: f64,
    pub xi1: f64,
    pub xi2: f64,
}

fn frac(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Left action of the integer element `(m, (p, q))`: `u -> u + m`, `ξ₂ -> ξ₂ + q`,
/// `ξ₁ -> ξ₁ + m ξ₂ + p`.
pub fn heisenberg_act(m: i64, p: i64, q: i64, u: f64, xi: [f64; 2]) -> (f64, [f64; 2]) {
    let mf = m as f64;
    (u + mf, [xi[0] + mf * xi[1] + p as f64, xi[1] + q as f64])
}

/// Reduce `(u, ξ)` into `[0, 1)³` by the integer Heisenberg group.
pub fn heisenberg_reduce(u: f64, xi: [f64; 2]) -> HeisenbergPoint {
    let q = -xi[1].floor();
    let xi2 = frac(xi[1] + q);
    let m = -u.floor();
    HeisenbergPoint { u: frac(u + m), xi1: frac(xi[0] + m * xi2), xi2 }
}

/// `(u, v, w)` with `g = n₊(u) a(v) n₋(w)`, read as `u = β/δ`, `v = 1/δ`, `w = γ/δ`.
/// `None` when `δ = 0`.
pub fn section_uvw(g: &Mat2) -> Option<(f64, f64, f64)> {
    let [[_, beta], [gamma, delta]] = *g;
    if delta == 0.0 {
        return None;
    }
    Some((beta / delta, 1.0 / delta, gamma / delta))
}

/// Section coordinates when `v0 <= v <= v1` and `|w| <= eps`.
pub fn section_coords(p: &GroupElement, eps: f64, v0: f64, v1: f64) -> Option<(f64, f64, f64)> {
    let (u, v, w) = section_uvw(&p.g)?;
    (v0 <= v && v <= v1 && w.abs() <= eps).then_some((u, v, w))
}

/// `n₊(u) a(v) n₋(w)`.
pub fn section_element(u: f64, v: f64, w: f64) -> GroupElement {
    GroupElement::n_plus(u).mul(&GroupElement::a(v)).mul(&GroupElement::n_minus(w))
}

/// `2 y² v⁻³`, the Jacobian of `(x, y, φ)` with respect to `(u, v, w)` on the section.
pub fn section_jacobian(v: f64, w: f64) -> f64 {
    let y = v * v / (1.0 + w * w);
    2.0 * y * y / (v * v * v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub c: i64,
    pub d: i64,
    pub a: i64,
    pub b: i64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

/// One passage of the horocycle through the thickened section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionHit {
    /// At the centre of the passage, `w = 0`.
    pub point: SectionPoint,
    /// `M² d / c`.
    pub x_center: f64,
    /// `x` with `|x - x_center| <= eps`, clipped to the requested range.
    pub x_interval: (f64, f64),
    pub heisenberg: HeisenbergPoint,
}

/// `(a, b)` with `a d - b c = 1`.
pub fn bezout_ad_bc(c: i64, d: i64) -> Result<(i64, i64)> {
    let g = d.extended_gcd(&c);
    if g.gcd.abs() != 1 {
        return Err(Error::NotCoprime { a: c, b: d, gcd: g.gcd.abs() });
    }
    Ok((g.x * g.gcd, -g.y * g.gcd))
}

/// `heisenberg_reduce(a/c, γ η)` for `γ = [[a, b], [c, d]]`.
pub fn attached_point(a: i64, b: i64, c: i64, d: i64, eta: [f64; 2]) -> HeisenbergPoint {
    let xi = [a as f64 * eta[0] + b as f64 * eta[1], c as f64 * eta[0] + d as f64 * eta[1]];
    heisenberg_reduce(a as f64 / c as f64, xi)
}

/// The point `(1, η) a(1/M) r(-π/2) n₋(x)` of the horocycle.
pub fn horocycle_point(m: f64, eta: [f64; 2], x: f64) -> GroupElement {
    GroupElement::translation(eta)
        .mul(&GroupElement::a(1.0 / m))
        .mul(&GroupElement::r(-PI / 2.0))
        .mul(&GroupElement::n_minus(x))
}

fn check_section_params(v0: f64, v1: f64, eps: f64) -> Result<()> {
    if !(0.25 <= v0 && v0 < v1) {
        return Err(Error::InvalidInput(format!("need 1/4 <= v0 < v1, got {v0}, {v1}")));
    }
    if !(eps > 0.0 && eps < 1.0 / 32.0) {
        return Err(Error::InvalidInput(format!("need 0 < eps < 1/32, got {eps}")));
    }
    Ok(())
}

/// Every `x` in `x_range` where the horocycle meets the thickened section modulo `Γ`:
/// `x = M² d / c + w` with `(c, d) = 1`, `v0 <= M/c <= v1`, `|w| <= eps`.
pub fn horocycle_section_hits(
    m: f64,
    eta: [f64; 2],
    v0: f64,
    v1: f64,
    eps: f64,
    x_range: (f64, f64),
) -> Result<Vec<SectionHit>> {
    check_section_params(v0, v1, eps)?;
    if !(m > 0.0) {
        return Err(Error::InvalidInput(format!("M must be positive, got {m}")));
    }
    let m2 = m * m;
    let mut hits = Vec::new();
    for c in band_c_range(m, v0, v1) {
        let cf = c as f64;
        let d_lo = ((x_range.0 - eps) * cf / m2).ceil() as i64 - 1;
        let d_hi = ((x_range.1 + eps) * cf / m2).floor() as i64 + 1;
        for d in d_lo..=d_hi {
            if c.gcd(&d) != 1 {
                continue;
            }
            let x_center = m2 * d as f64 / cf;
            let lo = (x_center - eps).max(x_range.0);
            let hi = (x_center + eps).min(x_range.1);
            if lo > hi {
                continue;
            }
            let (a, b) = bezout_ad_bc(c, d)?;
            hits.push(SectionHit {
                point: SectionPoint { c, d, a, b, u: a as f64 / cf, v: m / cf, w: 0.0 },
                x_center,
                x_interval: (lo, hi),
                heisenberg: attached_point(a, b, c, d, eta),
            });
        }
    }
    hits.sort_by(|p, q| p.x_center.total_cmp(&q.x_center));
    Ok(hits)
}

/// The Heisenberg part of an observable.
#[derive(Clone, Debug)]
pub enum ObservableKind {
    Constant(f64),
    /// `g(u) h(ξ₂)` with `g`, `h` periodised over the integers.
    Separable {
        g: TestFunction,
        h: TestFunction,
    },
    /// `|Θ_f(u + i v², 0; (ξ₁ + u/2, ξ₂))|²`. The `u/2` shift turns the integer
    /// Heisenberg action into the action of Γ̃, so the pullback is invariant.
    ThetaModulus {
        f: TestFunction,
    },
}

/// `f(v, u, ξ) = weight(v) · kind(v, u, ξ)`, invariant under the integer Heisenberg group.
#[derive(Clone, Debug)]
pub struct TestObservable {
    pub kind: ObservableKind,
    /// Compactly supported weight in `v`; `None` for the `v`-free observables of the
    /// pointwise experiment.
    pub v_weight: Option<TestFunction>,
    theta: Option<(TestFunction, (f64, f64))>,
}

/// Low-discrepancy points in `[0, 1)³` from the additive recurrence with the
/// root of `x⁴ = x + 1`.
pub fn kronecker_point(i: u64) -> [f64; 3] {
    const G: f64 = 1.220_744_084_605_759_5;
    let a = [1.0 / G, 1.0 / (G * G), 1.0 / (G * G * G)];
    let t = i as f64 + 0.5;
    [frac(t * a[0]), frac(t * a[1]), frac(t * a[2])]
}

fn periodised(f: &TestFunction, t: f64) -> Result<f64> {
    let (lo, hi) = f.essential_support(1e-16)?;
    let t = frac(t);
    let (k0, k1) = ((lo - t).floor() as i64, (hi - t).ceil() as i64);
    Ok((k0..=k1).map(|k| f.eval_re(t + k as f64)).sum())
}

impl TestObservable {
    /// Builds the observable and checks invariance under a few integer Heisenberg
    /// elements at deterministic sample points.
    pub fn new(kind: ObservableKind, v_weight: Option<TestFunction>) -> Result<Self> {
        if let Some(w) = &v_weight {
            let (lo, _) =
                w.support().ok_or_else(|| Error::InvalidInput("the v weight must be compactly supported".into()))?;
            if lo < 0.0 {
                return Err(Error::InvalidInput("the v weight must vanish for v < 0".into()));
            }
        }
        let theta = match &kind {
            ObservableKind::ThetaModulus { f } => Some((f.clone(), f.essential_support(1e-13)?)),
            ObservableKind::Separable { g, h } => {
                g.essential_support(1e-16)?;
                h.essential_support(1e-16)?;
                None
            }
            ObservableKind::Constant(_) => None,
        };
        let obs = Self { kind, v_weight, theta };
        obs.check_invariance(32, 1e-10)?;
        Ok(obs)
    }

    pub fn constant(value: f64, v_weight: Option<TestFunction>) -> Result<Self> {
        Self::new(ObservableKind::Constant(value), v_weight)
    }

    pub fn separable(g: TestFunction, h: TestFunction, v_weight: Option<TestFunction>) -> Result<Self> {
        Self::new(ObservableKind::Separable { g, h }, v_weight)
    }

    pub fn theta_modulus(f: TestFunction, v_weight: Option<TestFunction>) -> Result<Self> {
        Self::new(ObservableKind::ThetaModulus { f }, v_weight)
    }

    pub fn describe(&self) -> String {
        let k = match &self.kind {
            ObservableKind::Constant(c) => format!("constant({c})"),
            ObservableKind::Separable { g, h } => format!("separable(g={g}, h={h})"),
            ObservableKind::ThetaModulus { f } => format!("theta-modulus({f})"),
        };
        match &self.v_weight {
            Some(w) => format!("{k} * w(v)={w}"),
            None => k,
        }
    }

    /// The Heisenberg factor at fiber `v`, with no reduction applied.
    pub fn eval_raw(&self, v: f64, u: f64, xi: [f64; 2]) -> Result<f64> {
        match &self.kind {
            ObservableKind::Constant(c) => Ok(*c),
            ObservableKind::Separable { g, h } => Ok(periodised(g, u)? * periodised(h, xi[1])?),
            ObservableKind::ThetaModulus { .. } => {
                let (f, window) = self.theta.as_ref().expect("prepared at construction");
                let p = ThetaPoint::new(u, v * v, 0.0, [xi[0] + u / 2.0, xi[1]])?;
                Ok(theta_sum_prepared(f, *window, &p)?.norm_sqr())
            }
        }
    }

    pub fn weight(&self, v: f64) -> f64 {
        self.v_weight.as_ref().map_or(1.0, |w| w.eval_re(v))
    }

    /// `f(v, p)` at a reduced point.
    pub fn eval(&self, v: f64, p: &HeisenbergPoint) -> Result<f64> {
        let w = self.weight(v);
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(w * self.eval_raw(v, p.u, [p.xi1, p.xi2])?)
    }

    /// Largest deviation `|f(h·p) - f(p)|` over `points` sample points and a fixed
    /// set of integer Heisenberg elements; errors above `tol`.
    pub fn check_invariance(&self, points: u64, tol: f64) -> Result<f64> {
        const ELEMENTS: [(i64, i64, i64); 5] = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (-2, 3, -1), (3, -1, 2)];
        let mut worst: f64 = 0.0;
        for i in 0..points {
            let [a, b, c] = kronecker_point(i);
            let (v, u, xi) = (0.5 + a, 2.0 * b - 1.0, [3.0 * c - 1.0, 2.0 * a - 0.7]);
            let base = self.eval_raw(v, u, xi)?;
            for &(m, p, q) in &ELEMENTS {
                let (u2, xi2) = heisenberg_act(m, p, q, u, xi);
                let dev = (self.eval_raw(v, u2, xi2)? - base).abs() / base.abs().max(1.0);
                worst = worst.max(dev);
            }
        }
        if worst > tol {
            return Err(Error::InvalidInput(format!(
                "observable is not invariant under the integer Heisenberg group (deviation {worst:.2e})"
            )));
        }
        Ok(worst)
    }

    /// `∫ f(v, ·) dμ_H` over `[0, 1)³`.
    pub fn heisenberg_integral(&self, v: f64, qmc_points: u64) -> Result<f64> {
        match &self.kind {
            ObservableKind::Constant(c) => Ok(*c),
            ObservableKind::Separable { g, h } => Ok(g.integral().re * h.integral().re),
            ObservableKind::ThetaModulus { .. } => {
                let n = qmc_points as usize;
                let vals = parallel::map(0..n, |i| {
                    let [u, x1, x2] = kronecker_point(i as u64);
                    self.eval_raw(v, u, [x1, x2])
                });
                let mut s = 0.0;
                for x in vals {
                    s += x?;
                }
                Ok(s / n as f64)
            }
        }
    }
}

/// Points used for Heisenberg integrals of theta observables.
pub const QMC_POINTS: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistReport {
    #[serde(rename = "M")]
    pub m: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub terms: usize,
    pub observable: String,
}

fn weight_support(f: &TestObservable) -> Result<(f64, f64)> {
    let w = f.v_weight.as_ref().ok_or_else(|| Error::InvalidInput("the observable needs a compact v weight".into()))?;
    Ok(w.support().expect("checked at construction"))
}

/// `(1/M²) Σ_{(c,d)=1} ν(d/c) f(M/c, a/c, γη)`, summed over `c` in the `v`-support of `f`
/// and `d/c` in the support of `ν`. For `ν(-d/c)` pass `nu.reflect()`.
pub fn equidist_lhs(m: f64, eta: [f64; 2], nu: &TestFunction, f: &TestObservable) -> Result<(f64, usize)> {
    if !(m > 0.0) {
        return Err(Error::InvalidInput(format!("M must be positive, got {m}")));
    }
    let (vlo, vhi) = weight_support(f)?;
    let (nlo, nhi) = nu.support().ok_or_else(|| Error::InvalidInput("nu must be compactly supported".into()))?;
    if vhi <= 0.0 {
        return Ok((0.0, 0));
    }
    let c_lo = ((m / vhi).floor() as i64).max(1);
    let c_hi = if vlo > 0.0 { (m / vlo).ceil() as i64 } else { i64::MAX };
    if c_hi == i64::MAX {
        return Err(Error::InvalidInput("the v weight must vanish near 0".into()));
    }
    let cs: Vec<i64> = (c_lo..=c_hi).collect();
    let parts = parallel::map(0..cs.len(), |i| -> Result<(f64, usize)> {
        let c = cs[i];
        let cf = c as f64;
        let v = m / cf;
        if f.weight(v) == 0.0 {
            return Ok((0.0, 0));
        }
        let mut acc = 0.0;
        let mut count = 0;
        for d in (nlo * cf).ceil() as i64..=(nhi * cf).floor() as i64 {
            if c.gcd(&d) != 1 {
                continue;
            }
            let nv = nu.eval_re(d as f64 / cf);
            if nv == 0.0 {
                continue;
            }
            let (a, b) = bezout_ad_bc(c, d)?;
            acc += nv * f.eval(v, &attached_point(a, b, c, d, eta))?;
            count += 1;
        }
        Ok((acc, count))
    });
    let (mut total, mut terms) = (0.0, 0);
    for p in parts {
        let (a, n) = p?;
        total += a;
        terms += n;
    }
    Ok((total / (m * m), terms))
}

/// `(6/π²) ν̂(0) ∫₀^∞ ∫ f(v, ·) v⁻³ dμ_H dv`.
pub fn equidist_rhs(nu: &TestFunction, f: &TestObservable) -> Result<f64> {
    let (vlo, vhi) = weight_support(f)?;
    let nu_hat0 = nu.integral().re;
    let weight = |v: f64| f.weight(v) / (v * v * v);
    let inner = match f.kind {
        ObservableKind::ThetaModulus { .. } => {
            let panels = 8;
            let nodes = quadrature::rule(16);
            let h = (vhi - vlo) / panels as f64;
            let mut s = 0.0;
            for p in 0..panels {
                let mid = vlo + (p as f64 + 0.5) * h;
                for &(x, w) in nodes {
                    let v = mid + 0.5 * h * x;
                    s += 0.5 * h * w * weight(v) * f.heisenberg_integral(v, QMC_POINTS)?;
                }
            }
            s
        }
        _ => quadrature::integrate_adaptive(weight, vlo, vhi, 1e-12) * f.heisenberg_integral(1.0, 0)?,
    };
    Ok(6.0 / (PI * PI) * nu_hat0 * inner)
}

pub fn equidist_report(m: f64, eta: [f64; 2], nu: &TestFunction, f: &TestObservable) -> Result<EquidistReport> {
    let (lhs, terms) = equidist_lhs(m, eta, nu, f)?;
    let rhs = equidist_rhs(nu, f)?;
    Ok(EquidistReport { m, lhs, rhs, relative_error: (lhs - rhs).abs() / rhs.abs(), terms, observable: f.describe() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub c: u64,
    pub alpha: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub terms: usize,
    pub observable: String,
}

/// `(1/φ(c)) Σ_{(c,d)=1} ν(d/c) f(a/c, bα + a/2, dα + c/2)` against `ν̂(0) ∫ f dμ_H`.
/// The observable must not depend on `v`; theta observables are taken at `v = 1`.
pub fn conjecture_experiment(
    c: u64,
    alpha: &ExtReal,
    nu: &TestFunction,
    f: &TestObservable,
) -> Result<ConjectureReport> {
    if c < 2 {
        return Err(Error::InvalidInput(format!("c must be at least 2, got {c}")));
    }
    if f.v_weight.is_some() {
        return Err(Error::InvalidInput("the pointwise experiment takes a v-free observable".into()));
    }
    let (nlo, nhi) = nu.support().ok_or_else(|| Error::InvalidInput("nu must be compactly supported".into()))?;
    let ci = c as i64;
    let cf = c as f64;
    let al = alpha.to_f64();
    let ds: Vec<i64> = ((nlo * cf).ceil() as i64..=(nhi * cf).floor() as i64).filter(|d| ci.gcd(d) == 1).collect();
    let vals = parallel::map(0..ds.len(), |i| -> Result<f64> {
        let d = ds[i];
        let nv = nu.eval_re(d as f64 / cf);
        if nv == 0.0 {
            return Ok(0.0);
        }
        let (a, b) = bezout_ad_bc(ci, d)?;
        let xi = [b as f64 * al + a as f64 / 2.0, d as f64 * al + cf / 2.0];
        Ok(nv * f.eval(1.0, &heisenberg_reduce(a as f64 / cf, xi))?)
    });
    let mut lhs = 0.0;
    for v in vals {
        lhs += v?;
    }
    lhs /= euler_phi(c) as f64;
    let rhs = nu.integral().re * f.heisenberg_integral(1.0, QMC_POINTS)?;
    Ok(ConjectureReport {
        c,
        alpha: alpha.label().to_string(),
        lhs,
        rhs,
        relative_error: (lhs - rhs).abs() / rhs.abs(),
        terms: ds.len(),
        observable: f.describe(),
    })
}
