//! Test functions: evaluation, Fourier transforms and the operators U^phi.
//!
//! Fourier convention: `f_hat(xi) = ∫ f(x) e(-x xi) dx` with `e(t) = exp(2πit)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature;

/// Width of the excluded band around multiples of pi for the quadrature branch of U^phi.
pub const SINGULAR_BAND: f64 = 0.05;

/// `exp(2πi t)`, reducing `t` mod 1 first.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let r = t - t.round();
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// A user-supplied function with enough structure for the sums in this crate.
pub trait CustomFunction: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn eval(&self, x: f64) -> Complex64;
    /// Closed interval outside which the function vanishes, when it has one.
    fn support(&self) -> Option<(f64, f64)>;
    /// Interval outside which `|f| < tol`, when a bound is known.
    fn essential_support(&self, _tol: f64) -> Option<(f64, f64)> {
        self.support()
    }
    /// Closed-form Fourier transform, if available.
    fn fourier(&self, _xi: f64) -> Option<Complex64> {
        None
    }
    fn smooth(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
pub enum TestFunction {
    Zero,
    /// `amplitude * exp(-π ((x - center) / width)^2)`
    Gaussian {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// `amplitude * exp(1 - 1 / (1 - t^2))` for `t = (x - center) / radius` in (-1, 1).
    Bump {
        center: f64,
        radius: f64,
        amplitude: f64,
    },
    /// `exp(-π a x^2 + 2π b x + c)` with `Re a > 0`.
    ComplexGaussian {
        a: Complex64,
        b: Complex64,
        c: Complex64,
    },
    /// Indicator of `[lo, hi)`.
    Indicator {
        lo: f64,
        hi: f64,
    },
    /// Piecewise-linear interpolation of samples at `x0 + i dx`, zero outside.
    Sampled {
        x0: f64,
        dx: f64,
        values: Arc<Vec<f64>>,
    },
    /// `U^phi` applied to `base`, evaluated on demand by quadrature
    /// (`phi == π` exactly is the reflection `base(-w)`).
    Metaplectic {
        base: Arc<TestFunction>,
        phi: f64,
        window: (f64, f64),
    },
    Custom(Arc<dyn CustomFunction>),
}

fn bump_profile(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

impl TestFunction {
    pub fn gaussian(center: f64, width: f64) -> Self {
        Self::Gaussian { center, width, amplitude: 1.0 }
    }

    pub fn bump(center: f64, radius: f64) -> Self {
        Self::Bump { center, radius, amplitude: 1.0 }
    }

    /// Bump supported on `[lo, hi]`.
    pub fn bump_on(lo: f64, hi: f64) -> Self {
        Self::bump(0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::Indicator { lo, hi }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Gaussian { .. } => "gaussian",
            Self::Bump { .. } => "bump",
            Self::ComplexGaussian { .. } => "complex-gaussian",
            Self::Indicator { .. } => "indicator",
            Self::Sampled { .. } => "sampled",
            Self::Metaplectic { .. } => "metaplectic",
            Self::Custom(c) => c.name(),
        }
    }

    /// Multiply by a real constant.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            Self::Zero => Self::Zero,
            Self::Gaussian { center, width, amplitude } => {
                Self::Gaussian { center: *center, width: *width, amplitude: amplitude * k }
            }
            Self::Bump { center, radius, amplitude } => {
                Self::Bump { center: *center, radius: *radius, amplitude: amplitude * k }
            }
            Self::ComplexGaussian { a, b, c } => {
                Self::ComplexGaussian { a: *a, b: *b, c: c + Complex64::new(k, 0.0).ln() }
            }
            Self::Sampled { x0, dx, values } => {
                Self::Sampled { x0: *x0, dx: *dx, values: Arc::new(values.iter().map(|v| v * k).collect()) }
            }
            _ => {
                let lo_hi = self.support();
                let f = self.clone();
                Self::Custom(Arc::new(ScaledFn { inner: f, k, support: lo_hi }))
            }
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Self::Zero => Complex64::new(0.0, 0.0),
            Self::Gaussian { center, width, amplitude } => {
                let t = (x - center) / width;
                Complex64::new(amplitude * (-PI * t * t).exp(), 0.0)
            }
            Self::Bump { center, radius, amplitude } => {
                Complex64::new(amplitude * bump_profile((x - center) / radius), 0.0)
            }
            Self::ComplexGaussian { a, b, c } => (-PI * a * x * x + 2.0 * PI * b * x + c).exp(),
            Self::Indicator { lo, hi } => Complex64::new(if *lo <= x && x < *hi { 1.0 } else { 0.0 }, 0.0),
            Self::Sampled { x0, dx, values } => {
                let t = (x - x0) / dx;
                if t < 0.0 || t > (values.len() - 1) as f64 {
                    return Complex64::new(0.0, 0.0);
                }
                let i = (t.floor() as usize).min(values.len().saturating_sub(2));
                let r = t - i as f64;
                let hi = values.get(i + 1).copied().unwrap_or(values[i]);
                Complex64::new(values[i] * (1.0 - r) + hi * r, 0.0)
            }
            Self::Metaplectic { base, phi, window } => metaplectic_eval(base, *phi, *window, x),
            Self::Custom(c) => c.eval(x),
        }
    }

    pub fn eval_re(&self, x: f64) -> f64 {
        self.eval(x).re
    }

    /// Closed interval outside which the function vanishes identically.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Self::Zero => Some((0.0, 0.0)),
            Self::Bump { center, radius, .. } => Some((center - radius, center + radius)),
            Self::Indicator { lo, hi } => Some((*lo, *hi)),
            Self::Sampled { x0, dx, values } => Some((*x0, x0 + dx * (values.len().max(1) - 1) as f64)),
            Self::Metaplectic { base, phi, .. } if *phi == PI => base.support().map(|(lo, hi)| (-hi, -lo)),
            Self::Custom(c) => c.support(),
            _ => None,
        }
    }

    pub fn smooth(&self) -> bool {
        match self {
            Self::Indicator { .. } | Self::Sampled { .. } => false,
            Self::Metaplectic { base, .. } => base.smooth(),
            Self::Custom(c) => c.smooth(),
            _ => true,
        }
    }

    /// Interval outside which `|f| < tol`.
    ///
    /// Closed form for compact and Gaussian kinds. For transformed functions the
    /// radius is found by scanning outward until the samples stay below `tol`.
    pub fn essential_support(&self, tol: f64) -> Result<(f64, f64)> {
        if let Some(s) = self.support() {
            return Ok(s);
        }
        match self {
            Self::Gaussian { center, width, amplitude } => {
                let ratio = amplitude.abs() / tol;
                let t = if ratio > 1.0 { (ratio.ln() / PI).sqrt() } else { 0.0 };
                Ok((center - width.abs() * t, center + width.abs() * t))
            }
            Self::ComplexGaussian { a, b, c } => {
                let (ar, br) = (a.re, b.re);
                let x0 = br / ar;
                let peak = c.re + PI * br * br / ar;
                let excess = peak - tol.ln();
                let r = if excess > 0.0 { (excess / (PI * ar)).sqrt() } else { 0.0 };
                Ok((x0 - r, x0 + r))
            }
            Self::Metaplectic { base, .. } => {
                if !base.smooth() {
                    return Err(Error::TailBoundUnavailable(base.kind()));
                }
                let (lo, hi) = base.essential_support(tol.min(1e-15))?;
                scan_radius(self, lo.abs().max(hi.abs()).max(1.0), tol)
            }
            Self::Custom(c) => c.essential_support(tol).ok_or(Error::TailBoundUnavailable(c.name())),
            _ => Err(Error::TailBoundUnavailable(self.kind())),
        }
    }

    /// Fourier transform `∫ f(x) e(-x xi) dx`.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        match self {
            Self::Zero => Complex64::new(0.0, 0.0),
            Self::Gaussian { center, width, amplitude } => {
                let w = width.abs();
                e(-center * xi) * (amplitude * w * (-PI * w * w * xi * xi).exp())
            }
            Self::ComplexGaussian { a, b, c } => {
                let bb = b - Complex64::new(0.0, xi);
                (PI * bb * bb / a + c).exp() / a.sqrt()
            }
            Self::Indicator { lo, hi } => {
                if xi == 0.0 {
                    Complex64::new(hi - lo, 0.0)
                } else {
                    (e(-hi * xi) - e(-lo * xi)) / Complex64::new(0.0, -TAU * xi)
                }
            }
            Self::Custom(c) if c.fourier(xi).is_some() => c.fourier(xi).unwrap(),
            _ => {
                let (lo, hi) = match self.essential_support(1e-16) {
                    Ok(s) => s,
                    Err(_) => return Complex64::new(f64::NAN, f64::NAN),
                };
                oscillatory_integral(self, lo, hi, -xi)
            }
        }
    }

    /// Inverse Fourier transform `∫ f(x) e(x t) dx`.
    pub fn inverse_fourier(&self, t: f64) -> Complex64 {
        self.fourier(-t)
    }

    /// `∫ f`.
    pub fn integral(&self) -> Complex64 {
        self.fourier(0.0)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Gaussian { width, amplitude, .. } => amplitude * amplitude * width.abs() / std::f64::consts::SQRT_2,
            Self::ComplexGaussian { a, b, c } => {
                (2.0 * a.re).powf(-0.5) * (2.0 * PI * b.re * b.re / a.re + 2.0 * c.re).exp()
            }
            Self::Indicator { lo, hi } => (hi - lo).max(0.0),
            _ => match self.essential_support(1e-12) {
                Ok((lo, hi)) => quadrature::integrate_adaptive(|x| self.eval(x).norm_sqr(), lo, hi, 1e-14),
                Err(_) => f64::NAN,
            },
        }
    }

    /// `∫ f conj(g)`.
    pub fn inner(&self, g: &TestFunction) -> Result<Complex64> {
        let (a, b) = self.essential_support(1e-13)?;
        let (c, d) = g.essential_support(1e-13)?;
        let (lo, hi) = (a.max(c), b.min(d));
        if lo >= hi {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(quadrature::integrate_adaptive_c(|x| self.eval(x) * g.eval(x).conj(), lo, hi, 1e-14))
    }

    /// `f(-x)`.
    pub fn reflect(&self) -> Self {
        match self {
            Self::Zero => Self::Zero,
            Self::Gaussian { center, width, amplitude } => {
                Self::Gaussian { center: -center, width: *width, amplitude: *amplitude }
            }
            Self::Bump { center, radius, amplitude } => {
                Self::Bump { center: -center, radius: *radius, amplitude: *amplitude }
            }
            Self::ComplexGaussian { a, b, c } => Self::ComplexGaussian { a: *a, b: -b, c: *c },
            Self::Indicator { lo, hi } => Self::Indicator { lo: -hi, hi: -lo },
            Self::Metaplectic { base, phi, .. } if *phi == PI => (**base).clone(),
            _ => Self::Metaplectic { base: Arc::new(self.clone()), phi: PI, window: (0.0, 0.0) },
        }
    }

    /// `f_phi = U^phi f`.
    ///
    /// Gaussians map to complex Gaussians in closed form. Other kinds are
    /// evaluated on demand by quadrature, which is refused within
    /// [`SINGULAR_BAND`] of a multiple of pi.
    pub fn u_phi(&self, phi: f64) -> Result<Self> {
        let p = phi.rem_euclid(TAU);
        if p == 0.0 {
            return Ok(self.clone());
        }
        if p == PI {
            return Ok(self.reflect());
        }
        match self {
            Self::Zero => Ok(Self::Zero),
            Self::Gaussian { .. } | Self::ComplexGaussian { .. } => {
                let (a, b, c) = self.gaussian_coeffs().unwrap();
                Ok(complex_gaussian_u_phi(a, b, c, p))
            }
            _ => {
                let band = (p - PI * (p / PI).round()).abs();
                if band < SINGULAR_BAND {
                    return Err(Error::NearSingularAngle(phi));
                }
                let window = self.essential_support(1e-16)?;
                Ok(Self::Metaplectic { base: Arc::new(self.clone()), phi: p, window })
            }
        }
    }

    /// `(a, b, c)` with `f(x) = exp(-π a x^2 + 2π b x + c)` for the Gaussian kinds.
    pub fn gaussian_coeffs(&self) -> Option<(Complex64, Complex64, Complex64)> {
        match self {
            Self::Gaussian { center, width, amplitude } => {
                let a = 1.0 / (width * width);
                Some((
                    Complex64::new(a, 0.0),
                    Complex64::new(center * a, 0.0),
                    Complex64::new(-PI * center * center * a, 0.0) + Complex64::new(*amplitude, 0.0).ln(),
                ))
            }
            Self::ComplexGaussian { a, b, c } => Some((*a, *b, *c)),
            _ => None,
        }
    }

    /// Samples on a uniform grid, as a [`TestFunction::Sampled`] of the real part.
    pub fn sample(&self, lo: f64, hi: f64, points: usize) -> Self {
        let n = points.max(2);
        let dx = (hi - lo) / (n - 1) as f64;
        let values = (0..n).map(|i| self.eval_re(lo + i as f64 * dx)).collect();
        Self::Sampled { x0: lo, dx, values: Arc::new(values) }
    }

    /// `sup |(1 + |x|)^A f(x)|^2`, by sampling.
    pub fn weighted_sup_sq(&self, a_exp: f64) -> Result<f64> {
        let (lo, hi) = self.essential_support(1e-14)?;
        let r = lo.abs().max(hi.abs()) + 1.0;
        let n = 20_000;
        let mut best: f64 = 0.0;
        for i in 0..=n {
            let x = -r + 2.0 * r * i as f64 / n as f64;
            best = best.max((1.0 + x.abs()).powf(a_exp) * self.eval(x).norm());
        }
        // Grid sampling can miss the peak by a first-order term; pad it.
        Ok((best * 1.05).powi(2))
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Gaussian { center, width, amplitude } => {
                write!(f, "gaussian(center={center}, width={width}, amplitude={amplitude})")
            }
            Self::Bump { center, radius, amplitude } => {
                write!(f, "bump(center={center}, radius={radius}, amplitude={amplitude})")
            }
            Self::ComplexGaussian { a, b, c } => write!(f, "complex-gaussian(a={a}, b={b}, c={c})"),
            Self::Indicator { lo, hi } => write!(f, "indicator[{lo}, {hi})"),
            Self::Sampled { x0, dx, values } => {
                write!(f, "sampled(x0={x0}, dx={dx}, n={})", values.len())
            }
            Self::Metaplectic { base, phi, .. } => write!(f, "U^{phi}[{base}]"),
            Self::Custom(c) => write!(f, "{}", c.name()),
        }
    }
}

#[derive(Debug)]
struct ScaledFn {
    inner: TestFunction,
    k: f64,
    support: Option<(f64, f64)>,
}

impl CustomFunction for ScaledFn {
    fn name(&self) -> &'static str {
        "scaled"
    }
    fn eval(&self, x: f64) -> Complex64 {
        self.inner.eval(x) * self.k
    }
    fn support(&self) -> Option<(f64, f64)> {
        self.support
    }
    fn essential_support(&self, tol: f64) -> Option<(f64, f64)> {
        self.inner.essential_support(tol / self.k.abs().max(1e-300)).ok()
    }
    fn fourier(&self, xi: f64) -> Option<Complex64> {
        Some(self.inner.fourier(xi) * self.k)
    }
    fn smooth(&self) -> bool {
        self.inner.smooth()
    }
}

/// `∫_lo^hi f(x) e(x t) dx` with panels proportional to the oscillation count.
fn oscillatory_integral(f: &TestFunction, lo: f64, hi: f64, t: f64) -> Complex64 {
    let len = hi - lo;
    if len <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let panels = 16 + (len * t.abs() / 4.0).ceil() as usize;
    let panels = panels.min(1 << 16);
    if f.smooth() {
        quadrature::integrate_c(|x| f.eval(x) * e(x * t), lo, hi, panels * 2, 32)
    } else {
        quadrature::integrate_adaptive_c(|x| f.eval(x) * e(x * t), lo, hi, 1e-13)
    }
}

/// Closed form of U^phi on `exp(-π a x^2 + 2π b x + c)`.
///
/// Written in terms of `s a - i cos phi` so that it stays accurate as
/// `sin phi -> 0`.
fn complex_gaussian_u_phi(a: Complex64, b: Complex64, c: Complex64, phi: f64) -> TestFunction {
    let (s, co) = phi.sin_cos();
    let i = Complex64::new(0.0, 1.0);
    let d = s * a - i * co; // s * A' with A' = a - i cot phi
    let a_new = (s - i * a * co) / (s * a - i * co);
    let b_new = -i * b / d;
    let sign = if s < 0.0 { -1.0 } else { 1.0 };
    let c_new = c + PI * b * b * s / d - 0.5 * (d * sign).ln();
    TestFunction::ComplexGaussian { a: a_new, b: b_new, c: c_new }
}

fn metaplectic_eval(base: &TestFunction, phi: f64, window: (f64, f64), w: f64) -> Complex64 {
    if phi == PI {
        return base.eval(-w);
    }
    let (s, co) = phi.sin_cos();
    let (lo, hi) = window;
    let len = hi - lo;
    if len <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // Local frequency of the kernel in w' is (w' cos phi - w) / sin phi.
    let rate = ((lo * co - w).abs().max((hi * co - w).abs())) / s.abs();
    let panels = (24 + (rate * len / 3.0).ceil() as usize).min(1 << 16);
    let integrand = |x: f64| e((0.5 * x * x * co - w * x) / s) * base.eval(x);
    let integral = if base.smooth() {
        quadrature::integrate_c(integrand, lo, hi, panels, 32)
    } else {
        quadrature::integrate_adaptive_c(integrand, lo, hi, 1e-12)
    };
    e(0.5 * w * w * co / s) * integral / s.abs().sqrt()
}

fn scan_radius(f: &TestFunction, start: f64, tol: f64) -> Result<(f64, f64)> {
    let mut r = start;
    while r < 1e4 {
        let samples = 256;
        let quiet = (0..=samples).all(|k| {
            let x = r + r * k as f64 / samples as f64;
            f.eval(x).norm() < tol && f.eval(-x).norm() < tol
        });
        if quiet {
            return Ok((-r, r));
        }
        r *= 2.0;
    }
    Err(Error::TailBoundUnavailable(f.kind()))
}
