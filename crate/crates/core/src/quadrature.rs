//! Composite Gauss–Legendre quadrature on top of cached node tables.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

const ORDERS: [usize; 4] = [8, 16, 32, 64];
static RULES: [OnceLock<Vec<(f64, f64)>>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

/// Nodes and weights on [-1, 1]; `order` is rounded up to one of 8, 16, 32, 64.
pub fn rule(order: usize) -> &'static [(f64, f64)] {
    let idx = ORDERS.iter().position(|&o| o >= order).unwrap_or(ORDERS.len() - 1);
    RULES[idx].get_or_init(|| {
        GaussLegendre::new(ORDERS[idx]).expect("Gauss-Legendre order >= 2").as_node_weight_pairs().to_vec()
    })
}

/// Integrate over [a, b] split into `panels` equal pieces.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let nodes = rule(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for &(x, w) in nodes {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

pub fn integrate_c<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> Complex64 {
    let nodes = rule(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = Complex64::new(0.0, 0.0);
        for &(x, w) in nodes {
            s += f(mid + 0.5 * h * x) * w;
        }
        total += s * (0.5 * h);
    }
    total
}

/// Double the panel count until two successive estimates agree to `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_adaptive_c(|x| Complex64::new(f(x), 0.0), a, b, tol).re
}

pub fn integrate_adaptive_c<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let mut panels = 4;
    let mut prev = integrate_c(&f, a, b, panels, 32);
    while panels < 1 << 14 {
        panels *= 2;
        let next = integrate_c(&f, a, b, panels, 32);
        if (next - prev).norm() <= tol * (1.0 + next.norm()) {
            return next;
        }
        prev = next;
    }
    prev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_gaussian() {
        let v = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1, 8);
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
        let g = integrate_adaptive(|x| (-std::f64::consts::PI * x * x).exp(), -8.0, 8.0, 1e-14);
        assert!((g - 1.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        let v = integrate_adaptive_c(|x| Complex64::new(0.0, 40.0 * x).exp(), 0.0, 1.0, 1e-13);
        let exact = (Complex64::new(0.0, 40.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!((v - exact).norm() < 1e-12);
    }
}
