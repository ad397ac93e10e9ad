//! Averages of a statistic over a short window of `N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::testfn::TestFunction;

#[derive(Clone, Debug)]
pub enum WindowWeight {
    /// Uniform weight on `M <= N <= M + M^eta`.
    Sharp,
    /// `psi((N - M) / M^eta)`; `psi` must be compactly supported.
    Smooth(TestFunction),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowAverage {
    pub value: f64,
    /// Number of `N` evaluated.
    pub terms: usize,
    pub first_n: u64,
    pub last_n: u64,
    pub warning: Option<String>,
}

/// The `N` carrying nonzero weight.
pub fn window_range(m: u64, eta: f64, weight: &WindowWeight) -> Result<(u64, u64)> {
    let width = (m as f64).powf(eta);
    match weight {
        WindowWeight::Sharp => Ok((m, (m as f64 + width).floor() as u64)),
        WindowWeight::Smooth(psi) => {
            let (lo, hi) =
                psi.support().ok_or(Error::TailBoundUnavailable("window weight must be compactly supported"))?;
            let first = (m as f64 + lo * width).ceil().max(1.0) as u64;
            let last = (m as f64 + hi * width).floor().max(0.0) as u64;
            Ok((first, last))
        }
    }
}

/// `(1/M^eta) sum_N w_N statistic(N)`; evaluated in parallel over `N`.
pub fn window_average<F>(statistic: F, m: u64, eta: f64, weight: &WindowWeight) -> Result<WindowAverage>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    if m < 2 {
        return Err(Error::InvalidInput("window average needs M >= 2".into()));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
    }
    let warning =
        if eta <= 17.0 / 18.0 || eta > 1.0 { Some(format!("eta = {eta} lies outside (17/18, 1]")) } else { None };
    let width = (m as f64).powf(eta);
    let (first, last) = window_range(m, eta, weight)?;
    if last < first {
        return Ok(WindowAverage { value: 0.0, terms: 0, first_n: first, last_n: last, warning });
    }
    let count = (last - first + 1) as usize;
    let terms = parallel::map(0..count, |i| {
        let n = first + i as u64;
        let w = match weight {
            WindowWeight::Sharp => 1.0,
            WindowWeight::Smooth(psi) => psi.eval_re((n as f64 - m as f64) / width),
        };
        if w == 0.0 {
            Ok(0.0)
        } else {
            statistic(n).map(|s| w * s)
        }
    });
    let mut total = 0.0;
    for t in terms {
        total += t?;
    }
    Ok(WindowAverage { value: total / width, terms: count, first_n: first, last_n: last, warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_statistic_counts_terms() {
        for (m, eta) in [(2000u64, 0.95), (37, 1.0), (500, 0.96)] {
            let r = window_average(|_| Ok(2.5), m, eta, &WindowWeight::Sharp).unwrap();
            let width = (m as f64).powf(eta);
            let count = ((m as f64 + width).floor() - m as f64 + 1.0) / width;
            assert!((r.value - 2.5 * count).abs() < 1e-12);
        }
    }

    #[test]
    fn warns_outside_range() {
        let r = window_average(|_| Ok(1.0), 100, 0.5, &WindowWeight::Sharp).unwrap();
        assert!(r.warning.is_some());
        let r = window_average(|_| Ok(1.0), 100, 0.95, &WindowWeight::Sharp).unwrap();
        assert!(r.warning.is_none());
    }

    #[test]
    fn smooth_weight_approximates_integral() {
        let psi = TestFunction::bump_on(0.0, 1.0);
        let m = 5000;
        let r = window_average(|_| Ok(1.0), m, 1.0, &WindowWeight::Smooth(psi.clone())).unwrap();
        assert!((r.value - psi.integral().re).abs() < 1e-3);
    }
}
