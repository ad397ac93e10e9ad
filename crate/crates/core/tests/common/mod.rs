#![allow(dead_code)]

use modone::geometry::{horocycle_point, GroupElement};
use modone::ExtReal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn alpha(token: &str) -> ExtReal {
    ExtReal::parse(token, 64).unwrap()
}

/// A random `α` in `(lo, hi)`, exact as a binary fraction.
pub fn random_alpha(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> ExtReal {
    ExtReal::from_f64_exact(rng.gen_range(lo..hi))
}

/// A section passage found by scanning `x`.
#[derive(Clone, Copy, Debug)]
pub struct ScannedHit {
    pub c: i64,
    pub d: i64,
    pub x_lo: f64,
    pub x_hi: f64,
}

fn bezout(c: i64, d: i64) -> (i64, i64) {
    // a d - b c = 1 by the extended Euclidean algorithm on (d, c).
    let (mut r0, mut r1) = (d, c);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0.abs(), 1);
    (s0 * r0, -t0 * r0)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Whether `p` lies in the thickened section. `v` is compared with a relative slack
/// of `1e-12` because `1/δ` is formed from rounded matrix entries.
fn in_section(p: &GroupElement, eps: f64, v0: f64, v1: f64) -> bool {
    let [[_, _], [g, d]] = p.g;
    if d <= 0.0 {
        return false;
    }
    let (v, w) = (1.0 / d, g / d);
    v >= v0 * (1.0 - 1e-12) && v <= v1 * (1.0 + 1e-12) && w.abs() <= eps
}

fn inside(gamma: &GroupElement, m: f64, eta: [f64; 2], x: f64, eps: f64, v0: f64, v1: f64) -> bool {
    in_section(&gamma.mul(&horocycle_point(m, eta, x)), eps, v0, v1)
}

#[allow(clippy::too_many_arguments)]
fn refine(gamma: &GroupElement, m: f64, eta: [f64; 2], eps: f64, v0: f64, v1: f64, mut out: f64, mut inn: f64) -> f64 {
    while (out - inn).abs() > 1e-5 * eps {
        let mid = 0.5 * (out + inn);
        if inside(gamma, m, eta, mid, eps, v0, v1) {
            inn = mid;
        } else {
            out = mid;
        }
    }
    inn
}

/// Every passage of the horocycle through the thickened section over `x_range`, found by
/// testing each coprime `(c, d)` with `|c| <= c_max` and `d` in `d_range` on a grid of step
/// `eps / 8` (which includes both range ends) and refining the edges by bisection.
#[allow(clippy::too_many_arguments)]
pub fn grid_scan_hits(
    m: f64,
    eta: [f64; 2],
    v0: f64,
    v1: f64,
    eps: f64,
    x_range: (f64, f64),
    c_max: i64,
    d_range: (i64, i64),
) -> Vec<ScannedHit> {
    let step = eps / 8.0;
    let count = ((x_range.1 - x_range.0) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=count).map(|i| (x_range.0 + i as f64 * step).min(x_range.1)).collect();
    let horo: Vec<GroupElement> = grid.iter().map(|&x| horocycle_point(m, eta, x)).collect();
    let mut hits = Vec::new();
    for c in -c_max..=c_max {
        for d in d_range.0..=d_range.1 {
            if gcd(c, d) != 1 {
                continue;
            }
            let (a, b) = bezout(c, d);
            let gamma = GroupElement::new([[a as f64, b as f64], [c as f64, d as f64]], [0.0, 0.0]).unwrap();
            let mut start: Option<usize> = None;
            for k in 0..=grid.len() {
                let now = k < grid.len() && in_section(&gamma.mul(&horo[k]), eps, v0, v1);
                match (start, now) {
                    (None, true) => start = Some(k),
                    (Some(s), false) => {
                        let lo =
                            if s == 0 { grid[0] } else { refine(&gamma, m, eta, eps, v0, v1, grid[s - 1], grid[s]) };
                        let hi = if k == grid.len() {
                            grid[k - 1]
                        } else {
                            refine(&gamma, m, eta, eps, v0, v1, grid[k], grid[k - 1])
                        };
                        hits.push(ScannedHit { c, d, x_lo: lo, x_hi: hi });
                        start = None;
                    }
                    _ => {}
                }
            }
        }
    }
    hits.sort_by(|p, q| p.x_lo.total_cmp(&q.x_lo).then(p.c.cmp(&q.c)));
    hits
}
