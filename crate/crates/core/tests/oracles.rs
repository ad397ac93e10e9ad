mod common;

use common::{alpha, rng};
use modone::discrepancy::{discrepancy_exact, discrepancy_report, erdos_turan_bound, weyl_sum, ERDOS_TURAN_C};
use modone::geometry::{horocycle_section_hits, section_element, section_jacobian};
use modone::oppenheim::{lattice_count_side, lattice_count_with, volume_side, Exclusions, FormSpec};
use modone::statistics::{Interval, IntervalSet};
use modone::theta::{cusp_lift, iwasawa, theta_sum};
use modone::{e, ExtReal, TestFunction};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;

#[test]
fn weyl_sum_matches_exact_rational_phases() {
    let a = ExtReal::parse("sqrt:2", 60).unwrap();
    let (n, k) = (16u64, 1i64);
    let bits = a.bits();
    let den = BigInt::from(2 * n) << (2 * bits);
    let mut s = Complex64::new(0.0, 0.0);
    for i in 1..=n as i64 {
        let m = (BigInt::from(i) << bits) - a.scaled();
        let r = (BigInt::from(k) * &m * &m).mod_floor(&den);
        // 53 leading bits of r / den.
        let shift = den.bits() as i64 - 60;
        let t = (&r >> shift as usize).to_f64().unwrap() / (&den >> shift as usize).to_f64().unwrap();
        s += e(t);
    }
    let w = weyl_sum(k, n, &a).unwrap();
    assert!((w - s).norm() < 1e-10, "{w} vs {s}");
}

/// `sup |#{x in [a, b]}/N - (b - a)|` over endpoints at the points, one ulp either side, 0 and 1.
fn brute_discrepancy(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mut ends: Vec<f64> = vec![0.0, 1.0];
    for &p in x {
        ends.extend([p, p.next_up(), p.next_down()]);
    }
    let mut best: f64 = 0.0;
    for &a in &ends {
        for &b in &ends {
            if a >= b {
                continue;
            }
            let c = x.iter().filter(|&&p| a <= p && p <= b).count() as f64;
            best = best.max((c / n - (b - a)).abs());
        }
    }
    best
}

#[test]
fn discrepancy_matches_quadratic_oracle() {
    let mut r = rng(21);
    for _ in 0..20 {
        let x: Vec<f64> = (0..10).map(|_| r.gen_range(0.0..1.0)).collect();
        let d = discrepancy_exact(&x).unwrap();
        let b = brute_discrepancy(&x);
        assert!((d - b).abs() < 1e-12, "{d} vs {b}");
    }
}

#[test]
fn quadratic_sequence_discrepancy() {
    let a = alpha("sqrt:2");
    let r = discrepancy_report(10_000, &a, Some(64), ERDOS_TURAN_C).unwrap();
    assert!(r.d_exact < 0.02, "{}", r.d_exact);
    assert_eq!(r.near_coincidences, 0);
    let full = discrepancy_report(1000, &a, None, ERDOS_TURAN_C).unwrap();
    assert!(full.d_exact <= full.et_bound && full.m_used == 1000);
}

#[test]
fn bound_with_one_frequency() {
    // m = 1 gives C (1 + |S_1| / N), between C and 2C.
    let a = alpha("golden");
    let b = erdos_turan_bound(4096, &a, 1, ERDOS_TURAN_C).unwrap();
    assert!((ERDOS_TURAN_C..=ERDOS_TURAN_C * 2.0).contains(&b));
}

#[test]
fn section_jacobian_by_finite_differences() {
    let h = 1e-6;
    for (u, v, w) in [(0.3, 0.7, 0.01), (-0.4, 1.9, -0.02), (0.9, 0.3, 0.0)] {
        let coords = |u: f64, v: f64, w: f64| {
            let c = iwasawa(section_element(u, v, w).g).unwrap();
            [c.x, c.y, c.phi]
        };
        let mut j = [[0.0; 3]; 3];
        for (col, d) in [(h, 0.0, 0.0), (0.0, h, 0.0), (0.0, 0.0, h)].iter().enumerate() {
            let p = coords(u + d.0, v + d.1, w + d.2);
            let m = coords(u - d.0, v - d.1, w - d.2);
            for row in 0..3 {
                let mut diff = p[row] - m[row];
                if row == 2 {
                    // phi is returned modulo 2 pi.
                    diff -= std::f64::consts::TAU * (diff / std::f64::consts::TAU).round();
                }
                j[row][col] = diff / (2.0 * h);
            }
        }
        let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
            + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
        let expect = section_jacobian(v, w);
        assert!((det - expect).abs() < 1e-6 * expect.abs(), "{det} vs {expect}");
    }
}

#[test]
fn section_hits_are_disjoint() {
    for m in [7.3, 20.0, 55.0] {
        let hits = horocycle_section_hits(m, [0.5, 2f64.sqrt()], 0.25, 1.0, 1.0 / 33.0, (-5.0, 200.0)).unwrap();
        assert!(hits.len() > 10);
        for w in hits.windows(2) {
            assert!(w[0].x_interval.1 < w[1].x_interval.0, "M={m}: {:?} overlaps {:?}", w[0], w[1]);
        }
    }
}

#[test]
fn bump_lift_at_quarter_turn() {
    let h = TestFunction::bump_on(-0.5, 1.5);
    let alpha = 2f64.sqrt();
    for (k, q, s) in [(3, 8, 2), (5, 7, 3), (-2, 9, 1)] {
        let l = cusp_lift(k, q, s, alpha).unwrap();
        assert_eq!(l.to.phi, std::f64::consts::FRAC_PI_2);
        let lhs = theta_sum(&h, &l.from).unwrap().norm_sqr();
        let rhs = theta_sum(&h, &l.to).unwrap().norm_sqr();
        assert!((lhs - rhs).abs() < 1e-7 * lhs.max(1.0), "{k}/{q}: {lhs} vs {rhs}");
    }
}

fn form(a: &str) -> FormSpec {
    FormSpec::new(alpha(a), ExtReal::from_int(1)).unwrap()
}

#[test]
fn diagonal_exclusion_accounts_for_diagonal_solutions() {
    let s = form("0");
    let a = IntervalSet::single(Interval::closed(-1.0, 1.0));
    let b = IntervalSet::single(Interval::open_closed(0.0, 1.0));
    let m = 5;
    let with = lattice_count_with(m, &a, &b, &b, &s, Exclusions { diagonal: false, antidiagonal: true }).unwrap();
    let without = lattice_count_side(m, &a, &b, &b, &s).unwrap();
    for ((x3, c1), (_, c0)) in with.counts.iter().zip(&without.counts) {
        // x1 = x2 = i in 1..=x3 and x3 x4 in [-1, 1].
        let diag: u64 = (1..=*x3).map(|_| (-3i64..=3).filter(|x4| (*x3 as i64 * x4).abs() <= 1).count() as u64).sum();
        assert_eq!(c1 - c0, diag);
    }
}

#[test]
fn volume_side_against_monte_carlo() {
    let mut r = rng(31);
    let a = IntervalSet::single(Interval::closed(-1.0, 1.0));
    let b1 = IntervalSet::single(Interval::open_closed(0.0, 1.0));
    let b2 = IntervalSet::single(Interval::open_closed(0.0, 2.0));
    let m = 100.0;
    let (beta, al) = (1.0, 2f64.sqrt());
    let samples = 200_000;
    let mut acc = 0.0;
    for _ in 0..samples {
        let x3 = r.gen_range(m..2.0 * m);
        let x1 = r.gen_range(0.0..x3);
        let x2 = r.gen_range(0.0..2.0 * x3);
        let d = 0.5 * beta * ((x1 - al).powi(2) - (x2 - al).powi(2));
        // x4 uniform on a window of width 4/x3 around -d/x3.
        let x4 = -d / x3 + r.gen_range(-2.0..2.0) / x3;
        let q = d + x3 * x4;
        if a.contains(q) {
            let f = m / x3 / (m * m);
            let proposal = m * x3 * (2.0 * x3) * (4.0 / x3);
            acc += f * proposal;
        }
    }
    let mc = acc / samples as f64;
    let vol = volume_side(&a, &b1, &b2);
    assert_eq!(vol, 4.0);
    assert!((mc - vol).abs() < 0.02 * vol, "{mc} vs {vol}");
    assert_eq!(volume_side(&IntervalSet::empty(), &b1, &b2), 0.0);
}
