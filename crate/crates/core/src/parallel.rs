//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the loops run on rayon; without it (or after
//! [`set_sequential`]) they run on the calling thread. Floating-point sums are
//! formed from fixed-size chunk partials added in index order, so a
//! deterministic run gives the same bits on any thread count. Outside
//! deterministic mode the chunk partials are combined by rayon's tree
//! reduction, which may differ in the last few ulps.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

static DETERMINISTIC: AtomicBool = AtomicBool::new(true);
static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

const CHUNK: usize = 512;

pub fn set_deterministic(on: bool) {
    DETERMINISTIC.store(on, Ordering::Relaxed);
}

pub fn is_deterministic() -> bool {
    DETERMINISTIC.load(Ordering::Relaxed)
}

/// Force the sequential code path at run time (used by the benches).
pub fn set_sequential(on: bool) {
    SEQUENTIAL.store(on, Ordering::Relaxed);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !SEQUENTIAL.load(Ordering::Relaxed)
}

/// Cap the global worker pool. Only the first call has an effect.
pub fn set_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            return rayon::current_num_threads();
        }
    }
    1
}

fn chunks(range: Range<usize>) -> Vec<Range<usize>> {
    let mut out = Vec::with_capacity(range.len() / CHUNK + 1);
    let mut lo = range.start;
    while lo < range.end {
        let hi = (lo + CHUNK).min(range.end);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Apply `f` to every index and collect in order.
pub fn map<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            return range.into_par_iter().map(f).collect();
        }
    }
    range.map(f).collect()
}

/// Apply `f` to consecutive index blocks and collect the block results in order.
pub fn map_chunks<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let blocks = chunks(range);
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            return blocks.into_par_iter().map(f).collect();
        }
    }
    blocks.into_iter().map(f).collect()
}

pub fn sum_f64<F>(range: Range<usize>, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let partial = |r: Range<usize>| r.map(&f).sum::<f64>();
    reduce_blocks(range, partial, 0.0, |a, b| a + b)
}

pub fn sum_complex<F>(range: Range<usize>, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let partial = |r: Range<usize>| r.map(&f).sum::<Complex64>();
    reduce_blocks(range, partial, Complex64::new(0.0, 0.0), |a, b| a + b)
}

pub fn sum_u64<F>(range: Range<usize>, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    let partial = |r: Range<usize>| r.map(&f).sum::<u64>();
    reduce_blocks(range, partial, 0, |a, b| a + b)
}

/// Reduce per-block results. Deterministic mode adds them in block order.
pub fn reduce_blocks<T, P, C>(range: Range<usize>, partial: P, zero: T, combine: C) -> T
where
    T: Send + Clone + Sync,
    P: Fn(Range<usize>) -> T + Sync + Send,
    C: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() && !is_deterministic() {
            return chunks(range).into_par_iter().map(partial).reduce(|| zero.clone(), &combine);
        }
    }
    map_chunks(range, partial).into_iter().fold(zero, combine)
}

pub fn sort_f64(v: &mut [f64]) {
    #[cfg(feature = "parallel")]
    {
        if is_parallel() && v.len() > 1 << 15 {
            v.par_sort_unstable_by(|a, b| a.total_cmp(b));
            return;
        }
    }
    v.sort_unstable_by(|a, b| a.total_cmp(b));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_sum_matches_sequential_fold() {
        let f = |i: usize| 1.0 / (1.0 + i as f64).powf(1.3);
        let par = sum_f64(0..100_000, f);
        let seq: f64 = chunks(0..100_000).into_iter().map(|r| r.map(f).sum::<f64>()).sum();
        assert_eq!(par.to_bits(), seq.to_bits());
    }

    #[test]
    fn map_keeps_order() {
        let v = map(0..2000, |i| i * 3);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 3 * i));
    }

    #[test]
    fn empty_ranges() {
        assert_eq!(sum_f64(5..5, |_| 1.0), 0.0);
        assert_eq!(sum_u64(0..0, |_| 1), 0);
    }
}
