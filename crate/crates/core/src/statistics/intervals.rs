//! Finite unions of real intervals with per-endpoint closedness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closed_lo: bool,
    pub closed_hi: bool,
}

impl Interval {
    /// `[lo, hi)`, the default convention.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, closed_lo: true, closed_hi: false }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, closed_lo: true, closed_hi: true }
    }

    /// `(lo, hi]`
    pub fn open_closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, closed_lo: false, closed_hi: true }
    }

    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo || (self.hi == self.lo && !(self.closed_lo && self.closed_hi))
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.closed_lo { x >= self.lo } else { x > self.lo };
        let below = if self.closed_hi { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn negate(&self) -> Self {
        Self { lo: -self.hi, hi: -self.lo, closed_lo: self.closed_hi, closed_hi: self.closed_lo }
    }

    pub fn scale(&self, k: f64) -> Self {
        assert!(k > 0.0);
        Self { lo: self.lo * k, hi: self.hi * k, ..*self }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.closed_lo { '[' } else { '(' };
        let r = if self.closed_hi { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    /// Sorts and merges overlapping or touching pieces.
    pub fn new(pieces: Vec<Interval>) -> Self {
        let mut v: Vec<Interval> = pieces.into_iter().filter(|i| !i.is_empty()).collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.closed_lo.cmp(&a.closed_lo)));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            if let Some(last) = out.last_mut() {
                let touches = iv.lo < last.hi || (iv.lo == last.hi && (iv.closed_lo || last.closed_hi));
                if touches {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                        last.closed_hi = iv.closed_hi;
                    } else if iv.hi == last.hi {
                        last.closed_hi |= iv.closed_hi;
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        Self { intervals: out }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(iv: Interval) -> Self {
        Self::new(vec![iv])
    }

    /// `[lo, hi)`
    pub fn half_open(lo: f64, hi: f64) -> Self {
        Self::single(Interval::new(lo, hi))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    pub fn negate(&self) -> Self {
        Self::new(self.intervals.iter().map(Interval::negate).collect())
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.lo, self.intervals.last()?.hi))
    }

    /// Integers `i` with `(i - shift) / n` in the set, in increasing order.
    pub fn indices(&self, n: u64, shift: f64) -> Vec<i64> {
        let nf = n as f64;
        let mut out = Vec::new();
        for iv in &self.intervals {
            let lo = (iv.lo * nf + shift).floor() as i64 - 2;
            let hi = (iv.hi * nf + shift).ceil() as i64 + 2;
            out.extend((lo..=hi).filter(|&i| iv.contains((i as f64 - shift) / nf)));
        }
        out.dedup();
        out
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// `lo:hi` means `[lo, hi)`; bracket forms such as `(0,1]` set closedness.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("cannot parse interval `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let iv = if let Some((a, b)) = s.split_once(':') {
            Interval::new(num(a)?, num(b)?)
        } else {
            let open = s.chars().next().ok_or_else(bad)?;
            let close = s.chars().last().ok_or_else(bad)?;
            if !matches!(open, '[' | '(') || !matches!(close, ']' | ')') || s.len() < 2 {
                return Err(bad());
            }
            let (a, b) = s[1..s.len() - 1].split_once(',').ok_or_else(bad)?;
            Interval { lo: num(a)?, hi: num(b)?, closed_lo: open == '[', closed_hi: close == ']' }
        };
        if !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.lo > iv.hi {
            return Err(Error::InvalidInput(format!("interval `{s}` must be bounded with lo <= hi")));
        }
        Ok(iv)
    }
}

impl FromStr for IntervalSet {
    type Err = Error;

    /// Pieces separated by `;` or ` u `.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "{}" {
            return Ok(Self::empty());
        }
        let pieces = s.split(';').flat_map(|p| p.split(" u ")).map(str::parse).collect::<Result<Vec<Interval>>>()?;
        Ok(Self::new(pieces))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_length() {
        let s = IntervalSet::new(vec![Interval::new(0.0, 1.0), Interval::new(0.5, 2.0), Interval::new(3.0, 4.0)]);
        assert_eq!(s.intervals().len(), 2);
        assert_eq!(s.total_length(), 3.0);
        let t = IntervalSet::new(vec![Interval::new(0.0, 1.0), Interval::new(1.0, 2.0)]);
        assert_eq!(t.intervals().len(), 1);
        let u = IntervalSet::new(vec![Interval::new(1.0, 2.0), Interval::new(0.0, 1.0)]);
        assert_eq!(u, t);
    }

    #[test]
    fn parsing() {
        let s: IntervalSet = "(0,1]".parse().unwrap();
        assert!(!s.contains(0.0) && s.contains(1.0));
        let s: IntervalSet = "0:4".parse().unwrap();
        assert!(s.contains(0.0) && !s.contains(4.0));
        let s: IntervalSet = "0:1;2:3".parse().unwrap();
        assert_eq!(s.total_length(), 2.0);
        assert!("1:0".parse::<IntervalSet>().is_err());
        assert!("[0,1".parse::<IntervalSet>().is_err());
    }

    #[test]
    fn index_sets() {
        let b: IntervalSet = "(0,1]".parse().unwrap();
        assert_eq!(b.indices(5, 0.0), vec![1, 2, 3, 4, 5]);
        let b: IntervalSet = "(0,0.5]".parse().unwrap();
        assert_eq!(b.indices(5, 0.0), vec![1, 2]);
        assert_eq!(b.indices(4, 0.5), vec![1, 2]);
    }
}
