//! Finite unions of closed intervals on the extended real line.

use alloc::vec::Vec;
use core::fmt;

/// A closed interval `[lo, hi]`; endpoints may be ±∞ (then open at infinity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Sorted, disjoint closed intervals; touching intervals are merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet { parts: Vec::new() }
    }

    pub fn from_intervals<I: IntoIterator<Item = Interval>>(it: I) -> IntervalSet {
        let mut v: Vec<Interval> = it
            .into_iter()
            .filter(|i| !(i.lo.is_nan() || i.hi.is_nan()) && i.lo <= i.hi)
            .collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut parts: Vec<Interval> = Vec::with_capacity(v.len());
        for i in v {
            match parts.last_mut() {
                Some(last) if i.lo <= last.hi => last.hi = last.hi.max(i.hi),
                _ => parts.push(i),
            }
        }
        IntervalSet { parts }
    }

    pub fn single(lo: f64, hi: f64) -> IntervalSet {
        IntervalSet::from_intervals([Interval::new(lo, hi)])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.parts.iter().chain(&other.parts).copied())
    }

    /// Closed sets are their own closure; kept for symmetry with the theory
    /// (sets are always stored closed).
    pub fn closure(&self) -> IntervalSet {
        self.clone()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|i| i.contains(x))
    }

    pub fn intersect(&self, window: Interval) -> IntervalSet {
        IntervalSet::from_intervals(self.parts.iter().filter_map(|i| {
            let lo = i.lo.max(window.lo);
            let hi = i.hi.min(window.hi);
            (lo <= hi).then_some(Interval { lo, hi })
        }))
    }

    pub fn inf(&self) -> Option<f64> {
        self.parts.first().map(|i| i.lo)
    }

    pub fn sup(&self) -> Option<f64> {
        self.parts.last().map(|i| i.hi)
    }

    /// Distance from `x` to the set (∞ for the empty set).
    pub fn distance(&self, x: f64) -> f64 {
        self.parts
            .iter()
            .map(|i| {
                if x < i.lo {
                    i.lo - x
                } else if x > i.hi {
                    x - i.hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// sup over a ∈ self of dist(a, other).
    fn directed(&self, other: &IntervalSet) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if other.is_empty() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for a in &self.parts {
            if a.lo == f64::NEG_INFINITY && other.inf() != Some(f64::NEG_INFINITY) {
                return f64::INFINITY;
            }
            if a.hi == f64::INFINITY && other.sup() != Some(f64::INFINITY) {
                return f64::INFINITY;
            }
            for x in [a.lo, a.hi] {
                if x.is_finite() {
                    worst = worst.max(other.distance(x));
                }
            }
            // Deepest points of the gaps of `other` that fall inside `a`.
            for g in other.parts.windows(2) {
                let (glo, ghi) = (g[0].hi, g[1].lo);
                let mid = 0.5 * (glo + ghi);
                let x = mid.clamp(a.lo, a.hi);
                if x > glo && x < ghi {
                    worst = worst.max(other.distance(x));
                }
            }
        }
        worst
    }

    /// Hausdorff distance; +∞ when the unbounded patterns differ.
    pub fn hausdorff(&self, other: &IntervalSet) -> f64 {
        self.directed(other).max(other.directed(self))
    }

    /// Total length of the set intersected with `window`.
    pub fn measure_in(&self, window: Interval) -> f64 {
        self.intersect(window)
            .parts
            .iter()
            .map(Interval::width)
            .sum()
    }

    /// Complement relative to `window` as closed intervals (closure of the
    /// gaps), in order. Not merged: gaps around an isolated point touch there.
    pub fn gaps_in(&self, window: Interval) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut cursor = window.lo;
        for i in self.intersect(window).parts {
            if i.lo > cursor {
                out.push(Interval::new(cursor, i.lo));
            }
            cursor = cursor.max(i.hi);
        }
        if cursor < window.hi {
            out.push(Interval::new(cursor, window.hi));
        }
        out
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("∅");
        }
        for (k, i) in self.parts.iter().enumerate() {
            if k > 0 {
                f.write_str(" ∪ ")?;
            }
            let open_lo = i.lo == f64::NEG_INFINITY;
            let open_hi = i.hi == f64::INFINITY;
            write!(
                f,
                "{}{}, {}{}",
                if open_lo { "(" } else { "[" },
                i.lo,
                i.hi,
                if open_hi { ")" } else { "]" }
            )?;
        }
        Ok(())
    }
}
