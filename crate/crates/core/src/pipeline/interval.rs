//! Interval arithmetic with one-ULP outward widening.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    /// Exact point interval.
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "inverted interval");
        Interval { lo, hi }
    }

    /// Outward enclosure of a round-to-nearest result.
    fn widened(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            return Self::ENTIRE;
        }
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }

    pub fn hull(self, o: Interval) -> Self {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset(self, o: Interval) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }

    pub fn mid(self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    /// `+1` if every element exceeds `eps`, `-1` if every element is below `-eps`, else `0`.
    pub fn strict_sign(self, eps: f64) -> i8 {
        if self.lo > eps {
            1
        } else if self.hi < -eps {
            -1
        } else {
            0
        }
    }

    pub fn sqr(self) -> Self {
        self.powi(2)
    }

    /// Integer power with the monotone rule for even exponents.
    pub fn powi(self, n: u32) -> Self {
        if n == 0 {
            return Interval::point(1.0);
        }
        if n.is_multiple_of(2) {
            let m = if self.lo >= 0.0 {
                self
            } else if self.hi <= 0.0 {
                -self
            } else {
                Interval { lo: 0.0, hi: (-self.lo).max(self.hi) }
            };
            let r = m.repeated(n);
            return Interval { lo: r.lo.max(0.0), hi: r.hi };
        }
        // odd powers are increasing
        let a = Interval::point(self.lo).repeated(n);
        let b = Interval::point(self.hi).repeated(n);
        Interval { lo: a.lo, hi: b.hi }
    }

    fn repeated(self, n: u32) -> Self {
        let mut acc = self;
        for _ in 1..n {
            acc = acc * self;
        }
        acc
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::widened(self.lo + o.lo, self.hi + o.hi)
    }
}

impl std::ops::Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::widened(self.lo - o.hi, self.hi - o.lo)
    }
}

impl std::ops::Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl std::ops::Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        if p.iter().any(|x| x.is_nan()) {
            // 0 * inf
            return Interval::ENTIRE;
        }
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::widened(lo, hi)
    }
}
