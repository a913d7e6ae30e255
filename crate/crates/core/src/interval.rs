//! Closed intervals with exact rational endpoints.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

use crate::arith::rat_to_f64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

/// 50 decimals of pi; the enclosure is `[PI_DIGITS, PI_DIGITS + 1e-50]`.
const PI_DIGITS: &str = "314159265358979323846264338327950288419716939937510";

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(q: BigRational) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    pub fn from_int(n: i64) -> Self {
        Self::point(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn pi() -> Self {
        let num: BigInt = PI_DIGITS.parse().unwrap();
        let den = BigInt::from(10).pow(50);
        let lo = BigRational::new(num.clone(), den.clone());
        let hi = BigRational::new(num + 1, den);
        Interval { lo, hi }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        rat_to_f64(&((&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))))
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// `width <= 2^-bits * min|x|` over the interval (false if it straddles 0).
    pub fn rel_width_below(&self, bits: u32) -> bool {
        if self.lo == self.hi {
            return true;
        }
        if self.contains_zero() {
            return false;
        }
        let m = if self.lo.is_positive() { self.lo.clone() } else { -self.hi.clone() };
        let scale = BigRational::from_integer(BigInt::one() << bits);
        self.width() * scale <= m
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn abs(&self) -> Interval {
        if self.lo.is_negative() && self.hi.is_positive() {
            let m = std::cmp::max(-self.lo.clone(), self.hi.clone());
            Interval { lo: BigRational::zero(), hi: m }
        } else if self.hi.is_positive() || self.hi.is_zero() && self.lo.is_zero() {
            self.clone()
        } else {
            self.neg()
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, q: &BigRational) -> Interval {
        self.mul(&Interval::point(q.clone()))
    }

    /// Division; `None` when the divisor contains zero.
    pub fn div(&self, o: &Interval) -> Option<Interval> {
        if o.contains_zero() {
            return None;
        }
        let inv = Interval { lo: o.hi.recip(), hi: o.lo.recip() };
        Some(self.mul(&inv))
    }

    /// Enclosure of `sqrt` of a nonnegative interval, endpoints on the `2^-bits` grid.
    pub fn sqrt(&self, bits: u32) -> Option<Interval> {
        if self.lo.is_negative() {
            return None;
        }
        Some(Interval { lo: sqrt_lower(&self.lo, bits), hi: sqrt_upper(&self.hi, bits) })
    }

    pub fn cmp_rational(&self, q: &BigRational) -> Option<Ordering> {
        if &self.hi < q {
            Some(Ordering::Less)
        } else if &self.lo > q {
            Some(Ordering::Greater)
        } else if self.lo == self.hi {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

/// Largest dyadic `k / 2^bits` with `k / 2^bits <= sqrt(q)`.
pub fn sqrt_lower(q: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << (2 * bits);
    let t = (q * BigRational::from_integer(scale)).floor().to_integer();
    let s = t.sqrt();
    BigRational::new(s, BigInt::one() << bits)
}

/// Smallest dyadic `k / 2^bits` with `k / 2^bits >= sqrt(q)`.
pub fn sqrt_upper(q: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << (2 * bits);
    let t = (q * BigRational::from_integer(scale)).ceil().to_integer();
    let mut s = t.sqrt();
    if &s * &s < t {
        s += 1;
    }
    BigRational::new(s, BigInt::one() << bits)
}
