//! Outward-padded interval enclosures over binary64.
//!
//! Every arithmetic result is widened by four units in the last place of its
//! magnitude on each side. This is not directed rounding, but it absorbs the
//! round-to-nearest error of the elementary operations (including the libm
//! transcendental functions, which are accurate to well under one ulp).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

const PAD_ULPS: f64 = 4.0;

/// A closed interval `[lo, hi]` known to contain a real quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() {
        0.0
    } else {
        a.next_up() - a
    }
}

fn pad_down(x: f64) -> f64 {
    x - PAD_ULPS * ulp(x)
}

fn pad_up(x: f64) -> f64 {
    x + PAD_ULPS * ulp(x)
}

impl Enclosure {
    /// Builds `[lo, hi]`, swapping the endpoints if they arrive reversed.
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!lo.is_nan() && !hi.is_nan(), "NaN endpoint");
        if lo <= hi {
            Self { lo, hi }
        } else {
            Self { lo: hi, hi: lo }
        }
    }

    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Point value widened by the standard padding, for inputs that are
    /// themselves the rounded result of a computation.
    pub fn around(x: f64) -> Self {
        Self::padded(x, x)
    }

    fn padded(lo: f64, hi: f64) -> Self {
        Self::new(pad_down(lo), pad_up(hi))
    }

    pub const ZERO: Enclosure = Enclosure::point(0.0);
    pub const ONE: Enclosure = Enclosure::point(1.0);
    pub const UNIT: Enclosure = Enclosure { lo: 0.0, hi: 1.0 };

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_enclosure(&self, other: &Enclosure) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Intersection; `None` when the two enclosures are disjoint.
    pub fn intersect(&self, other: &Enclosure) -> Option<Enclosure> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Enclosure { lo, hi })
    }

    /// Clamps into `[lo, hi]`; an enclosure entirely outside collapses to the
    /// nearest bound.
    pub fn clamp(&self, lo: f64, hi: f64) -> Enclosure {
        Enclosure::new(self.lo.clamp(lo, hi), self.hi.clamp(lo, hi))
    }

    pub fn recip(&self) -> Enclosure {
        assert!(self.lo > 0.0 || self.hi < 0.0, "reciprocal of {self} straddles zero");
        Enclosure::padded(1.0 / self.hi, 1.0 / self.lo)
    }

    pub fn sqr(&self) -> Enclosure {
        if self.lo >= 0.0 {
            Enclosure::padded(self.lo * self.lo, self.hi * self.hi)
        } else if self.hi <= 0.0 {
            Enclosure::padded(self.hi * self.hi, self.lo * self.lo)
        } else {
            let m = self.lo.abs().max(self.hi.abs());
            Enclosure::new(0.0, pad_up(m * m))
        }
    }

    pub fn abs(&self) -> Enclosure {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Enclosure::new(0.0, self.hi.max(-self.lo))
        }
    }

    /// Natural logarithm of a strictly positive enclosure.
    pub fn ln(&self) -> Enclosure {
        assert!(self.lo > 0.0, "ln of non-positive enclosure {self}");
        Enclosure::padded(self.lo.ln(), self.hi.ln())
    }

    pub fn exp(&self) -> Enclosure {
        Enclosure::padded(self.lo.exp(), self.hi.exp()).clamp(0.0, f64::INFINITY)
    }

    /// `self^e` for a non-negative base and an enclosed exponent.
    ///
    /// The extremes of `x^y` over a box with `x ≥ 0` sit at the corners, so
    /// four evaluations suffice.
    pub fn powe(&self, e: Enclosure) -> Enclosure {
        assert!(self.lo >= 0.0, "power of negative base {self}");
        let corners = [
            self.lo.powf(e.lo),
            self.lo.powf(e.hi),
            self.hi.powf(e.lo),
            self.hi.powf(e.hi),
        ];
        let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Enclosure::padded(lo, hi).clamp(0.0, f64::INFINITY)
    }

    pub fn powf(&self, e: f64) -> Enclosure {
        self.powe(Enclosure::point(e))
    }

    pub fn max(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    pub fn min(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.15e}, {:.15e}]", self.lo, self.hi)
    }
}

impl From<f64> for Enclosure {
    fn from(x: f64) -> Self {
        Enclosure::point(x)
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure { lo: -self.hi, hi: -self.lo }
    }
}

impl Add for Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: Enclosure) -> Enclosure {
        Enclosure::padded(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: Enclosure) -> Enclosure {
        Enclosure::padded(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Mul for Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: Enclosure) -> Enclosure {
        let p = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Enclosure::padded(lo, hi)
    }
}

impl Div for Enclosure {
    type Output = Enclosure;
    fn div(self, rhs: Enclosure) -> Enclosure {
        self * rhs.recip()
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Enclosure {
            type Output = Enclosure;
            fn $m(self, rhs: f64) -> Enclosure {
                $tr::$m(self, Enclosure::point(rhs))
            }
        }
        impl $tr<Enclosure> for f64 {
            type Output = Enclosure;
            fn $m(self, rhs: Enclosure) -> Enclosure {
                $tr::$m(Enclosure::point(self), rhs)
            }
        }
    )*};
}

scalar_ops!(Add add, Sub sub, Mul mul, Div div);

impl std::iter::Sum for Enclosure {
    fn sum<I: Iterator<Item = Enclosure>>(iter: I) -> Enclosure {
        iter.fold(Enclosure::ZERO, |acc, x| acc + x)
    }
}
