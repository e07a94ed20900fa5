//! Numeric backends shared by every exact computation in the crate.
//!
//! All algorithms are written against [`Scalar`], which is implemented for
//! `f64` and for the exact [`Rational`] type. The rational backend is what the
//! exhaustive inequality suites run on: every comparison there is decided
//! exactly, so a violation can never be an artifact of rounding.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Signed, Zero};
use ordered_float::OrderedFloat;

/// Exact rational numbers with 128-bit numerator and denominator.
pub type Rational = num_rational::Ratio<i128>;

/// Absolute tolerance for floating-point equality checks.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

pub trait Scalar:
    Copy
    + Debug
    + Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Hashable, totally ordered key identifying a value exactly.
    type Key: Hash + Eq + Ord + Clone + Debug + Send + Sync;

    /// Whether arithmetic in this backend is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `numer / denom`; panics on a zero denominator.
    fn ratio(numer: i64, denom: i64) -> Self;
    fn to_f64(self) -> f64;
    fn is_finite(self) -> bool;
    fn key(self) -> Self::Key;

    /// Slack allowed when deciding `a <= b`: zero for exact backends.
    fn slack() -> Self;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Positive part `max(self, 0)`.
    fn pos(self) -> Self {
        self.max_of(Self::zero())
    }

    /// `self <= other` up to [`Scalar::slack`].
    fn le_tol(self, other: Self) -> bool {
        self <= other + Self::slack()
    }

    /// `|self - other| <= slack`.
    fn approx_eq(self, other: Self) -> bool {
        (self - other).abs() <= Self::slack()
    }
}

impl Scalar for f64 {
    type Key = OrderedFloat<f64>;
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        numer as f64 / denom as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn key(self) -> Self::Key {
        // -0.0 and 0.0 must land on the same lattice point.
        OrderedFloat(self + 0.0)
    }
    fn slack() -> Self {
        FLOAT_TOLERANCE
    }
}

impl Scalar for Rational {
    type Key = Rational;
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        Rational::from_integer(1)
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v as i128)
    }
    fn ratio(numer: i64, denom: i64) -> Self {
        Rational::new(numer as i128, denom as i128)
    }
    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn is_finite(self) -> bool {
        true
    }
    fn key(self) -> Self::Key {
        self
    }
    fn slack() -> Self {
        Zero::zero()
    }
    fn abs(self) -> Self {
        Signed::abs(&self)
    }
}

/// Converts a finite `f64` into the nearest dyadic rational with the given
/// number of fractional bits. Exact whenever `x` is itself such a dyadic.
pub fn dyadic(x: f64, bits: u32) -> Rational {
    let scale = (1i128) << bits;
    let numer = (x * scale as f64).round() as i128;
    Rational::new(numer, scale)
}
