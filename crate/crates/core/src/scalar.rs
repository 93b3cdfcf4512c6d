//! Scalar abstraction for the moment/cumulant layer.
//!
//! All combinatorial identities are exercised twice: once over exact big
//! rationals (bit-for-bit equality) and once over `f64` (the Monte Carlo
//! side). The transforms are generic over this trait so both paths share one
//! implementation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A field scalar: exact `BigRational` or `f64`.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// Tag recorded in serialized sequences.
    const MODE: &'static str;

    /// Exact image of a small signed integer.
    fn from_int(n: i64) -> Self;

    /// Image of a big-rational constant (exact for rationals, rounded for
    /// floats). Used to pull Möbius and Weingarten values into this domain.
    fn from_rational(q: &BigRational) -> Self;

    /// JSON rendering: rationals as `"p/q"` strings, floats as numbers.
    fn to_json(&self) -> serde_json::Value;
}

impl Scalar for BigRational {
    const MODE: &'static str = "rational";

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format!("{}/{}", self.numer(), self.denom()))
    }
}

impl Scalar for f64 {
    const MODE: &'static str = "float";

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }
}

/// Convenience constructor for small rationals in tests and fixtures.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
