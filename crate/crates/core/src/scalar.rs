//! Scalar abstraction for the linear-algebra kernel.
//!
//! Elimination, nullspace and simplex routines are written once over
//! [`Scalar`]. Exact types (`BigRational`, `Rational64`) make every zero
//! test exact; `f64`/`f32` use an absolute tolerance and are only meant for
//! numeric cross-checks.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, ToPrimitive};
use std::fmt::Debug;

pub trait Scalar: Clone + Debug + PartialOrd + Signed {
    /// Whether the value should be treated as zero by pivoting logic.
    fn is_negligible(&self) -> bool;

    fn from_i64(value: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Whether arithmetic on this type is exact.
    const EXACT: bool;
}

impl Scalar for BigRational {
    fn is_negligible(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }

    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    const EXACT: bool = true;
}

impl Scalar for Rational64 {
    fn is_negligible(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }

    fn from_i64(value: i64) -> Self {
        Rational64::from_integer(value)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    const EXACT: bool = true;
}

impl Scalar for f64 {
    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-10
    }

    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    const EXACT: bool = false;
}

impl Scalar for f32 {
    fn is_negligible(&self) -> bool {
        self.abs() <= 1e-5
    }

    fn from_i64(value: i64) -> Self {
        value as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    const EXACT: bool = false;
}

/// Renders a rational as `n` or `n/d`.
pub fn rational_to_string(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Parses `n`, `-n` or `n/d`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if num_traits::Zero::is_zero(&d) {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => text.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}
