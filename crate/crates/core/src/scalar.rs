//! Numeric coefficient abstraction.
//!
//! Every IR type is generic over a [`Scalar`]. Binary floats use a relative
//! tolerance in comparisons; [`Rational`] coefficients compare exactly when
//! the tolerance is zero and otherwise go through the same relative test.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational coefficient.
pub type Rational = BigRational;

pub trait Scalar:
    Num + Signed + Clone + Debug + PartialOrd + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Parse an unsigned decimal literal (`12`, `0.5`, `.25`).
    fn parse_decimal(text: &str) -> Option<Self>;

    /// Shortest decimal (or `n/d`) text that parses back to exactly `self`.
    /// Always non-negative input is expected; callers render the sign.
    fn render(&self) -> String;

    fn is_finite_value(&self) -> bool;

    /// `|a - b| <= tol * max(1, |a|, |b|)`.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self == other {
            return true;
        }
        let Some(tol) = Self::from_f64(tol) else {
            return false;
        };
        let diff = (self.clone() - other.clone()).abs();
        let mut scale = Self::one();
        for v in [self.abs(), other.abs()] {
            if v > scale {
                scale = v;
            }
        }
        diff <= tol * scale
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

fn valid_decimal(text: &str) -> bool {
    let mut seen_digit = false;
    let mut seen_dot = false;
    for c in text.chars() {
        match c {
            '0'..='9' => seen_digit = true,
            '.' if !seen_dot => seen_dot = true,
            _ => return false,
        }
    }
    seen_digit
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn parse_decimal(text: &str) -> Option<Self> {
                if !valid_decimal(text) {
                    return None;
                }
                text.parse::<$t>().ok()
            }

            fn render(&self) -> String {
                // Display for floats is the shortest round-trip form and never
                // uses exponent notation.
                format!("{}", self)
            }

            fn is_finite_value(&self) -> bool {
                self.is_finite()
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

impl Scalar for Rational {
    fn parse_decimal(text: &str) -> Option<Self> {
        if !valid_decimal(text) {
            return None;
        }
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().ok()?
        };
        let denom = num_traits::pow(BigInt::from(10u8), frac_part.len());
        Some(BigRational::new(numer, denom))
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

/// Convert any scalar to `f64` for reporting.
pub fn to_f64<S: Scalar>(value: &S) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}
