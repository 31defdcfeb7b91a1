use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// An exact count ratio such as 26/30. Rounding happens only on display.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub numerator: u64,
    pub denominator: u64,
}

impl Ratio {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        Ratio {
            numerator,
            denominator,
        }
    }

    pub fn exact(&self) -> Option<BigRational> {
        (self.denominator != 0).then(|| {
            BigRational::new(BigInt::from(self.numerator), BigInt::from(self.denominator))
        })
    }

    pub fn value(&self) -> f64 {
        self.exact().and_then(|r| r.to_f64()).unwrap_or(f64::NAN)
    }

    /// Decimal text rounded half-up at `places` digits; `n/a` when the
    /// denominator is zero.
    pub fn fixed(&self, places: u32) -> String {
        let Some(r) = self.exact() else {
            return "n/a".into();
        };
        let scale = BigInt::from(10u32).pow(places);
        let scaled = r * BigRational::from_integer(scale.clone());
        let half = BigRational::new(1.into(), 2.into());
        let rounded = (scaled + half).floor().to_integer();
        let int = &rounded / &scale;
        let frac = &rounded % &scale;
        if places == 0 {
            return int.to_string();
        }
        let frac = if frac.is_zero() { "0".to_string() } else { frac.to_string() };
        format!("{int}.{frac:0>width$}", width = places as usize)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fixed(4))
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Ratio", 3)?;
        st.serialize_field("numerator", &self.numerator)?;
        st.serialize_field("denominator", &self.denominator)?;
        st.serialize_field("value", &self.fixed(4))?;
        st.end()
    }
}
