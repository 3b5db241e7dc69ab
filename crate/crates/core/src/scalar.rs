//! Map coefficients that remember whether they were given exactly.
//!
//! A [`Scalar`] always carries an `f64` value. When it was parsed from an
//! integer, a decimal literal or a `p/q` string it also carries the exact
//! rational, and comparisons between two exact scalars are exact. Otherwise
//! comparisons fall back to an absolute tolerance of [`FLOAT_TOL`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CarpetError;

/// Tolerance used when at least one side of a comparison is inexact.
pub const FLOAT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct Scalar {
    value: f64,
    exact: Option<Rational64>,
}

impl Scalar {
    pub fn from_f64(value: f64) -> Self {
        Scalar { value, exact: None }
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(Rational64::new(numer, denom))
    }

    pub fn from_rational(r: Rational64) -> Self {
        Scalar {
            value: r.to_f64().unwrap_or(f64::NAN),
            exact: Some(r),
        }
    }

    pub fn zero() -> Self {
        Self::from_ratio(0, 1)
    }

    pub fn one() -> Self {
        Self::from_ratio(1, 1)
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Rational64> {
        self.exact
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    fn combine(
        self,
        other: Scalar,
        float: impl Fn(f64, f64) -> f64,
        exact: impl Fn(&Rational64, &Rational64) -> Option<Rational64>,
    ) -> Scalar {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => match exact(&a, &b) {
                Some(r) => Scalar::from_rational(r),
                None => Scalar::from_f64(float(self.value, other.value)),
            },
            _ => Scalar::from_f64(float(self.value, other.value)),
        }
    }

    /// Three-way comparison; `Equal` means exactly equal for two exact
    /// scalars and within [`FLOAT_TOL`] otherwise.
    pub fn cmp_tol(&self, other: &Scalar) -> Ordering {
        if let (Some(a), Some(b)) = (self.exact, other.exact) {
            return a.cmp(&b);
        }
        let d = self.value - other.value;
        if d.abs() <= FLOAT_TOL {
            Ordering::Equal
        } else if d < 0.0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn eq_tol(&self, other: &Scalar) -> bool {
        self.cmp_tol(other) == Ordering::Equal
    }

    pub fn lt_tol(&self, other: &Scalar) -> bool {
        self.cmp_tol(other) == Ordering::Less
    }

    pub fn le_tol(&self, other: &Scalar) -> bool {
        self.cmp_tol(other) != Ordering::Greater
    }
}

impl Add for Scalar {
    type Output = Scalar;

    fn add(self, other: Scalar) -> Scalar {
        self.combine(other, |a, b| a + b, |a, b| a.checked_add(b))
    }
}

impl Sub for Scalar {
    type Output = Scalar;

    fn sub(self, other: Scalar) -> Scalar {
        self.combine(other, |a, b| a - b, |a, b| a.checked_sub(b))
    }
}

impl Mul for Scalar {
    type Output = Scalar;

    fn mul(self, other: Scalar) -> Scalar {
        self.combine(other, |a, b| a * b, |a, b| a.checked_mul(b))
    }
}

/// Falls back to floating point on a zero or overflowing exact divisor.
impl Div for Scalar {
    type Output = Scalar;

    fn div(self, other: Scalar) -> Scalar {
        self.combine(
            other,
            |a, b| a / b,
            |a, b| if b.is_zero() { None } else { a.checked_div(b) },
        )
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::from_f64(v)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.eq_tol(other)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

fn parse_decimal(s: &str) -> Option<Rational64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let denom = 10i64.checked_pow(u32::try_from(frac_part.len()).ok()?)?;
    let r = Rational64::new(numer, denom);
    Some(if neg { -r } else { r })
}

impl FromStr for Scalar {
    type Err = CarpetError;

    /// Accepts `p/q`, integers and plain decimals exactly; anything else
    /// `f64` parses (e.g. `1e-3`) is kept as an inexact float.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|_| CarpetError::Parse(format!("bad numerator in {s:?}")))?;
            let q: i64 = q
                .trim()
                .parse()
                .map_err(|_| CarpetError::Parse(format!("bad denominator in {s:?}")))?;
            if q == 0 {
                return Err(CarpetError::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Scalar::from_ratio(p, q));
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(Scalar::from_rational(r));
        }
        s.parse::<f64>()
            .map(Scalar::from_f64)
            .map_err(|_| CarpetError::Parse(format!("not a number: {s:?}")))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.exact {
            Some(_) => serializer.serialize_str(&self.to_string()),
            None => serializer.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScalarVisitor;

        impl Visitor<'_> for ScalarVisitor {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a \"p/q\" string")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
                Ok(Scalar::from_f64(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
                Ok(Scalar::from_ratio(v, 1))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
                i64::try_from(v)
                    .map(|v| Scalar::from_ratio(v, 1))
                    .map_err(|_| E::custom("integer too large"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ScalarVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_and_decimal_exactly() {
        let a: Scalar = "37/120".parse().unwrap();
        assert_eq!(a.exact(), Some(Rational64::new(37, 120)));
        let b: Scalar = "0.025".parse().unwrap();
        assert_eq!(b.exact(), Some(Rational64::new(1, 40)));
        let c: Scalar = "1e-3".parse().unwrap();
        assert!(!c.is_exact());
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("abc".parse::<Scalar>().is_err());
    }

    #[test]
    fn exact_sums_touch_exactly() {
        let third = Scalar::from_ratio(1, 3);
        let sixth = Scalar::from_ratio(1, 6);
        let end = third + sixth + sixth + sixth + sixth;
        assert_eq!(end.exact(), Some(Rational64::new(1, 1)));
        assert!(end.eq_tol(&Scalar::one()));
    }

    #[test]
    fn json_round_trip_keeps_exactness() {
        let v: Vec<Scalar> = serde_json::from_str(r#"["1/3", 0.5, 2]"#).unwrap();
        assert!(v[0].is_exact());
        assert!(!v[1].is_exact());
        assert!(v[2].is_exact());
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["1/3",0.5,"2"]"#);
    }
}
