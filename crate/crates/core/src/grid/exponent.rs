//! Exact Lebesgue exponents, including `p = infinity` and `p < 1`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// A Lebesgue exponent in `(0, infinity]`, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational),
    Infinity,
}

impl Exponent {
    pub fn finite(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Domain("exponent denominator is zero".into()));
        }
        let value = Rational::new(numer, denom);
        if value <= Rational::zero() {
            return Err(Error::Domain(format!("exponent must be positive, got {value}")));
        }
        Ok(Exponent::Finite(value))
    }

    pub fn integer(p: i64) -> Result<Self> {
        Exponent::finite(p, 1)
    }

    /// `1/p`, with `1/infinity = 0`.
    pub fn reciprocal(self) -> Rational {
        match self {
            Exponent::Finite(p) => p.recip(),
            Exponent::Infinity => Rational::zero(),
        }
    }

    /// The exponent whose reciprocal is `r`; `r = 0` gives infinity.
    pub fn from_reciprocal(r: Rational) -> Result<Self> {
        if r < Rational::zero() {
            return Err(Error::Domain(format!("reciprocal exponent {r} is negative")));
        }
        if r.is_zero() {
            Ok(Exponent::Infinity)
        } else {
            Ok(Exponent::Finite(r.recip()))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => *p.numer() as f64 / *p.denom() as f64,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Parses `"a/b"`, `"a"`, or `"inf"`. Decimal literals are rejected so that
/// exponents stay exact.
impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞" | "Inf") {
            return Ok(Exponent::Infinity);
        }
        let bad = || Error::Domain(format!("exponent `{s}` is not of the form a/b, a, or inf"));
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let is_int = |t: &str| {
            let t = t.strip_prefix('-').unwrap_or(t);
            !t.is_empty() && t.chars().all(|c| c.is_ascii_digit())
        };
        if !is_int(num) || !is_int(den) {
            return Err(bad());
        }
        let num: i64 = num.parse().map_err(|_| bad())?;
        let den: i64 = den.parse().map_err(|_| bad())?;
        Exponent::finite(num, den)
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(p1, p2)` with `1 <= p1, p2 <= infinity` and the derived target
/// exponent `1/p = 1/p1 + 1/p2`, so `p` lies in `[1/2, infinity]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentPair {
    p1: Exponent,
    p2: Exponent,
}

impl ExponentPair {
    pub fn new(p1: Exponent, p2: Exponent) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if p.reciprocal() > Rational::one() {
                return Err(Error::Domain(format!("{name} = {p} is below 1")));
            }
        }
        Ok(ExponentPair { p1, p2 })
    }

    pub fn parse(p1: &str, p2: &str) -> Result<Self> {
        ExponentPair::new(p1.parse()?, p2.parse()?)
    }

    pub fn p1(&self) -> Exponent {
        self.p1
    }

    pub fn p2(&self) -> Exponent {
        self.p2
    }

    /// `1/p = 1/p1 + 1/p2`.
    pub fn target_reciprocal(&self) -> Rational {
        self.p1.reciprocal() + self.p2.reciprocal()
    }

    pub fn p(&self) -> Exponent {
        Exponent::from_reciprocal(self.target_reciprocal()).expect("sum of nonnegative reciprocals")
    }

    pub fn swapped(&self) -> Self {
        ExponentPair {
            p1: self.p2,
            p2: self.p1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_forms() {
        assert_eq!("4/3".parse::<Exponent>().unwrap(), Exponent::finite(4, 3).unwrap());
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::integer(2).unwrap());
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert!("1.5".parse::<Exponent>().is_err());
        assert!("0".parse::<Exponent>().is_err());
        assert!("-2/3".parse::<Exponent>().is_err());
        assert!("1/0".parse::<Exponent>().is_err());
    }

    #[test]
    fn target_exponent() {
        let pair = ExponentPair::parse("4/3", "2").unwrap();
        assert_eq!(pair.p(), Exponent::finite(4, 5).unwrap());
        let pair = ExponentPair::parse("1", "inf").unwrap();
        assert_eq!(pair.p(), Exponent::integer(1).unwrap());
        let pair = ExponentPair::parse("inf", "inf").unwrap();
        assert_eq!(pair.p(), Exponent::Infinity);
        assert!(ExponentPair::parse("1/2", "2").is_err());
    }

    proptest! {
        #[test]
        fn reciprocal_identity_is_exact(a in 1i64..50, b in 1i64..50, c in 1i64..50, d in 1i64..50) {
            let p1 = Exponent::finite(a + b, a).unwrap();
            let p2 = Exponent::finite(c + d, c).unwrap();
            let pair = ExponentPair::new(p1, p2).unwrap();
            let inv = pair.p().reciprocal();
            prop_assert_eq!(inv, p1.reciprocal() + p2.reciprocal());
            prop_assert!(inv <= Rational::from_integer(2));
        }
    }
}
