//! Exact rational helpers: parsing from `"p/q"` / decimal strings, formatting,
//! and conversion to binary64.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number that (de)serializes as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn integer(v: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s).map(Rational)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => parse_rational(&s).map(Rational).map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(Rational::integer(i)),
        }
    }
}

/// Parse `"p/q"`, `"p"` or a plain decimal such as `"-0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Malformed(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Malformed(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac.is_empty())
        {
            return Err(bad());
        }
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let num = BigInt::from_str(&digits).map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let v = BigRational::new(num, den);
        return Ok(if neg { -v } else { v });
    }
    BigInt::from_str(t).map(BigRational::from_integer).map_err(|_| bad())
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational value of a finite binary64.
pub fn from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn product<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigRational {
    values.into_iter().fold(BigRational::one(), |acc, v| acc * v)
}

/// Smallest rational with denominator `10^digits` that is `>= target^(1/root)`.
///
/// The check `r^root >= target` is carried out exactly, so the returned value
/// never undershoots the real root even when the float estimate does.
pub fn ceil_root(target: &BigRational, root: u32, digits: u32) -> BigRational {
    assert!(root > 0);
    let scale = num_traits::pow(BigInt::from(10), digits as usize);
    let approx = to_f64(target).powf(1.0 / root as f64);
    let mut k = BigInt::from_str(&format!("{:.0}", (approx * 10f64.powi(digits as i32)).floor()))
        .unwrap_or_else(|_| BigInt::zero());
    // step back a little in case the float root overshot, then walk upward
    k -= 2;
    if k.is_negative() {
        k = BigInt::zero();
    }
    loop {
        let r = BigRational::new(k.clone(), scale.clone());
        if num_traits::pow(r.clone(), root as usize) >= *target {
            return r;
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_decimal_and_integer() {
        assert_eq!(parse_rational("1/2").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(
            parse_rational("-0.125").unwrap(),
            BigRational::new((-1).into(), 8.into())
        );
        assert_eq!(parse_rational(" 7 ").unwrap(), BigRational::from_integer(7.into()));
        assert_eq!(parse_rational("46/3").unwrap().to_string(), "46/3");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn ceil_root_hits_exact_roots() {
        let nine = BigRational::from_integer(9.into());
        assert_eq!(ceil_root(&nine, 2, 12), BigRational::from_integer(3.into()));
        let two = BigRational::from_integer(2.into());
        let r = ceil_root(&two, 2, 6);
        assert!(&r * &r >= two);
        assert_eq!(format_rational(&r), "707107/500000");
    }

    #[test]
    fn serde_roundtrip() {
        let r: Rational = serde_json::from_str("\"3/4\"").unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"3/4\"");
        let i: Rational = serde_json::from_str("5").unwrap();
        assert_eq!(i, Rational::integer(5));
    }
}
