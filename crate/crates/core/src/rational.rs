//! Exact rational numbers used for every model parameter.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = Ratio<i128>;

pub fn q(num: i128, den: i128) -> Q {
    Ratio::new(num, den)
}

pub fn qi(v: i128) -> Q {
    Ratio::from_integer(v)
}

pub fn to_f64(x: &Q) -> f64 {
    // Divide in floating point after reducing, to keep precision for large parts.
    let (n, d) = (x.numer(), x.denom());
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) => a / b,
        _ => f64::NAN,
    }
}

pub fn floor_q(x: &Q) -> i128 {
    Integer::div_floor(x.numer(), x.denom())
}

pub fn ceil_q(x: &Q) -> i128 {
    -Integer::div_floor(&(-x.numer()), x.denom())
}

pub fn max_q(a: Q, b: Q) -> Q {
    if a >= b {
        a
    } else {
        b
    }
}

/// Parses `"a/b"`, an integer, or a finite decimal such as `"0.25"` or `"-1.5e-2"`.
pub fn parse_q(text: &str) -> Result<Q> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((a, b)) = s.split_once('/') {
        let num: i128 = a
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let den: i128 = b
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if den == 0 {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Ratio::new(num, den));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Q> {
    let bad = || Error::Parse(format!("not a rational or decimal: {s:?}"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let mut num: i128 = joined.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = Ratio::from_integer(10i128);
    let mut value = Ratio::from_integer(num);
    if scale >= 0 {
        for _ in 0..scale {
            value *= ten;
        }
    } else {
        for _ in 0..(-scale) {
            value /= ten;
        }
    }
    Ok(value)
}

/// Converts a float through its shortest decimal representation, so `0.9` becomes `9/10`.
pub fn from_f64_decimal(x: f64) -> Result<Q> {
    if !x.is_finite() {
        return Err(Error::Parse(format!("non-finite value {x}")));
    }
    parse_decimal(&format!("{x}"))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Rational display wrapper used in reports.
pub struct Show<'a>(pub &'a Q);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_q(self.0))
    }
}

pub fn is_positive(x: &Q) -> bool {
    x.is_positive()
}

pub fn one() -> Q {
    Q::one()
}

pub fn zero() -> Q {
    Q::zero()
}

pub mod serde_q {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(qi(v as i128)),
            Raw::Float(v) => from_f64_decimal(v).map_err(de::Error::custom),
            Raw::Text(t) => parse_q(&t).map_err(de::Error::custom),
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(
            x: &Option<Q>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_some(&fmt_q(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Option<Q>, D::Error> {
            super::deserialize(d).map(Some)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_q("9/10").unwrap(), q(9, 10));
        assert_eq!(parse_q(" 4 ").unwrap(), qi(4));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("-1.5e-2").unwrap(), q(-3, 200));
        assert_eq!(parse_q("2e3").unwrap(), qi(2000));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
        assert!(parse_q(".").is_err());
    }

    #[test]
    fn float_goes_through_decimal() {
        assert_eq!(from_f64_decimal(0.9).unwrap(), q(9, 10));
        assert_eq!(from_f64_decimal(7.0 / 8.0).unwrap(), q(7, 8));
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_q(&q(7, 2)), 3);
        assert_eq!(ceil_q(&q(7, 2)), 4);
        assert_eq!(floor_q(&q(-7, 2)), -4);
        assert_eq!(ceil_q(&q(-7, 2)), -3);
        assert_eq!(ceil_q(&qi(3)), 3);
    }
}
