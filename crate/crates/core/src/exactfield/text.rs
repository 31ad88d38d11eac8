//! Text form of exact numbers.
//!
//! ```text
//! RAT := INT | INT "/" POSINT
//! QS  := RAT | RAT SP? ("+"|"-") SP? RAT "*sqrt2" | RAT "*sqrt2"
//! ```
//!
//! Printing is canonical: rationals in lowest terms, the rational part first, the √2 part
//! omitted when zero, and a zero rational part omitted when the √2 part is nonzero.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::qsqrt2::{QSqrt2, Rat};
use crate::error::ParseError;

const SQRT2_SUFFIX: &str = "*sqrt2";

/// Canonical text form of a rational: `n` or `n/d` with `d > 1`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_int(s: &str, allow_sign: bool) -> Result<BigInt, ParseError> {
    let digits = match s.strip_prefix('-') {
        Some(rest) if allow_sign => rest,
        _ => s,
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::Number(format!("malformed integer {s:?}")));
    }
    s.parse::<BigInt>()
        .map_err(|e| ParseError::Number(format!("malformed integer {s:?}: {e}")))
}

/// Parses `INT` or `INT/POSINT`.
pub fn parse_rat(s: &str) -> Result<Rat, ParseError> {
    match s.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(s, true)?)),
        Some((n, d)) => {
            let num = parse_int(n, true)?;
            let den = parse_int(d, false)?;
            if den.is_zero() {
                return Err(ParseError::Number(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// Parses the `QS` production.
pub fn parse_qs(s: &str) -> Result<QSqrt2, ParseError> {
    let s = s.trim_matches(' ');
    if s.is_empty() {
        return Err(ParseError::Number("empty number".into()));
    }
    let Some(body) = s.strip_suffix(SQRT2_SUFFIX) else {
        return Ok(QSqrt2::from_rat(parse_rat(s)?));
    };
    // binary operator: first '+' or '-' past the leading sign position
    let bytes = body.as_bytes();
    let mut split = None;
    let mut i = 1;
    while i < bytes.len() {
        if bytes[i] == b'+' || bytes[i] == b'-' {
            split = Some(i);
            break;
        }
        i += 1;
    }
    match split {
        None => Ok(QSqrt2::sqrt2_times(parse_rat(body)?)),
        Some(i) => {
            let lhs = body[..i].trim_end_matches(' ');
            let rhs = body[i + 1..].trim_start_matches(' ');
            if lhs.is_empty() || rhs.is_empty() {
                return Err(ParseError::Number(format!("malformed number {s:?}")));
            }
            let p = parse_rat(lhs)?;
            let mut q = parse_rat(rhs)?;
            if bytes[i] == b'-' {
                q = -q;
            }
            Ok(QSqrt2::new(p, q))
        }
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.rational_part();
        let q = self.sqrt2_part();
        if q.is_zero() {
            return f.write_str(&format_rat(p));
        }
        if p.is_zero() {
            return write!(f, "{}{}", format_rat(q), SQRT2_SUFFIX);
        }
        if q.is_negative() {
            write!(f, "{}-{}{}", format_rat(p), format_rat(&-q.clone()), SQRT2_SUFFIX)
        } else {
            write!(f, "{}+{}{}", format_rat(p), format_rat(q), SQRT2_SUFFIX)
        }
    }
}

impl FromStr for QSqrt2 {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_qs(s)
    }
}

impl Serialize for QSqrt2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QSqrt2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_qs(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "rat_serde")]` for [`Rat`] fields, written in the exact-number grammar.
pub mod rat_serde {
    use super::{format_rat, parse_rat};
    use crate::exactfield::Rat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::qsqrt2::rat;

    #[test]
    fn parses_grammar_examples() {
        assert_eq!(parse_qs("16/27").unwrap(), QSqrt2::frac(16, 27));
        let x = parse_qs("-2413803/3254580+1777340/3254580*sqrt2").unwrap();
        assert_eq!(x, QSqrt2::new(rat(-2413803, 3254580), rat(1777340, 3254580)));
        assert_eq!(parse_qs("3 - 2*sqrt2").unwrap(), QSqrt2::new(rat(3, 1), rat(-2, 1)));
        assert_eq!(parse_qs("-5/3*sqrt2").unwrap(), QSqrt2::sqrt2_times(rat(-5, 3)));
        assert_eq!(parse_qs("1+-2*sqrt2").unwrap(), QSqrt2::new(rat(1, 1), rat(-2, 1)));
    }

    #[test]
    fn canonical_printing() {
        assert_eq!(QSqrt2::new(rat(3, 1), rat(-2, 1)).to_string(), "3-2*sqrt2");
        assert_eq!(QSqrt2::sqrt2_times(rat(16, 27)).to_string(), "16/27*sqrt2");
        assert_eq!(QSqrt2::frac(-4, 6).to_string(), "-2/3");
        for s in ["0", "-1/2", "7*sqrt2", "-114943/154980+88867/162729*sqrt2"] {
            assert_eq!(parse_qs(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "1/0", "1/-2", "abc", "1//2", "+1", "*sqrt2", "1+*sqrt2", "1+2", "- 1", "1.5"] {
            assert!(parse_qs(s).is_err(), "{s:?} should not parse");
        }
    }
}
