//! Exact rationals and the scalar abstraction shared by the exact and float
//! code paths.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"p/q"`, integers and decimal literals (`"0.125"`, `"-3e-2"`)
/// exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let err = || Error::ParseRational(text.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(err)?;
        let den = parse_decimal(den.trim()).ok_or_else(err)?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(num / den)
    } else {
        parse_decimal(s).ok_or_else(err)
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

/// Canonical text form: `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Serde adapter: rationals as `"p/q"` strings; numbers are accepted on input.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let repr = RationalRepr::deserialize(d)?;
        repr.to_rational().map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let reprs = Vec::<RationalRepr>::deserialize(d)?;
        reprs
            .iter()
            .map(|r| r.to_rational().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// A rational as it may appear in JSON input.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum RationalRepr {
    Text(String),
    Number(serde_json::Number),
}

impl RationalRepr {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            RationalRepr::Text(s) => parse_rational(s),
            // Display of a JSON number is its shortest round-trip decimal.
            RationalRepr::Number(n) => parse_rational(&n.to_string()),
        }
    }
}

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> Self {
        RationalRepr::Text(format_rational(r))
    }
}

/// A minimum slack, exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum Margin {
    Exact(Rational),
    Float(f64),
}

impl Margin {
    pub fn to_f64(&self) -> f64 {
        match self {
            Margin::Exact(r) => ToPrimitive::to_f64(r).unwrap_or(f64::NAN),
            Margin::Float(x) => *x,
        }
    }
}

impl Serialize for Margin {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Margin::Exact(r) => s.serialize_str(&format_rational(r)),
            Margin::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Margin {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RationalRepr::deserialize(d)? {
            RationalRepr::Text(s) => parse_rational(&s)
                .map(Margin::Exact)
                .map_err(serde::de::Error::custom),
            RationalRepr::Number(n) => n
                .as_f64()
                .map(Margin::Float)
                .ok_or_else(|| serde::de::Error::custom("margin out of range")),
        }
    }
}

/// Weights prepared for the up-set pair sweep: integers over a common
/// denominator when exact, plain floats otherwise.
#[derive(Clone, Debug)]
pub enum SweepWeights {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
    Float(Vec<f64>),
}

/// Number type a measure can be stored in. Implemented for [`Rational`]
/// (exact verdicts) and `f64` (evolved measures, tolerance-based verdicts).
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn to_margin(&self) -> Margin;
    fn is_finite(&self) -> bool;

    /// Whether the value is a violation: `< 0` for exact values, `< -tol`
    /// for floats.
    fn below(&self, tol: f64) -> bool;

    fn sweep_weights(ws: &[Self]) -> SweepWeights;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_i64(v: i64) -> Self {
        int(v)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_margin(&self) -> Margin {
        Margin::Exact(self.clone())
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn below(&self, _tol: f64) -> bool {
        self.is_negative()
    }

    fn sweep_weights(ws: &[Self]) -> SweepWeights {
        let lcm = ws
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scaled: Vec<BigInt> = ws
            .iter()
            .map(|w| w.numer() * (&lcm / w.denom()))
            .collect();
        let total: BigInt = scaled.iter().sum();
        // total * total must fit comfortably in an i128.
        if total.bits() <= 62 {
            SweepWeights::Small(
                scaled
                    .iter()
                    .map(|v| v.to_i128().expect("bounded by total"))
                    .collect(),
            )
        } else {
            SweepWeights::Big(scaled)
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_margin(&self) -> Margin {
        Margin::Float(*self)
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn below(&self, tol: f64) -> bool {
        *self < -tol
    }

    fn sweep_weights(ws: &[Self]) -> SweepWeights {
        SweepWeights::Float(ws.to_vec())
    }
}

/// Exact rational closest to a float, by its binary expansion.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}
