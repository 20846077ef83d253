//! JSON schemas shared by the library and the command-line front end.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SiteSet;
use crate::measures::{Measure, WeightVector};
use crate::rational::{format_rational, Rational, RationalRepr};
use crate::three_site::{NamedCoords, ThreeSiteCoords};

/// Version stamped into every report and accepted in every input.
pub const FORMAT_VERSION: u32 = 1;

fn current_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

/// A weight vector indexed by configuration mask. Exact weights are written
/// as `"p/q"` strings, float weights as JSON numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    #[serde(default = "current_version")]
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub weights: Vec<RationalRepr>,
    #[serde(default)]
    pub mode: Mode,
}

impl MeasureJson {
    pub fn sites(&self) -> Result<SiteSet> {
        check_version(self.format_version)?;
        let n = match self.n {
            Some(n) => n,
            None => {
                let len = self.weights.len();
                if !len.is_power_of_two() {
                    return Err(Error::Input(format!("{len} weights is not a power of two")));
                }
                len.trailing_zeros() as usize
            }
        };
        SiteSet::new(n)
    }

    pub fn to_exact(&self) -> Result<WeightVector<Rational>> {
        let w = self.weights.iter().map(|r| r.to_rational()).collect::<Result<Vec<_>>>()?;
        WeightVector::new(self.sites()?, w)
    }

    pub fn to_float(&self) -> Result<WeightVector<f64>> {
        let w = self
            .weights
            .iter()
            .map(|r| match r {
                RationalRepr::Number(x) => x.as_f64().ok_or_else(|| Error::Input(format!("bad number {x}"))),
                RationalRepr::Text(_) => r.to_rational().map(|q| num_traits::ToPrimitive::to_f64(&q).unwrap_or(f64::NAN)),
            })
            .collect::<Result<Vec<_>>>()?;
        WeightVector::new(self.sites()?, w)
    }

    pub fn from_exact(sites: SiteSet, weights: &[Rational]) -> Self {
        MeasureJson {
            format_version: FORMAT_VERSION,
            n: Some(sites.n()),
            weights: weights.iter().map(|r| RationalRepr::Text(format_rational(r))).collect(),
            mode: Mode::Exact,
        }
    }

    pub fn from_float(mu: &Measure<f64>) -> Self {
        MeasureJson {
            format_version: FORMAT_VERSION,
            n: Some(mu.sites().n()),
            weights: mu
                .probs()
                .iter()
                .map(|&x| RationalRepr::Number(serde_json::Number::from_f64(x).unwrap_or_else(|| 0.into())))
                .collect(),
            mode: Mode::Float,
        }
    }
}

/// Three-site input: named coordinates or a generic eight-entry measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThreeSiteInput {
    Named(NamedCoords),
    Generic(MeasureJson),
}

impl ThreeSiteInput {
    pub fn to_coords(&self) -> Result<ThreeSiteCoords<Rational>> {
        match self {
            ThreeSiteInput::Named(c) => c.to_coords(),
            ThreeSiteInput::Generic(m) => {
                let w = m.to_exact()?;
                if w.sites().n() != 3 {
                    return Err(Error::SiteMismatch(w.sites().n(), 3));
                }
                ThreeSiteCoords::from_weights(w.weights())
            }
        }
    }
}

/// Wrapper written by every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub format_version: u32,
    pub command: String,
    pub passed: bool,
    pub report: T,
}

impl<T> Report<T> {
    pub fn new(command: &str, passed: bool, report: T) -> Self {
        Report { format_version: FORMAT_VERSION, command: command.to_string(), passed, report }
    }
}

pub fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Input(format!("format_version {v} is not supported (expected {FORMAT_VERSION})")));
    }
    Ok(())
}

/// Parses JSON, naming `what` and the line and column on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("{what}: {e}")))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
