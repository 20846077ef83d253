use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lattice::{Config, UpSet};
use crate::rational::{serde_rational, serde_rational_vec, Margin, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Associated,
    Lattice,
    DownwardFkg,
    Dca,
    StochasticOrder,
    Attractive,
    IndependentFlips,
    ConstantDeaths,
    DeathConstantOnNonzero,
    AdditiveBirths,
    SubmodularBirths,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "holds")]
    Holds,
    #[serde(rename = "fails")]
    Fails,
    /// A randomized search found no violation; nothing is certified.
    #[serde(rename = "falsified-only-search-exhausted")]
    SearchExhausted,
}

/// Evidence attached to a failing verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Increasing events with negative covariance.
    UpSetPair { u: UpSet, v: UpSet },
    /// Negative covariance after conditioning on zeros at `zeros`.
    Conditioned { zeros: Vec<usize>, u: UpSet, v: UpSet },
    /// Negative covariance under the tilt by `h` (values indexed by config).
    Tilt {
        #[serde(with = "serde_rational_vec")]
        h: Vec<Rational>,
        u: UpSet,
        v: UpSet,
    },
    /// `μ(η∧ζ)μ(η∨ζ) < μ(η)μ(ζ)`.
    ConfigPair { eta: Config, zeta: Config },
    /// Up-set on which the order fails.
    UpSet { u: UpSet },
    /// Rate at `site` moves the wrong way between `lower <= upper`.
    SiteConfigPair { site: usize, lower: Config, upper: Config },
    /// Two configurations where a rate function breaks the property.
    SiteConfigs { site: usize, eta: Config, zeta: Config },
    /// Negative or non-reproducing coefficient of the additive expansion.
    Coefficient {
        site: usize,
        set: Vec<usize>,
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    /// A closed-form inequality with negative slack.
    Inequality { system: String, index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Minimum slack over the checked constraints, or the witness slack when
    /// the scan stopped at the first violation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<Margin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strictly_positive: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl PropertyReport {
    pub fn new(property: Property, verdict: Verdict) -> Self {
        PropertyReport {
            property,
            verdict,
            witness: None,
            margin: None,
            strictly_positive: None,
            notes: Vec::new(),
        }
    }

    pub fn holds(property: Property, margin: Option<Margin>) -> Self {
        PropertyReport { margin, ..Self::new(property, Verdict::Holds) }
    }

    pub fn fails(property: Property, witness: Witness, margin: Option<Margin>) -> Self {
        PropertyReport { witness: Some(witness), margin, ..Self::new(property, Verdict::Fails) }
    }

    pub fn is_holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.verdict == Verdict::Fails
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}
