//! JSON fixtures compiled into the library.

use crate::dynamics::{RateTable, SpinSystemJson};
use crate::error::{Error, Result};
use crate::io::{parse_json, MeasureJson, ThreeSiteInput};
use crate::measures::WeightVector;
use crate::rational::Rational;
use crate::three_site::ThreeSiteCoords;

use super::ExperimentSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    Measure,
    ThreeSite,
    Rates,
    Experiment,
}

pub struct Fixture {
    pub name: &'static str,
    pub kind: FixtureKind,
    pub text: &'static str,
}

macro_rules! fixture {
    ($name:literal, $kind:ident) => {
        Fixture {
            name: $name,
            kind: FixtureKind::$kind,
            text: include_str!(concat!("../../fixtures/", $name, ".json")),
        }
    };
}

pub const FIXTURES: &[Fixture] = &[
    fixture!("derangement3", Measure),
    fixture!("eps_dca_not_lattice", ThreeSite),
    fixture!("eps_associated_not_downward", ThreeSite),
    fixture!("contact_path3", Rates),
    fixture!("contact_path4", Rates),
    fixture!("independent3", Rates),
    fixture!("all_or_nothing3", Rates),
    fixture!("nonattractive2", Rates),
    fixture!("monomial3", Rates),
    fixture!("experiment_contact_downward", Experiment),
    fixture!("experiment_contact_associated", Experiment),
    fixture!("experiment_independent_lattice", Experiment),
    fixture!("experiment_contact_dca", Experiment),
];

pub fn get(name: &str) -> Result<&'static Fixture> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    FIXTURES
        .iter()
        .find(|f| f.name == stem)
        .ok_or_else(|| Error::Input(format!("unknown fixture {name:?}")))
}

fn expect(f: &Fixture, kind: FixtureKind) -> Result<()> {
    if f.kind != kind {
        return Err(Error::Input(format!("fixture {} is {:?}, not {:?}", f.name, f.kind, kind)));
    }
    Ok(())
}

pub fn measure(name: &str) -> Result<WeightVector<Rational>> {
    let f = get(name)?;
    expect(f, FixtureKind::Measure)?;
    parse_json::<MeasureJson>(f.text, f.name)?.to_exact()
}

pub fn three_site(name: &str) -> Result<ThreeSiteCoords<Rational>> {
    let f = get(name)?;
    expect(f, FixtureKind::ThreeSite)?;
    parse_json::<ThreeSiteInput>(f.text, f.name)?.to_coords()
}

pub fn rates(name: &str) -> Result<RateTable> {
    let f = get(name)?;
    expect(f, FixtureKind::Rates)?;
    parse_json::<SpinSystemJson>(f.text, f.name)?.to_rates()
}

pub fn experiment(name: &str) -> Result<ExperimentSpec> {
    let f = get(name)?;
    expect(f, FixtureKind::Experiment)?;
    parse_json(f.text, f.name)
}
