use std::fs;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use spincorr::dynamics::{
    additive_births, build_generator, constant_deaths, death_constant_on_nonzero, independent_flips_report,
    is_attractive, semigroup_apply, submodular_births, RateTable, SpinSystemJson,
};
use spincorr::harness::fixtures::{self, FIXTURES};
use spincorr::harness::{search_counterexample, verify_preservation, ExperimentSpec, SearchTarget};
use spincorr::io::{parse_json, to_json, MeasureJson, Report, ThreeSiteInput};
use spincorr::measures::{
    dca_falsify, is_associated, is_downward_fkg, normalize, satisfies_lattice, Property, TiltFamily, TiltSampler,
};
use spincorr::rational::Scalar;
use spincorr::three_site::{classify, NamedCoords, ThreeSiteVerdicts};
use spincorr::{CheckOptions, Measure, Parallelism, PropertyReport, Verdict};

use crate::{markdown, ArithMode, Command, Common, Format, Target};

/// What a command hands back for printing.
pub struct Outcome {
    pub command: &'static str,
    pub passed: bool,
    pub report: Value,
    pub markdown: String,
}

pub fn run(cmd: Command, common: &Common) -> Result<u8> {
    if let Command::Fixtures { name: Some(name) } = &cmd {
        print!("{}", fixtures::get(name)?.text);
        return Ok(0);
    }
    let out = match cmd {
        Command::CheckMeasure { input, mode, tolerance, budget, opt_in_n6, expect } => {
            check_measure(&input, mode, tolerance, budget, opt_in_n6, &expect, common.seed)?
        }
        Command::CheckRates { input, expect } => check_rates(&input, &expect)?,
        Command::Evolve { input, measure, t } => evolve(&input, &measure, &t)?,
        Command::Classify3 { input, tolerance, expect } => classify3(&input, tolerance, &expect)?,
        Command::VerifyTheorem { input, t, budget } => verify_theorem(&input, &t, budget, common.seed)?,
        Command::Search { input, target, budget } => search(&input, target, budget, common.seed)?,
        Command::Fixtures { name: None } => list_fixtures()?,
        Command::Fixtures { .. } => unreachable!("handled above"),
    };
    emit(&out, common)?;
    Ok(if out.passed { 0 } else { 1 })
}

fn emit(out: &Outcome, common: &Common) -> Result<()> {
    let json = to_json(&Report::new(out.command, out.passed, &out.report))?;
    if let Some(path) = &common.output {
        fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    match common.format {
        Format::Json => print!("{json}"),
        Format::Markdown => print!("{}", out.markdown),
    }
    Ok(())
}

/// Reads a file, or a bundled fixture written as `fixture:NAME`.
fn load(input: &str) -> Result<(String, String)> {
    if let Some(name) = input.strip_prefix("fixture:") {
        let f = fixtures::get(name)?;
        return Ok((f.text.to_string(), name.to_string()));
    }
    let text = fs::read_to_string(input).with_context(|| format!("reading {input}"))?;
    Ok((text, input.to_string()))
}

fn parse<T: serde::de::DeserializeOwned>(input: &str) -> Result<T> {
    let (text, label) = load(input)?;
    Ok(parse_json(&text, &label)?)
}

fn property_name(name: &str) -> Result<Property> {
    serde_json::from_value(Value::String(name.to_string())).with_context(|| format!("unknown property {name:?}"))
}

#[derive(Serialize)]
struct Expectation {
    property: Property,
    verdict: Verdict,
    met: bool,
}

/// A claimed property is broken only by a `fails` verdict.
fn expectations(expect: &[String], reports: &[PropertyReport]) -> Result<Vec<Expectation>> {
    expect
        .iter()
        .map(|name| {
            let property = property_name(name)?;
            let Some(r) = reports.iter().find(|r| r.property == property) else {
                bail!("{name} is not reported by this command");
            };
            Ok(Expectation { property, verdict: r.verdict, met: !r.is_fails() })
        })
        .collect()
}

fn suite<T: Scalar>(mu: &Measure<T>, opts: &CheckOptions, seed: u64, budget: usize) -> Result<Vec<PropertyReport>> {
    let mut sampler = TiltSampler::new(seed, TiltFamily::Mixed);
    Ok(vec![
        satisfies_lattice(&mu.as_weights(), opts)?,
        dca_falsify(mu, &mut sampler, budget, opts)?,
        is_downward_fkg(mu, opts)?,
        is_associated(mu, opts)?,
    ])
}

fn check_measure(
    input: &str,
    mode: ArithMode,
    tolerance: f64,
    budget: usize,
    opt_in_n6: bool,
    expect: &[String],
    seed: u64,
) -> Result<Outcome> {
    let json: MeasureJson = parse(input)?;
    let opts = CheckOptions { tolerance, allow_six: opt_in_n6, ..Default::default() };
    let sites = json.sites()?;
    if sites.n() == 6 && !opt_in_n6 {
        bail!("six sites require --opt-in-n6");
    }
    let (reports, normalized) = match mode {
        ArithMode::Exact => {
            let mu = normalize(&json.to_exact()?)?;
            (suite(&mu, &opts, seed, budget)?, MeasureJson::from_exact(sites, mu.probs()))
        }
        ArithMode::Float => {
            let mu = normalize(&json.to_float()?)?;
            (suite(&mu, &opts, seed, budget)?, MeasureJson::from_float(&mu))
        }
    };
    let expected = expectations(expect, &reports)?;
    let passed = expected.iter().all(|e| e.met);
    let md = markdown::properties("Measure", &reports, &expected_rows(&expected));
    let report = serde_json::json!({ "measure": normalized, "properties": reports, "expected": expected });
    Ok(Outcome { command: "check-measure", passed, report, markdown: md })
}

fn expected_rows(e: &[Expectation]) -> Vec<(String, bool)> {
    e.iter().map(|x| (x.property.to_string(), x.met)).collect()
}

fn check_rates(input: &str, expect: &[String]) -> Result<Outcome> {
    let rates: RateTable = parse::<SpinSystemJson>(input)?.to_rates()?;
    let reports = vec![
        is_attractive(&rates),
        independent_flips_report(&rates),
        constant_deaths(&rates),
        death_constant_on_nonzero(&rates),
        additive_births(&rates),
        submodular_births(&rates),
    ];
    let expected = expectations(expect, &reports)?;
    let passed = expected.iter().all(|e| e.met);
    let md = markdown::properties("Rates", &reports, &expected_rows(&expected));
    let report = serde_json::json!({
        "system": SpinSystemJson::from_rates(&rates),
        "properties": reports,
        "expected": expected,
    });
    Ok(Outcome { command: "check-rates", passed, report, markdown: md })
}

#[derive(Serialize)]
struct Evolved {
    t: f64,
    measure: MeasureJson,
}

fn evolve(input: &str, measure: &str, times: &[f64]) -> Result<Outcome> {
    let rates = parse::<SpinSystemJson>(input)?.to_rates()?;
    let initial: MeasureJson = parse(measure)?;
    let mu = normalize(&initial.to_exact()?)?;
    if mu.sites() != rates.sites() {
        bail!("measure has {} sites, system has {}", mu.sites().n(), rates.sites().n());
    }
    let q = build_generator(&rates);
    let mut evolved = Vec::new();
    for &t in times {
        let m = if t == 0.0 {
            MeasureJson::from_exact(mu.sites(), mu.probs())
        } else {
            MeasureJson::from_float(&semigroup_apply(&q, &mu, t)?)
        };
        evolved.push(Evolved { t, measure: m });
    }
    let md = markdown::evolution(mu.sites().n(), &evolved.iter().map(|e| (e.t, &e.measure)).collect::<Vec<_>>());
    let report = serde_json::json!({
        "system": SpinSystemJson::from_rates(&rates),
        "initial": MeasureJson::from_exact(mu.sites(), mu.probs()),
        "evolved": evolved,
    });
    Ok(Outcome { command: "evolve", passed: true, report, markdown: md })
}

fn three_site_flag(v: &ThreeSiteVerdicts, p: Property) -> Option<bool> {
    match p {
        Property::Lattice => Some(v.lattice),
        Property::Dca => Some(v.dca),
        Property::DownwardFkg => Some(v.downward_fkg),
        Property::Associated => Some(v.associated),
        _ => None,
    }
}

fn classify3(input: &str, tolerance: f64, expect: &[String]) -> Result<Outcome> {
    let coords = parse::<ThreeSiteInput>(input)?.to_coords()?;
    let verdicts = classify(&coords, tolerance)?;
    let mut rows = Vec::new();
    for name in expect {
        let p = property_name(name)?;
        let Some(flag) = three_site_flag(&verdicts, p) else { bail!("{name} is not a three-site verdict") };
        rows.push((p.to_string(), flag));
    }
    let passed = rows.iter().all(|(_, ok)| *ok);
    let md = markdown::three_site(&verdicts, &rows);
    let report = serde_json::json!({
        "coordinates": NamedCoords::from_coords(&coords.normalized()?),
        "verdicts": verdicts,
        "expected": rows.iter().map(|(p, ok)| serde_json::json!({"property": p, "met": ok})).collect::<Vec<_>>(),
    });
    Ok(Outcome { command: "classify3", passed, report, markdown: md })
}

fn verify_theorem(input: &str, t: &[f64], budget: Option<usize>, seed: u64) -> Result<Outcome> {
    let mut spec: ExperimentSpec = parse(input)?;
    if !t.is_empty() {
        spec.times = t.to_vec();
    }
    if let Some(count) = budget {
        spec.count = count;
    }
    if seed != 0 {
        spec.seed = seed;
    }
    let outcome = verify_preservation(&spec, Parallelism::Parallel)?;
    let passed = outcome.violation_count() == 0;
    let md = markdown::experiment(&outcome);
    Ok(Outcome { command: "verify-theorem", passed, report: serde_json::to_value(&outcome)?, markdown: md })
}

fn search(input: &str, target: Target, budget: usize, seed: u64) -> Result<Outcome> {
    let rates = parse::<SpinSystemJson>(input)?.to_rates()?;
    let target = match target {
        Target::Association => SearchTarget::Association,
        Target::DownwardFkg => SearchTarget::DownwardFkg,
    };
    let outcome = search_counterexample(target, &rates, seed, budget)?;
    let passed = outcome.violation.is_none();
    let md = markdown::search(&outcome);
    Ok(Outcome { command: "search", passed, report: serde_json::to_value(&outcome)?, markdown: md })
}

fn list_fixtures() -> Result<Outcome> {
    let rows: Vec<(String, String)> =
        FIXTURES.iter().map(|f| (f.name.to_string(), format!("{:?}", f.kind).to_lowercase())).collect();
    let md = markdown::fixtures(&rows);
    let report = serde_json::json!({
        "fixtures": rows.iter().map(|(n, k)| serde_json::json!({"name": n, "kind": k})).collect::<Vec<_>>(),
    });
    Ok(Outcome { command: "fixtures", passed: true, report, markdown: md })
}
