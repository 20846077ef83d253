use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{random_measure_with, MeasureMode};
use crate::dynamics::{
    additive_births, build_generator, constant_deaths, is_attractive, semigroup_apply_with_tail,
    submodular_births, RateTable, SpinSystemJson, RETRY_TAIL, TAIL,
};
use crate::error::{Error, Result};
use crate::lattice::{Config, SiteSet};
use crate::measures::{
    dca_falsify, is_associated, is_downward_fkg, satisfies_lattice, CheckOptions, Measure, Property, PropertyReport,
    TiltFamily, TiltSampler,
};
use crate::par::{map_collect, Parallelism};
use crate::rational::{format_rational, Rational, RationalRepr};

pub const DEFAULT_TIMES: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

/// Margin tolerance for evolved measures.
pub const PRESERVATION_TOLERANCE: f64 = 1e-9;

fn default_times() -> Vec<f64> {
    DEFAULT_TIMES.to_vec()
}

fn default_count() -> usize {
    1
}

fn default_tilts() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InitialFamily {
    Explicit { weights: Vec<RationalRepr> },
    PointMass { config: String },
    Product,
    RandomLattice,
    RandomGeneric,
    StrictlyPositive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub system: SpinSystemJson,
    pub initial: InitialFamily,
    pub property: Property,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Number of initial measures drawn from a random family.
    #[serde(default = "default_count")]
    pub count: usize,
    /// Sampled tilts per cell when the property is DCA on four or more
    /// sites.
    #[serde(default = "default_tilts")]
    pub tilt_budget: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub measure: usize,
    pub t: f64,
    pub report: PropertyReport,
    /// Set when the first evaluation failed but the recomputation with a
    /// tighter truncation passed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub rechecked: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Summary {
    AllHold,
    /// Everything needed to recompute the failing cell.
    Violation {
        rates: SpinSystemJson,
        initial: Vec<String>,
        t: f64,
        report: PropertyReport,
        /// Whether the system satisfies the preservation hypotheses, making
        /// this an inconsistency rather than an observation.
        inconsistent: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub format_version: u32,
    pub property: Property,
    pub hypotheses: Vec<PropertyReport>,
    pub hypotheses_hold: bool,
    pub initial_measures: Vec<Vec<String>>,
    /// Initial measures lacking the property, by draw index.
    pub skipped: Vec<usize>,
    pub cells: Vec<Cell>,
    pub summary: Summary,
}

impl ExperimentOutcome {
    pub fn violation_count(&self) -> usize {
        self.cells.iter().filter(|c| c.report.is_fails()).count()
    }

    /// A violation on a system meeting the hypotheses.
    pub fn is_inconsistent(&self) -> bool {
        matches!(self.summary, Summary::Violation { inconsistent: true, .. })
    }
}

/// Rate conditions under which the property is preserved: attractive for
/// association; independent flips for the lattice condition; constant deaths
/// with additive births for downward FKG; constant deaths with increasing,
/// submodular births for DCA.
pub fn hypotheses_for(property: Property, r: &RateTable) -> Result<Vec<PropertyReport>> {
    let attractive = is_attractive(r);
    Ok(match property {
        Property::Associated => vec![attractive],
        Property::Lattice => vec![crate::dynamics::independent_flips_report(r)],
        Property::DownwardFkg => vec![constant_deaths(r), additive_births(r)],
        Property::Dca => vec![constant_deaths(r), attractive, submodular_births(r)],
        other => return Err(Error::Input(format!("{other} is not a measure property"))),
    })
}

fn check<T: crate::rational::Scalar>(
    property: Property,
    mu: &Measure<T>,
    seed: u64,
    tilts: usize,
    opts: &CheckOptions,
) -> Result<PropertyReport> {
    match property {
        Property::Associated => is_associated(mu, opts),
        Property::Lattice => satisfies_lattice(&mu.as_weights(), opts),
        Property::DownwardFkg => is_downward_fkg(mu, opts),
        Property::Dca => {
            let mut sampler = TiltSampler::new(seed, TiltFamily::Mixed);
            dca_falsify(mu, &mut sampler, tilts, opts)
        }
        other => Err(Error::Input(format!("{other} is not a measure property"))),
    }
}

fn initial_measures(spec: &ExperimentSpec, sites: SiteSet) -> Result<Vec<Measure<Rational>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draw = |rng: &mut ChaCha8Rng, mode| -> Result<Vec<Measure<Rational>>> {
        (0..spec.count)
            .map(|_| crate::measures::normalize(&random_measure_with(rng, sites, mode)?))
            .collect()
    };
    match &spec.initial {
        InitialFamily::Explicit { weights } => {
            let w = weights.iter().map(|r| r.to_rational()).collect::<Result<Vec<_>>>()?;
            Ok(vec![Measure::from_weights(sites, w)?])
        }
        InitialFamily::PointMass { config } => {
            let c = Config::parse(config)?;
            sites.same_as(c.sites())?;
            Ok(vec![Measure::point_mass(c)])
        }
        InitialFamily::Product => draw(&mut rng, MeasureMode::Product),
        InitialFamily::RandomLattice => draw(&mut rng, MeasureMode::Lattice),
        InitialFamily::RandomGeneric => draw(&mut rng, MeasureMode::Generic),
        InitialFamily::StrictlyPositive => draw(&mut rng, MeasureMode::StrictlyPositive),
    }
}

/// Evolves each initial measure having the property and re-checks the
/// property at every grid time. Float checks use [`PRESERVATION_TOLERANCE`];
/// a failing cell is recomputed with the tighter truncation before it
/// counts.
pub fn verify_preservation(spec: &ExperimentSpec, par: Parallelism) -> Result<ExperimentOutcome> {
    if let Some(t) = spec.times.iter().find(|t| t.is_nan() || **t < 0.0 || !t.is_finite()) {
        return Err(Error::NegativeTime(*t));
    }
    let rates = spec.system.to_rates()?;
    let sites = rates.sites();
    let hypotheses = hypotheses_for(spec.property, &rates)?;
    let hypotheses_hold = hypotheses.iter().all(|h| h.is_holds());
    let q = build_generator(&rates);
    let exact_opts = CheckOptions { parallelism: Parallelism::Sequential, ..Default::default() };
    let float_opts = CheckOptions { tolerance: PRESERVATION_TOLERANCE, ..exact_opts.clone() };

    let measures = initial_measures(spec, sites)?;
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for (i, mu) in measures.iter().enumerate() {
        if check(spec.property, mu, spec.seed ^ i as u64, spec.tilt_budget, &exact_opts)?.is_fails() {
            skipped.push(i);
        } else {
            kept.push(i);
        }
    }
    let jobs: Vec<(usize, f64)> = kept.iter().flat_map(|&i| spec.times.iter().map(move |&t| (i, t))).collect();
    let cells = map_collect(0..jobs.len(), par, |k| -> Result<Cell> {
        let (i, t) = jobs[k];
        let seed = spec.seed ^ (i as u64) << 16 ^ k as u64;
        let evolved = semigroup_apply_with_tail(&q, &measures[i], t, TAIL)?;
        let report = check(spec.property, &evolved, seed, spec.tilt_budget, &float_opts)?;
        if !report.is_fails() {
            return Ok(Cell { measure: i, t, report, rechecked: false });
        }
        let tight = semigroup_apply_with_tail(&q, &measures[i], t, RETRY_TAIL)?;
        let again = check(spec.property, &tight, seed, spec.tilt_budget, &float_opts)?;
        let rechecked = !again.is_fails();
        Ok(Cell { measure: i, t, report: again, rechecked })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let summary = match cells.iter().find(|c| c.report.is_fails()) {
        None => Summary::AllHold,
        Some(c) => Summary::Violation {
            rates: SpinSystemJson::from_rates(&rates),
            initial: measures[c.measure].probs().iter().map(format_rational).collect(),
            t: c.t,
            report: c.report.clone(),
            inconsistent: hypotheses_hold,
        },
    };
    Ok(ExperimentOutcome {
        format_version: crate::io::FORMAT_VERSION,
        property: spec.property,
        hypotheses,
        hypotheses_hold,
        initial_measures: measures.iter().map(|m| m.probs().iter().map(format_rational).collect()).collect(),
        skipped,
        cells,
        summary,
    })
}
