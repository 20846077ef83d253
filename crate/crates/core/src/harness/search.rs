use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_generator, derivative_at_zero, semigroup_apply, Functional, Generator, RateTable, SpinSystemJson};
use crate::error::Result;
use crate::lattice::SiteSet;
use crate::measures::{
    is_associated, is_downward_fkg, normalize, zero_event, CheckOptions, Measure, PropertyReport, Verdict,
};
use crate::rational::{format_rational, rat, serde_rational, Rational};

use super::{random_measure_with, MeasureMode, PRESERVATION_TOLERANCE};

/// Which preservation statement the search tries to break.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchTarget {
    /// Association of `μS(t)` from product measures; fails only for
    /// non-attractive rates.
    Association,
    /// Downward FKG of `μS(t)` from product measures; fails when births are
    /// not increasing or not submodular.
    DownwardFkg,
}

/// Exact negative derivative at `t = 0` of a determinant that vanishes at
/// the product measure with the given marginals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCertificate {
    pub marginals: Vec<String>,
    pub zeros: Vec<usize>,
    pub x: usize,
    pub y: usize,
    #[serde(with = "serde_rational")]
    pub derivative: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub initial: Vec<String>,
    pub t: f64,
    pub report: PropertyReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub format_version: u32,
    pub target: SearchTarget,
    pub rates: SpinSystemJson,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<DerivativeCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
    pub derivatives_evaluated: usize,
    pub evolutions_evaluated: usize,
}

/// Small times tried after a derivative certificate is found.
const SHORT_TIMES: [f64; 7] = [1e-3, 1e-2, 0.05, 0.1, 0.25, 0.5, 1.0];

const GRID_TIMES: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

fn coordinate_event(sites: SiteSet, x: usize, value: bool) -> u64 {
    sites.configs().filter(|c| c.get(x) == value).fold(0, |acc, c| acc | 1 << c.index())
}

/// Grid of product marginals with entries in `{1/8, .., 7/8}`, in
/// lexicographic order, capped at `limit` points.
fn product_grid(n: usize, limit: usize) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    let mut idx = vec![1i64; n];
    loop {
        out.push(idx.iter().map(|&k| rat(k, 8)).collect());
        if out.len() >= limit {
            return out;
        }
        let mut i = 0;
        while i < n && idx[i] == 7 {
            idx[i] = 1;
            i += 1;
        }
        if i == n {
            return out;
        }
        idx[i] += 1;
    }
}

/// Determinants `μ(11)μ(00) - μ(10)μ(01)` of two coordinates restricted to
/// `η ≡ 0` on `zeros`; each vanishes at a product measure.
/// Zero set, coordinate pair and functional.
type Candidate = (Vec<usize>, usize, usize, Functional);

fn determinants(sites: SiteSet, target: SearchTarget) -> Result<Vec<Candidate>> {
    let n = sites.n();
    let mut out = Vec::new();
    let zero_sets: Vec<u8> = match target {
        SearchTarget::Association => vec![0],
        SearchTarget::DownwardFkg => (0..=sites.full_mask()).collect(),
    };
    for z in zero_sets {
        let e = zero_event(sites, z);
        for x in 0..n {
            for y in x + 1..n {
                if z >> x & 1 == 1 || z >> y & 1 == 1 {
                    continue;
                }
                let ev = |a: bool, b: bool| e & coordinate_event(sites, x, a) & coordinate_event(sites, y, b);
                let f = Functional::determinant(sites, ev(true, true), ev(false, false), ev(true, false), ev(false, true))?;
                let zeros = (0..n).filter(|s| z >> s & 1 == 1).collect();
                out.push((zeros, x, y, f));
            }
        }
    }
    Ok(out)
}

fn evaluate(target: SearchTarget, mu: &Measure<f64>) -> Result<PropertyReport> {
    let opts = CheckOptions { tolerance: PRESERVATION_TOLERANCE, ..Default::default() };
    match target {
        SearchTarget::Association => is_associated(mu, &opts),
        SearchTarget::DownwardFkg => is_downward_fkg(mu, &opts),
    }
}

fn evolve_and_check(
    q: &Generator,
    target: SearchTarget,
    mu: &Measure<Rational>,
    times: &[f64],
    evaluated: &mut usize,
) -> Result<Option<Violation>> {
    for &t in times {
        *evaluated += 1;
        let report = evaluate(target, &semigroup_apply(q, mu, t)?)?;
        if report.is_fails() {
            let initial = mu.probs().iter().map(format_rational).collect();
            return Ok(Some(Violation { initial, t, report }));
        }
    }
    Ok(None)
}

/// Looks for an initial measure and a time at which the target property is
/// lost. Exact derivatives at `t = 0` over a grid of product measures come
/// first; a negative one is then confirmed by evolving that measure. Without
/// a certificate, random product and lattice measures are evolved on a time
/// grid until `budget` evolutions are spent.
pub fn search_counterexample(target: SearchTarget, rates: &RateTable, seed: u64, budget: usize) -> Result<SearchOutcome> {
    let sites = rates.sites();
    let q = build_generator(rates);
    let mut outcome = SearchOutcome {
        format_version: crate::io::FORMAT_VERSION,
        target,
        rates: SpinSystemJson::from_rates(rates),
        verdict: Verdict::SearchExhausted,
        certificate: None,
        violation: None,
        derivatives_evaluated: 0,
        evolutions_evaluated: 0,
    };
    let funcs = determinants(sites, target)?;
    'grid: for marginals in product_grid(sites.n(), budget.max(1)) {
        let mu = Measure::product(sites, &marginals)?;
        for (zeros, x, y, f) in &funcs {
            outcome.derivatives_evaluated += 1;
            let d = derivative_at_zero(&q, &mu, f)?;
            if d < rat(0, 1) {
                outcome.certificate = Some(DerivativeCertificate {
                    marginals: marginals.iter().map(format_rational).collect(),
                    zeros: zeros.clone(),
                    x: *x,
                    y: *y,
                    derivative: d,
                });
                if let Some(v) = evolve_and_check(&q, target, &mu, &SHORT_TIMES, &mut outcome.evolutions_evaluated)? {
                    outcome.violation = Some(v);
                    outcome.verdict = Verdict::Fails;
                    return Ok(outcome);
                }
                break 'grid;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while outcome.evolutions_evaluated < budget {
        let mode = if rng.random_bool(0.5) { MeasureMode::Product } else { MeasureMode::Lattice };
        let mu = normalize(&random_measure_with(&mut rng, sites, mode)?)?;
        if let Some(v) = evolve_and_check(&q, target, &mu, &GRID_TIMES, &mut outcome.evolutions_evaluated)? {
            outcome.violation = Some(v);
            outcome.verdict = Verdict::Fails;
            return Ok(outcome);
        }
    }
    Ok(outcome)
}

impl SearchOutcome {
    /// Recomputes the violation from its serialized form.
    pub fn reverify(&self) -> Result<bool> {
        let Some(v) = &self.violation else { return Ok(false) };
        let rates = self.rates.to_rates()?;
        let w = v.initial.iter().map(|s| crate::rational::parse_rational(s)).collect::<Result<Vec<_>>>()?;
        let mu = Measure::new(rates.sites(), w)?;
        let evolved = semigroup_apply(&build_generator(&rates), &mu, v.t)?;
        let report = evaluate(self.target, &evolved)?;
        Ok(report.is_fails() && report.margin.map(|m| m.to_f64()) == v.report.margin.as_ref().map(|m| m.to_f64()))
    }
}
