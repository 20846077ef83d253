//! Random generators, named example systems and measures, preservation
//! experiments and counterexample search.

mod experiment;
pub mod fixtures;
mod search;

pub use experiment::{
    hypotheses_for, verify_preservation, Cell, ExperimentOutcome, ExperimentSpec, InitialFamily, Summary,
    DEFAULT_TIMES, PRESERVATION_TOLERANCE,
};
pub use search::{search_counterexample, DerivativeCertificate, SearchOutcome, SearchTarget, Violation};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::RateTable;
use crate::error::{Error, Result};
use crate::lattice::SiteSet;
use crate::measures::{satisfies_lattice, CheckOptions, Measure, WeightVector};
use crate::rational::{int, rat, Rational};
use crate::three_site::{classify, ThreeSiteCoords};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMode {
    /// Small integer weights, zeros allowed.
    Generic,
    StrictlyPositive,
    /// Satisfies the lattice condition.
    Lattice,
    Product,
    /// A product measure with small multiplicative noise; lands near the
    /// boundary of every property.
    NearProduct,
}

/// Attempts allowed for lattice-mode sampling.
pub const LATTICE_ATTEMPTS: usize = 1000;

/// Random exact weights on `n` sites. The same seed gives the same weights.
pub fn random_measure(seed: u64, n: usize, mode: MeasureMode) -> Result<WeightVector<Rational>> {
    let sites = SiteSet::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_measure_with(&mut rng, sites, mode)
}

pub fn random_measure_with(rng: &mut ChaCha8Rng, sites: SiteSet, mode: MeasureMode) -> Result<WeightVector<Rational>> {
    let size = sites.size();
    match mode {
        MeasureMode::Generic => loop {
            let w: Vec<Rational> = (0..size)
                .map(|_| if rng.random_bool(0.3) { int(0) } else { int(rng.random_range(1..10)) })
                .collect();
            if let Ok(v) = WeightVector::new(sites, w) {
                return Ok(v);
            }
        },
        MeasureMode::StrictlyPositive => {
            WeightVector::new(sites, (0..size).map(|_| int(rng.random_range(1..10))).collect())
        }
        MeasureMode::Product => {
            let p: Vec<Rational> = (0..sites.n()).map(|_| rat(rng.random_range(1..8), 8)).collect();
            Ok(Measure::product(sites, &p)?.as_weights())
        }
        MeasureMode::NearProduct => {
            let p: Vec<Rational> = (0..sites.n()).map(|_| rat(rng.random_range(1..8), 8)).collect();
            let base = Measure::product(sites, &p)?;
            let w = base
                .probs()
                .iter()
                .map(|q| q * rat(1000 + rng.random_range(-3..=3), 1000))
                .collect();
            WeightVector::new(sites, w)
        }
        MeasureMode::Lattice => {
            for _ in 0..LATTICE_ATTEMPTS {
                let w = log_supermodular_proposal(rng, sites);
                let wv = WeightVector::new(sites, w)?;
                if satisfies_lattice(&wv, &CheckOptions::default())?.is_holds() {
                    return Ok(wv);
                }
            }
            Err(Error::Budget(format!("no lattice measure in {LATTICE_ATTEMPTS} attempts")))
        }
    }
}

/// `w(η) = Π_{x∈η} r_x · Π_{pairs ⊆ η} s_{xy}` with `s >= 1`, plus an
/// occasional extra boost on larger sets.
fn log_supermodular_proposal(rng: &mut ChaCha8Rng, sites: SiteSet) -> Vec<Rational> {
    let n = sites.n();
    let r: Vec<Rational> = (0..n).map(|_| rat(rng.random_range(1..9), rng.random_range(1..9))).collect();
    let mut boosts: Vec<(usize, Rational)> = Vec::new();
    for a in 0..sites.size() {
        let k = (a as u32).count_ones();
        if k == 2 && rng.random_bool(0.6) || k > 2 && rng.random_bool(0.15) {
            boosts.push((a, int(1) + rat(rng.random_range(0..5), 4)));
        }
    }
    sites
        .configs()
        .map(|c| {
            let m = c.index();
            let base = (0..n).filter(|&x| c.get(x)).fold(int(1), |acc, x| acc * &r[x]);
            boosts.iter().filter(|(a, _)| a & m == *a).fold(base, |acc, (_, s)| acc * s)
        })
        .collect()
}

/// Law of `(1{π(i) ≠ i})_i` for a uniform permutation of `k` points.
pub fn derangement_measure(k: usize) -> Result<Measure<Rational>> {
    if !(2..=5).contains(&k) {
        return Err(Error::Input(format!("derangement size {k} outside 2..=5")));
    }
    let sites = SiteSet::new(k)?;
    let mut counts = vec![0i64; sites.size()];
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, 0, &mut |p| {
        let mask = (0..k).filter(|&i| p[i] != i).fold(0usize, |m, i| m | 1 << i);
        counts[mask] += 1;
    });
    Measure::from_weights(sites, counts.into_iter().map(int).collect())
}

fn permute(p: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, visit);
        p.swap(start, i);
    }
}

/// The two three-site weight vectors, unnormalized: `a = b_i = 1/6,
/// c_i = ε, d = 1/3` and `a = 1/3, b_i = ε, c_i = d = 1/6`.
pub fn epsilon_measures(eps: &Rational) -> Result<(WeightVector<Rational>, WeightVector<Rational>)> {
    if *eps <= int(0) || *eps >= rat(1, 36) {
        return Err(Error::Input(format!("ε = {eps} outside (0, 1/36)")));
    }
    let same = |a: Rational, b: Rational, c: Rational, d: Rational| ThreeSiteCoords {
        a,
        b: [b.clone(), b.clone(), b],
        c: [c.clone(), c.clone(), c],
        d,
    };
    let first = same(rat(1, 6), rat(1, 6), eps.clone(), rat(1, 3));
    let second = same(rat(1, 3), eps.clone(), rat(1, 6), rat(1, 6));
    let v1 = classify(&first, 0.0)?;
    if v1.lattice || !v1.dca || !v1.associated {
        return Err(Error::UnintendedVerdicts(format!("first measure: {v1:?}")));
    }
    let v2 = classify(&second, 0.0)?;
    if !v2.associated || v2.downward_fkg {
        return Err(Error::UnintendedVerdicts(format!("second measure: {v2:?}")));
    }
    Ok((first.to_weight_vector()?, second.to_weight_vector()?))
}

/// Path `0 - 1 - .. - (n-1)`.
pub fn path_edges(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (i - 1, i)).collect()
}

pub fn contact_path(n: usize, lambda: &Rational, delta: &Rational) -> Result<RateTable> {
    RateTable::contact(SiteSet::new(n)?, &path_edges(n), lambda, delta)
}

/// Births only when every other site is occupied, deaths only when every
/// other site is empty.
pub fn all_or_nothing_system(n: usize) -> Result<RateTable> {
    let sites = SiteSet::new(n)?;
    let others_all = move |x: usize, c: crate::lattice::Config, v: bool| (0..n).filter(|&y| y != x).all(|y| c.get(y) == v);
    RateTable::from_fn(
        sites,
        move |x, c| if others_all(x, c, true) { int(1) } else { int(0) },
        move |x, c| if others_all(x, c, false) { int(1) } else { int(0) },
    )
}

/// `β(x, η) = 1 - η(y)` on two sites, no deaths.
pub fn decreasing_birth_pair() -> RateTable {
    RateTable::from_fn(
        SiteSet::new(2).expect("two sites"),
        |x, c| if c.get(1 - x) { int(0) } else { int(1) },
        |_, _| int(0),
    )
    .expect("valid rates")
}

/// `β(0, η) = η(1)η(2)` on three sites, every other rate zero.
pub fn monomial_birth_triple() -> RateTable {
    RateTable::from_fn(
        SiteSet::new(3).expect("three sites"),
        |x, c| if x == 0 && c.get(1) && c.get(2) { int(1) } else { int(0) },
        |_, _| int(0),
    )
    .expect("valid rates")
}

/// Births at `u` only, built from nonnegative coefficients on subsets of the
/// other sites (additive) or, with probability one half, a random increasing
/// submodular table found by rejection.
pub fn random_single_site_births(seed: u64, n: usize) -> Result<(RateTable, usize)> {
    let sites = SiteSet::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = rng.random_range(0..n);
    let others: Vec<usize> = (0..sites.size()).filter(|a| a >> u & 1 == 0 && *a != 0).collect();
    let additive = |rng: &mut ChaCha8Rng| -> Vec<Rational> {
        let c: Vec<(usize, Rational)> = others
            .iter()
            .filter_map(|&a| {
                let keep = rng.random_bool(0.5);
                let v = rat(rng.random_range(1..5), 2);
                keep.then_some((a, v))
            })
            .collect();
        sites
            .configs()
            .map(|eta| c.iter().filter(|(a, _)| a & eta.index() != 0).map(|(_, v)| v.clone()).sum())
            .collect()
    };
    let mut table = additive(&mut rng);
    if rng.random_bool(0.5) {
        for _ in 0..500 {
            // Capped additive table.
            let base = additive(&mut rng);
            let cap = int(rng.random_range(1..4));
            let t: Vec<Rational> = base.into_iter().map(|v| if v > cap { cap.clone() } else { v }).collect();
            let r = births_at(sites, u, &t)?;
            if crate::dynamics::submodular_births(&r).is_holds() && !crate::dynamics::additive_births(&r).is_holds() {
                table = t;
                break;
            }
        }
    }
    Ok((births_at(sites, u, &table)?, u))
}

fn births_at(sites: SiteSet, u: usize, table: &[Rational]) -> Result<RateTable> {
    RateTable::from_fn(sites, |x, c| if x == u { table[c.index()].clone() } else { int(0) }, |_, _| int(0))
}
