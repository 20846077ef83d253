//! Association by exhaustive up-set pair sweep.
//!
//! `cov(f, g) >= 0` for all increasing `f, g` reduces, through the layer-cake
//! decomposition and bilinearity, to `cov(1_U, 1_V) >= 0` for all up-sets.
//! Only incomparable nontrivial pairs are visited.
//!
//! With integer weights `w` (common denominator) and total `T` the sweep
//! evaluates `T·w(U∩V) - w(U)·w(V)` in `i128` when it fits, otherwise in
//! big integers.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::Zero;

use super::{CheckOptions, Measure, Property, PropertyReport, Witness};
use crate::error::{Error, Result};
use crate::lattice::{enumerate_up_sets, SiteSet, UpSet};
use crate::par::{map_collect, Parallelism};
use crate::rational::{Scalar, SweepWeights};

trait SweepNum: Clone + Send + Sync {
    fn zero() -> Self;
    fn add_assign(&mut self, other: &Self);
    /// `total·uv - u·v`
    fn key(total: &Self, uv: &Self, u: &Self, v: &Self) -> Self;
    fn lt(&self, other: &Self) -> bool;
}

impl SweepNum for i128 {
    fn zero() -> Self {
        0
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn key(total: &Self, uv: &Self, u: &Self, v: &Self) -> Self {
        total * uv - u * v
    }
    fn lt(&self, other: &Self) -> bool {
        self < other
    }
}

impl SweepNum for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn key(total: &Self, uv: &Self, u: &Self, v: &Self) -> Self {
        total * uv - u * v
    }
    fn lt(&self, other: &Self) -> bool {
        self < other
    }
}

impl SweepNum for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn key(total: &Self, uv: &Self, u: &Self, v: &Self) -> Self {
        total * uv - u * v
    }
    fn lt(&self, other: &Self) -> bool {
        self < other
    }
}

#[inline]
fn masked_sum<K: SweepNum>(w: &[K], mut mask: u64) -> K {
    let mut acc = K::zero();
    while mask != 0 {
        acc.add_assign(&w[mask.trailing_zeros() as usize]);
        mask &= mask - 1;
    }
    acc
}

/// Result of a sweep, as indices into the nontrivial up-set list.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct SweepResult {
    /// Lexicographically first violating pair.
    pub first_violation: Option<(usize, usize)>,
    /// Pair attaining the minimum key (earliest on ties). Only meaningful
    /// when the scan was complete.
    pub minimum: Option<(usize, usize)>,
}

struct Row<K> {
    violation: Option<usize>,
    minimum: Option<(K, usize)>,
}

fn sweep<K: SweepNum>(
    weights: &[K],
    masks: &[u64],
    threshold: impl Fn(&K) -> K + Sync,
    full: bool,
    par: Parallelism,
) -> SweepResult {
    let total = weights.iter().fold(K::zero(), |mut acc, w| {
        acc.add_assign(w);
        acc
    });
    let limit = threshold(&total);
    let mass: Vec<K> = masks.iter().map(|&m| masked_sum(weights, m)).collect();
    let m = masks.len();
    let best = AtomicUsize::new(usize::MAX);

    let scan_row = |i: usize| -> Row<K> {
        let mut row = Row { violation: None, minimum: None };
        if !full && i > best.load(Ordering::Relaxed) {
            return row;
        }
        let a = masks[i];
        for j in i + 1..m {
            let b = masks[j];
            let meet = a & b;
            if meet == a || meet == b {
                continue;
            }
            let key = K::key(&total, &masked_sum(weights, meet), &mass[i], &mass[j]);
            if key.lt(&limit) && row.violation.is_none() {
                row.violation = Some(j);
                best.fetch_min(i, Ordering::Relaxed);
                if !full {
                    row.minimum = Some((key, j));
                    break;
                }
            }
            if row.minimum.as_ref().is_none_or(|(k, _)| key.lt(k)) {
                row.minimum = Some((key, j));
            }
        }
        row
    };

    // In early mode rows past a known violation are skipped; the earliest
    // row still yields the lexicographically first violating pair.
    let rows = map_collect(0..m, par, scan_row);
    let mut result = SweepResult::default();
    let mut best_key: Option<K> = None;
    for (i, row) in rows.into_iter().enumerate() {
        if result.first_violation.is_none() {
            result.first_violation = row.violation.map(|j| (i, j));
        }
        if let Some((k, j)) = row.minimum {
            if best_key.as_ref().is_none_or(|b| k.lt(b)) {
                best_key = Some(k);
                result.minimum = Some((i, j));
            }
        }
    }
    result
}

/// Number of pairs an association check on `n` sites visits at most.
pub fn association_pair_count(sites: SiteSet, allow_six: bool) -> Result<u64> {
    let family = enumerate_up_sets(sites, allow_six)?;
    let m = family.len() as u64 - 2;
    Ok(m * m.saturating_sub(1) / 2)
}

/// `μ(U∩V) - μ(U)μ(V)`.
pub fn covariance_of_up_sets<T: Scalar>(mu: &Measure<T>, u: UpSet, v: UpSet) -> T {
    mu.prob_event(u.members() & v.members()) - mu.prob_up_set(u) * mu.prob_up_set(v)
}

/// Nontrivial up-sets (neither empty nor everything), in enumeration order.
pub(crate) fn nontrivial_masks(sites: SiteSet, allow_six: bool) -> Result<Vec<u64>> {
    let family = enumerate_up_sets(sites, allow_six)?;
    let full = sites.all_configs_mask();
    Ok(family.masks().iter().copied().filter(|&m| m != 0 && m != full).collect())
}

pub(crate) struct AssociationScan {
    pub masks: Vec<u64>,
    pub result: SweepResult,
}

pub(crate) fn scan_association<T: Scalar>(mu: &Measure<T>, opts: &CheckOptions) -> Result<AssociationScan> {
    let sites = mu.sites();
    let pairs = association_pair_count(sites, opts.allow_six)?;
    if pairs > opts.max_pairs {
        return Err(Error::Budget(format!(
            "association check needs {pairs} up-set pairs, budget is {}",
            opts.max_pairs
        )));
    }
    let masks = nontrivial_masks(sites, opts.allow_six)?;
    let par = opts.parallelism;
    let full = opts.full_margin;
    let result = match T::sweep_weights(mu.probs()) {
        SweepWeights::Small(w) => sweep(&w, &masks, |_| 0i128, full, par),
        SweepWeights::Big(w) => sweep(&w, &masks, |_| <BigInt as Zero>::zero(), full, par),
        SweepWeights::Float(w) => {
            let tol = opts.tolerance;
            sweep(&w, &masks, move |t: &f64| -tol * t * t, full, par)
        }
    };
    Ok(AssociationScan { masks, result })
}

/// Exhaustive association check. On failure the witness is the
/// lexicographically first violating up-set pair, independent of the number
/// of workers.
pub fn is_associated<T: Scalar>(mu: &Measure<T>, opts: &CheckOptions) -> Result<PropertyReport> {
    let sites = mu.sites();
    let scan = scan_association(mu, opts)?;
    let up = |i: usize| UpSet::from_raw(sites, scan.masks[i]);
    if let Some((i, j)) = scan.result.first_violation {
        let (u, v) = (up(i), up(j));
        let (a, b) = if opts.full_margin { scan.result.minimum.unwrap_or((i, j)) } else { (i, j) };
        let margin = covariance_of_up_sets(mu, up(a), up(b)).to_margin();
        let report = PropertyReport::fails(Property::Associated, Witness::UpSetPair { u, v }, Some(margin));
        return Ok(report);
    }
    let margin = scan
        .result
        .minimum
        .map(|(i, j)| covariance_of_up_sets(mu, up(i), up(j)).to_margin());
    Ok(PropertyReport::holds(Property::Associated, margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::RealFunction;
    use crate::lattice::decompose_increasing;
    use crate::measures::{covariance, Verdict};
    use crate::rational::{int, rat, Rational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(n: usize) -> SiteSet {
        SiteSet::new(n).unwrap()
    }

    /// Oracle: all pairs of up-sets, no pruning, exact.
    fn oracle_first_violation(mu: &Measure<Rational>) -> Option<(UpSet, UpSet)> {
        let fam = enumerate_up_sets(mu.sites(), false).unwrap();
        let ups: Vec<UpSet> = fam.iter().collect();
        for (a, &u) in ups.iter().enumerate() {
            for &v in &ups[a + 1..] {
                if covariance_of_up_sets(mu, u, v) < int(0) {
                    return Some((u, v));
                }
            }
        }
        None
    }

    #[test]
    fn two_site_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let w: Vec<Rational> = (0..4).map(|_| int(rng.random_range(0..6))).collect();
            let Ok(mu) = Measure::from_weights(s(2), w.clone()) else { continue };
            let report = is_associated(&mu, &CheckOptions::default()).unwrap();
            let closed = w[3].clone() * w[0].clone() >= w[1].clone() * w[2].clone();
            assert_eq!(report.is_holds(), closed, "{w:?}");
        }
    }

    #[test]
    fn product_measures_are_associated() {
        let mu = Measure::product(s(4), &[rat(1, 3), rat(1, 2), rat(7, 8), rat(1, 9)]).unwrap();
        let r = is_associated(&mu, &CheckOptions { full_margin: true, ..Default::default() }).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.margin, Some(int(0).to_margin()));
    }

    #[test]
    fn agrees_with_unpruned_oracle_and_is_lexicographic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=4 {
            for _ in 0..40 {
                let w: Vec<Rational> = (0..1 << n).map(|_| int(rng.random_range(0..5))).collect();
                let Ok(mu) = Measure::from_weights(s(n), w) else { continue };
                let oracle = oracle_first_violation(&mu);
                for par in [Parallelism::Sequential, Parallelism::Parallel] {
                    let opts = CheckOptions { parallelism: par, ..Default::default() };
                    let r = is_associated(&mu, &opts).unwrap();
                    match (&oracle, &r.witness) {
                        (None, None) => assert!(r.is_holds()),
                        (Some((u, v)), Some(Witness::UpSetPair { u: a, v: b })) => {
                            assert_eq!((u, v), (a, b));
                            assert!(covariance_of_up_sets(&mu, *a, *b) < int(0));
                        }
                        other => panic!("mismatch {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn full_margin_is_minimum_and_worker_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let w: Vec<Rational> = (0..8).map(|_| int(rng.random_range(1..9))).collect();
            let mu = Measure::from_weights(s(3), w).unwrap();
            let fam = enumerate_up_sets(s(3), false).unwrap();
            let min = fam
                .iter()
                .flat_map(|u| fam.iter().map(move |v| (u, v)))
                .filter(|(u, v)| !u.is_subset(*v) && !v.is_subset(*u))
                .map(|(u, v)| covariance_of_up_sets(&mu, u, v))
                .min()
                .unwrap();
            let reports: Vec<_> = [Parallelism::Sequential, Parallelism::Parallel]
                .iter()
                .map(|&p| {
                    let o = CheckOptions { full_margin: true, parallelism: p, ..Default::default() };
                    is_associated(&mu, &o).unwrap()
                })
                .collect();
            assert_eq!(reports[0], reports[1]);
            assert_eq!(reports[0].margin, Some(min.to_margin()));
        }
    }

    #[test]
    fn float_and_exact_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let w: Vec<Rational> = (0..8).map(|_| int(rng.random_range(1..20))).collect();
            let mu = Measure::from_weights(s(3), w).unwrap();
            let exact = is_associated(&mu, &CheckOptions::default()).unwrap();
            let float = is_associated(&mu.to_f64(), &CheckOptions::default()).unwrap();
            assert_eq!(exact.verdict, float.verdict);
        }
    }

    #[test]
    fn big_integer_path() {
        // Denominators large enough to leave the i128 fast path.
        let primes = [1009, 1013, 1019, 1021, 1031, 1033, 1039, 1049];
        let w: Vec<Rational> = primes.iter().map(|&p| rat(1, p)).collect();
        assert!(matches!(Rational::sweep_weights(&w), SweepWeights::Big(_)));
        let mu = Measure::from_weights(s(3), w).unwrap();
        let r = is_associated(&mu, &CheckOptions::default()).unwrap();
        let oracle = oracle_first_violation(&mu);
        assert_eq!(r.is_holds(), oracle.is_none());
    }

    #[test]
    fn budget_is_enforced() {
        let mu = Measure::<Rational>::uniform(s(4));
        let opts = CheckOptions { max_pairs: 10, ..Default::default() };
        assert!(matches!(is_associated(&mu, &opts), Err(Error::Budget(_))));
    }

    #[test]
    fn up_set_covariances_cover_increasing_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let w: Vec<Rational> = (0..8).map(|_| int(rng.random_range(0..6))).collect();
            let Ok(mu) = Measure::from_weights(s(3), w) else { continue };
            let f = RealFunction::from_fn(s(3), |c| int(c.ones() as i64 + 3 * (c.mask() & 3 == 3) as i64));
            let g = RealFunction::from_fn(s(3), |c| int(c.get(0) as i64 + 2 * (c.index() == 7) as i64));
            let (df, dg) = (decompose_increasing(&f).unwrap(), decompose_increasing(&g).unwrap());
            let mut via_up_sets = int(0);
            for (a, u) in &df.terms {
                for (b, v) in &dg.terms {
                    via_up_sets += a.clone() * b.clone() * covariance_of_up_sets(&mu, *u, *v);
                }
            }
            let cov = covariance(&mu, &f, &g).unwrap();
            assert_eq!(cov, via_up_sets);
            if cov < int(0) {
                assert!(is_associated(&mu, &CheckOptions::default()).unwrap().is_fails());
            }
        }
    }
}
