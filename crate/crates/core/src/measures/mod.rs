//! Probability measures on `{0,1}^S` and the correlation-property checkers:
//! FKG lattice, DCA, downward FKG, association, plus stochastic order.

mod association;
mod dca;
mod domination;
mod downward;
mod lattice_condition;
mod report;

pub use association::{association_pair_count, covariance_of_up_sets, is_associated};
pub use dca::{dca_falsify, dca_search, Tilt, TiltFamily, TiltSampler, TILT_SCREEN_TOLERANCE};
pub use domination::stochastically_dominates;
pub use downward::is_downward_fkg;
pub use lattice_condition::satisfies_lattice;
pub use report::{Property, PropertyReport, Verdict, Witness};


use crate::error::{Error, Result};
use crate::lattice::{Config, RealFunction, SiteSet, UpSet};
use crate::par::Parallelism;
use crate::rational::{Rational, Scalar};

/// Default tolerance on margins for float measures.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Normalization slack accepted for float measures.
pub const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

/// Default cap on the number of up-set pairs one association check may visit.
/// Covers five sites (7579 nontrivial up-sets, about 28.7M pairs).
pub const DEFAULT_MAX_PAIRS: u64 = 30_000_000;

/// Knobs shared by the exhaustive checkers.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Margin tolerance for float measures; exact measures ignore it.
    pub tolerance: f64,
    pub max_pairs: u64,
    /// Permit the 6-site up-set enumeration.
    pub allow_six: bool,
    /// Keep scanning after the first violation to report the true minimum.
    pub full_margin: bool,
    pub parallelism: Parallelism,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tolerance: FLOAT_TOLERANCE,
            max_pairs: DEFAULT_MAX_PAIRS,
            allow_six: false,
            full_margin: false,
            parallelism: Parallelism::default(),
        }
    }
}

/// Nonnegative weights, one per configuration, with positive total.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T> {
    sites: SiteSet,
    weights: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(sites: SiteSet, weights: Vec<T>) -> Result<Self> {
        if weights.len() != sites.size() {
            return Err(Error::Length { expected: sites.size(), got: weights.len() });
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if *w < T::zero() {
                return Err(Error::NegativeWeight(i));
            }
        }
        if weights.iter().all(|w| w.is_zero()) {
            return Err(Error::ZeroTotal);
        }
        Ok(WeightVector { sites, weights })
    }

    pub fn sites(&self) -> SiteSet {
        self.sites
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn total(&self) -> T {
        sum(&self.weights)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(|w| *w > T::zero())
    }

    pub fn scale(&self, c: &T) -> Self {
        WeightVector {
            sites: self.sites,
            weights: self.weights.iter().map(|w| w.clone() * c.clone()).collect(),
        }
    }
}

/// A probability measure: weights summing to one (exactly for rationals,
/// within [`FLOAT_SUM_TOLERANCE`] for floats).
#[derive(Clone, Debug, PartialEq)]
pub struct Measure<T> {
    sites: SiteSet,
    probs: Vec<T>,
}

pub type ExactMeasure = Measure<Rational>;

pub fn normalize<T: Scalar>(w: &WeightVector<T>) -> Result<Measure<T>> {
    let total = w.total();
    if total.is_zero() {
        return Err(Error::ZeroTotal);
    }
    Ok(Measure {
        sites: w.sites,
        probs: w.weights.iter().map(|x| x.clone() / total.clone()).collect(),
    })
}

fn sum<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

impl<T: Scalar> Measure<T> {
    /// Accepts already-normalized probabilities.
    pub fn new(sites: SiteSet, probs: Vec<T>) -> Result<Self> {
        let w = WeightVector::new(sites, probs)?;
        let total = w.total();
        let ok = if T::EXACT {
            total.is_one()
        } else {
            (total.to_f64() - 1.0).abs() <= FLOAT_SUM_TOLERANCE
        };
        if !ok {
            return Err(Error::NotNormalized(format!("{total:?}")));
        }
        Ok(Measure { sites, probs: w.weights })
    }

    pub fn from_weights(sites: SiteSet, weights: Vec<T>) -> Result<Self> {
        normalize(&WeightVector::new(sites, weights)?)
    }

    pub fn point_mass(c: Config) -> Self {
        let sites = c.sites();
        let mut probs = vec![T::zero(); sites.size()];
        probs[c.index()] = T::one();
        Measure { sites, probs }
    }

    pub fn uniform(sites: SiteSet) -> Self {
        let p = T::one() / T::from_i64(sites.size() as i64);
        Measure { sites, probs: vec![p; sites.size()] }
    }

    /// Product measure with `P(η(x) = 1) = marginals[x]`.
    pub fn product(sites: SiteSet, marginals: &[T]) -> Result<Self> {
        if marginals.len() != sites.n() {
            return Err(Error::Length { expected: sites.n(), got: marginals.len() });
        }
        if let Some(i) = marginals
            .iter()
            .position(|p| *p < T::zero() || *p > T::one() || !p.is_finite())
        {
            return Err(Error::Input(format!("marginal {i} outside [0, 1]")));
        }
        let probs = sites
            .configs()
            .map(|c| {
                marginals.iter().enumerate().fold(T::one(), |acc, (x, p)| {
                    acc * if c.get(x) { p.clone() } else { T::one() - p.clone() }
                })
            })
            .collect();
        Ok(Measure { sites, probs })
    }

    pub fn sites(&self) -> SiteSet {
        self.sites
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, c: Config) -> &T {
        &self.probs[c.index()]
    }

    /// Probability of an event given as a bitset over configurations.
    pub fn prob_event(&self, event: u64) -> T {
        let mut acc = T::zero();
        let mut m = event;
        while m != 0 {
            acc = acc + self.probs[m.trailing_zeros() as usize].clone();
            m &= m - 1;
        }
        acc
    }

    pub fn prob_up_set(&self, u: UpSet) -> T {
        self.prob_event(u.members())
    }

    pub fn as_weights(&self) -> WeightVector<T> {
        WeightVector { sites: self.sites, weights: self.probs.clone() }
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|p| *p > T::zero())
    }

    pub fn to_f64(&self) -> Measure<f64> {
        Measure { sites: self.sites, probs: self.probs.iter().map(|p| p.to_f64()).collect() }
    }

    /// `λ·self + (1-λ)·other`.
    pub fn mix(&self, lambda: &T, other: &Measure<T>) -> Result<Self> {
        self.sites.same_as(other.sites)?;
        let rest = T::one() - lambda.clone();
        Ok(Measure {
            sites: self.sites,
            probs: self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| lambda.clone() * a.clone() + rest.clone() * b.clone())
                .collect(),
        })
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Measure<T>) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max)
    }
}

/// Bitset of configurations vanishing on `zeros` (a site bitmask).
pub(crate) fn zero_event(sites: SiteSet, zeros: u8) -> u64 {
    sites
        .configs()
        .filter(|c| c.mask() & zeros == 0)
        .fold(0u64, |acc, c| acc | 1 << c.index())
}

pub fn expectation<T: Scalar>(mu: &Measure<T>, f: &RealFunction<T>) -> Result<T> {
    mu.sites.same_as(f.sites())?;
    Ok(mu
        .probs
        .iter()
        .zip(f.values())
        .fold(T::zero(), |acc, (p, v)| acc + p.clone() * v.clone()))
}

/// `E[fg] - E[f]E[g]`.
pub fn covariance<T: Scalar>(mu: &Measure<T>, f: &RealFunction<T>, g: &RealFunction<T>) -> Result<T> {
    let fg = f.product(g)?;
    Ok(expectation(mu, &fg)? - expectation(mu, f)? * expectation(mu, g)?)
}

/// `μ{· | η ≡ 0 on zeros}`, still a measure on the full site set.
pub fn condition_zeros<T: Scalar>(mu: &Measure<T>, zeros: &[usize]) -> Result<Measure<T>> {
    let mask = mu.sites.site_mask(zeros)?;
    condition_zeros_mask(mu, mask)
}

pub(crate) fn condition_zeros_mask<T: Scalar>(mu: &Measure<T>, zeros: u8) -> Result<Measure<T>> {
    let event = zero_event(mu.sites, zeros);
    let p = mu.prob_event(event);
    if p.is_zero() {
        return Err(Error::ZeroProbabilityEvent);
    }
    Ok(Measure {
        sites: mu.sites,
        probs: mu
            .probs
            .iter()
            .enumerate()
            .map(|(i, q)| if event >> i & 1 == 1 { q.clone() / p.clone() } else { T::zero() })
            .collect(),
    })
}

/// `μ_h(η) = h(η)μ(η) / ∫h dμ` for strictly positive `h`.
pub fn tilt<T: Scalar>(mu: &Measure<T>, h: &RealFunction<T>) -> Result<Measure<T>> {
    mu.sites.same_as(h.sites())?;
    if let Some(i) = h.values().iter().position(|v| *v <= T::zero()) {
        return Err(Error::NonPositiveTilt(i));
    }
    let weights: Vec<T> = mu
        .probs
        .iter()
        .zip(h.values())
        .map(|(p, v)| p.clone() * v.clone())
        .collect();
    normalize(&WeightVector { sites: mu.sites, weights })
}

/// Marginal on the sites outside `fixed` (a site bitmask), re-indexed so the
/// remaining sites keep their relative order. Used when every configuration
/// in the support agrees on `fixed`.
pub(crate) fn project_out<T: Scalar>(mu: &Measure<T>, fixed: u8) -> Option<(Measure<T>, Vec<usize>)> {
    let free: Vec<usize> = (0..mu.sites.n()).filter(|x| fixed >> x & 1 == 0).collect();
    let reduced = SiteSet::new(free.len()).ok()?;
    let mut probs = vec![T::zero(); reduced.size()];
    for c in mu.sites.configs() {
        let idx = free
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &x)| acc | (c.get(x) as usize) << k);
        probs[idx] = probs[idx].clone() + mu.probs[c.index()].clone();
    }
    Some((Measure { sites: reduced, probs }, free))
}

/// Lifts an up-set on the free sites back to the full configuration space.
pub(crate) fn lift_up_set(full: SiteSet, free: &[usize], reduced_members: u64) -> UpSet {
    let members = full.configs().fold(0u64, |acc, c| {
        let idx = free
            .iter()
            .enumerate()
            .fold(0usize, |a, (k, &x)| a | (c.get(x) as usize) << k);
        if reduced_members >> idx & 1 == 1 {
            acc | 1 << c.index()
        } else {
            acc
        }
    });
    UpSet::from_raw(full, members)
}

/// Sites in a bitmask, ascending.
pub(crate) fn sites_of(mask: u8) -> Vec<usize> {
    (0..8).filter(|x| mask >> x & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn s(n: usize) -> SiteSet {
        SiteSet::new(n).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let u = normalize(&WeightVector::new(s(2), vec![int(1); 4]).unwrap()).unwrap();
        assert_eq!(u, Measure::uniform(s(2)));
        let w = WeightVector::new(s(2), vec![int(2), int(0), int(0), int(0)]).unwrap();
        assert_eq!(normalize(&w).unwrap(), Measure::point_mass(s(2).config(0).unwrap()));
        let w = WeightVector::new(s(2), vec![int(1), int(2), int(3), int(4)]).unwrap();
        assert_eq!(normalize(&w.scale(&int(7))).unwrap(), normalize(&w).unwrap());
        assert!(matches!(WeightVector::new(s(1), vec![int(0), int(0)]), Err(Error::ZeroTotal)));
        assert!(matches!(
            WeightVector::new(s(1), vec![int(1), int(-1)]),
            Err(Error::NegativeWeight(1))
        ));
        assert!(Measure::new(s(1), vec![rat(1, 3), rat(1, 3)]).is_err());
        assert!(Measure::new(s(1), vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn covariance_examples() {
        let mu = Measure::<Rational>::uniform(s(1));
        let f = RealFunction::coordinate(s(1), 0).unwrap();
        assert_eq!(covariance(&mu, &f, &f).unwrap(), rat(1, 4));

        let prod = Measure::product(s(3), &[rat(1, 3), rat(1, 5), rat(5, 7)]).unwrap();
        let f = RealFunction::coordinate(s(3), 0).unwrap();
        let g = RealFunction::coordinate(s(3), 2).unwrap();
        assert_eq!(covariance(&prod, &f, &g).unwrap(), int(0));
    }

    #[test]
    fn conditioning_examples() {
        let prod = Measure::product(s(3), &[rat(1, 3), rat(1, 5), rat(5, 7)]).unwrap();
        assert_eq!(condition_zeros(&prod, &[]).unwrap(), prod);
        let pinned = Measure::product(s(3), &[rat(1, 3), int(0), rat(5, 7)]).unwrap();
        assert_eq!(condition_zeros(&prod, &[1]).unwrap(), pinned);
        let point = Measure::<Rational>::point_mass(s(2).config(3).unwrap());
        assert!(matches!(condition_zeros(&point, &[0]), Err(Error::ZeroProbabilityEvent)));
    }

    #[test]
    fn tilt_examples() {
        let mu = Measure::from_weights(s(2), vec![int(1), int(2), int(3), int(4)]).unwrap();
        assert_eq!(tilt(&mu, &RealFunction::constant(s(2), int(1))).unwrap(), mu);
        let h1 = RealFunction::from_fn(s(2), |c| int(1 + c.index() as i64));
        let h2 = RealFunction::from_fn(s(2), |c| rat(1, 2 + c.ones() as i64));
        let lhs = tilt(&tilt(&mu, &h1).unwrap(), &h2).unwrap();
        assert_eq!(lhs, tilt(&mu, &h1.product(&h2).unwrap()).unwrap());
        let bad = RealFunction::from_fn(s(2), |c| int(c.index() as i64));
        assert!(matches!(tilt(&mu, &bad), Err(Error::NonPositiveTilt(0))));

        // Π_{x∈A}[1+ε−η(x)] tends to conditioning on zeros over A.
        let target = condition_zeros(&mu, &[1]).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..6 {
            let eps = rat(1, 10i64.pow(k));
            let h = RealFunction::from_fn(s(2), |c| {
                int(1) + eps.clone() - if c.get(1) { int(1) } else { int(0) }
            });
            let d = tilt(&mu, &h).unwrap().max_abs_diff(&target);
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn projection_round_trip() {
        let mu = Measure::from_weights(s(3), (1..=8).map(int).collect()).unwrap();
        let cond = condition_zeros(&mu, &[1]).unwrap();
        let (proj, free) = project_out(&cond, 0b010).unwrap();
        assert_eq!(free, vec![0, 2]);
        assert_eq!(proj.probs(), &[rat(1, 14), rat(2, 14), rat(5, 14), rat(6, 14)]);
    }
}
