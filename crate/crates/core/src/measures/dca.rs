use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::association::{covariance_of_up_sets, is_associated};
use super::{
    is_downward_fkg, satisfies_lattice, tilt, CheckOptions, Measure, Property, PropertyReport, Verdict,
    WeightVector, Witness,
};
use crate::error::{Error, Result};
use crate::lattice::{increasing_violation, RealFunction, SiteSet, UpSet};
use crate::rational::{int, rat, Rational, Scalar};
use crate::three_site::{classify, ThreeSiteCoords};

/// Float margin used to screen sampled tilts before exact confirmation.
pub const TILT_SCREEN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiltFamily {
    /// `h(η) = Π_{x∈η} r_x · Π_{A⊆η, |A|>=2} s_A` with `s_A >= 1` and
    /// `r_x · Π_{A∋x} s_A <= 1`.
    Exponential,
    /// `h(η) = Π_{x∈A} [1 + ε - η(x)]`, `ε ∈ {1, 1/10, 1/100}`.
    ProductZeros,
    /// Product of one draw from each family.
    Mixed,
}

/// A strictly positive, decreasing, log-supermodular function.
#[derive(Clone, Debug, PartialEq)]
pub struct Tilt {
    pub h: RealFunction<Rational>,
    pub family: TiltFamily,
}

impl Tilt {
    /// Checks positivity, monotonicity and log-supermodularity exactly.
    pub fn validate(h: &RealFunction<Rational>) -> Result<()> {
        let sites = h.sites();
        if let Some(i) = h.values().iter().position(|v| *v <= int(0)) {
            return Err(Error::InvalidTilt(format!("h vanishes or is negative at index {i}")));
        }
        let neg: Vec<Rational> = h.values().iter().map(|v| -v.clone()).collect();
        if let Some((lo, hi)) = increasing_violation(&neg, sites, 0.0) {
            return Err(Error::InvalidTilt(format!("h({lo}) < h({hi})")));
        }
        let opts = CheckOptions { full_margin: true, ..Default::default() };
        let lattice = satisfies_lattice(&WeightVector::new(sites, h.values().to_vec())?, &opts)?;
        if !lattice.is_holds() {
            return Err(Error::InvalidTilt("h is not log-supermodular".into()));
        }
        Ok(())
    }

    pub fn constant_one(sites: SiteSet) -> Self {
        Tilt { h: RealFunction::constant(sites, int(1)), family: TiltFamily::ProductZeros }
    }

    /// `Π_{x∈zeros} [1 + ε - η(x)]`.
    pub fn product_zeros(sites: SiteSet, zeros: &[usize], eps: &Rational) -> Result<Self> {
        for &x in zeros {
            sites.check_site(x)?;
        }
        let h = RealFunction::from_fn(sites, |c| {
            zeros.iter().fold(int(1), |acc, &x| {
                acc * (int(1) + eps.clone() - if c.get(x) { int(1) } else { int(0) })
            })
        });
        Ok(Tilt { h, family: TiltFamily::ProductZeros })
    }
}

/// Seeded source of valid tilts.
#[derive(Clone, Debug)]
pub struct TiltSampler {
    family: TiltFamily,
    rng: ChaCha8Rng,
    /// Validate every sample exactly before use.
    pub validate: bool,
}

impl TiltSampler {
    pub fn new(seed: u64, family: TiltFamily) -> Self {
        TiltSampler { family, rng: ChaCha8Rng::seed_from_u64(seed), validate: true }
    }

    pub fn sample(&mut self, sites: SiteSet) -> Result<Tilt> {
        let h = match self.family {
            TiltFamily::Exponential => self.exponential(sites),
            TiltFamily::ProductZeros => self.product_zeros(sites),
            TiltFamily::Mixed => self.exponential(sites).product(&self.product_zeros(sites))?,
        };
        if self.validate {
            Tilt::validate(&h)?;
        }
        Ok(Tilt { h, family: self.family })
    }

    fn exponential(&mut self, sites: SiteSet) -> RealFunction<Rational> {
        let n = sites.n();
        let full = sites.full_mask() as usize;
        let pool: Vec<usize> = (0..=full).filter(|a| a.count_ones() >= 2).collect();
        let active = self.rng.random_range(0..=pool.len().min(3));
        let mut boosts: Vec<(usize, Rational)> = Vec::with_capacity(active);
        for &a in pool.choose_multiple(&mut self.rng, active) {
            boosts.push((a, int(1) + rat(self.rng.random_range(1..=8), 4)));
        }
        let rates: Vec<Rational> = (0..n)
            .map(|x| {
                let q = rat(self.rng.random_range(1..=8), 8);
                boosts
                    .iter()
                    .filter(|(a, _)| a >> x & 1 == 1)
                    .fold(q, |acc, (_, s)| acc / s.clone())
            })
            .collect();
        RealFunction::from_fn(sites, |c| {
            let m = c.mask() as usize;
            let base = (0..n).filter(|&x| c.get(x)).fold(int(1), |acc, x| acc * rates[x].clone());
            boosts
                .iter()
                .filter(|(a, _)| a & m == *a)
                .fold(base, |acc, (_, s)| acc * s.clone())
        })
    }

    fn product_zeros(&mut self, sites: SiteSet) -> RealFunction<Rational> {
        let n = sites.n();
        let zeros_mask = self.rng.random_range(1..1usize << n);
        let zeros: Vec<usize> = (0..n).filter(|x| zeros_mask >> x & 1 == 1).collect();
        let eps = [int(1), rat(1, 10), rat(1, 100)].choose(&mut self.rng).cloned().expect("nonempty");
        Tilt::product_zeros(sites, &zeros, &eps).expect("sites in range").h
    }
}

fn tilt_witness<T: Scalar>(mu: &Measure<T>, t: &Tilt, opts: &CheckOptions) -> Result<Option<PropertyReport>> {
    let h = RealFunction::from_fn(mu.sites(), |c| T::from_rational(t.h.at(c)));
    let tilted = tilt(mu, &h)?;
    let screen_tol = if T::EXACT { TILT_SCREEN_TOLERANCE } else { opts.tolerance };
    let screen = is_associated(&tilted.to_f64(), &CheckOptions { tolerance: screen_tol, ..opts.clone() })?;
    if screen.is_holds() {
        return Ok(None);
    }
    let confirm = if T::EXACT { is_associated(&tilted, opts)? } else { screen };
    let Some(Witness::UpSetPair { u, v }) = confirm.witness else { return Ok(None) };
    let w = Witness::Tilt { h: t.h.values().to_vec(), u, v };
    Ok(Some(PropertyReport::fails(Property::Dca, w, confirm.margin)))
}

/// Randomized DCA falsification: `h ≡ 1` first, then `budget` sampled tilts.
/// Never certifies; returns `fails` or `falsified-only-search-exhausted`.
pub fn dca_search<T: Scalar>(
    mu: &Measure<T>,
    sampler: &mut TiltSampler,
    budget: usize,
    opts: &CheckOptions,
) -> Result<PropertyReport> {
    let sites = mu.sites();
    if let Some(r) = tilt_witness(mu, &Tilt::constant_one(sites), opts)? {
        return Ok(r);
    }
    for _ in 0..budget {
        let t = sampler.sample(sites)?;
        if let Some(r) = tilt_witness(mu, &t, opts)? {
            return Ok(r);
        }
    }
    Ok(PropertyReport::new(Property::Dca, Verdict::SearchExhausted)
        .with_note(format!("{budget} sampled tilts, no violation")))
}

/// DCA verdict. Up to three sites the verdict is exact (closed forms); a
/// failure carries a tilt witness built from the failing conditioning set.
/// From four sites on only sampled tilts are tried, so the best outcome is
/// `falsified-only-search-exhausted`.
pub fn dca_falsify<T: Scalar>(
    mu: &Measure<T>,
    sampler: &mut TiltSampler,
    budget: usize,
    opts: &CheckOptions,
) -> Result<PropertyReport> {
    let sites = mu.sites();
    let holds = match sites.n() {
        1 => true,
        2 => {
            let p = mu.probs();
            let slack = p[3].clone() * p[0].clone() - p[1].clone() * p[2].clone();
            !slack.below(opts.tolerance)
        }
        3 => classify(&ThreeSiteCoords::from_measure(mu)?, opts.tolerance)?.dca,
        _ => return dca_search(mu, sampler, budget, opts),
    };
    if holds {
        let audit = if budget > 0 { dca_search(mu, sampler, budget, opts)? } else { PropertyReport::new(Property::Dca, Verdict::SearchExhausted) };
        if audit.is_fails() {
            return Ok(audit.with_note("sampled tilt contradicts the closed form"));
        }
        return Ok(PropertyReport::holds(Property::Dca, None).with_note("closed form"));
    }
    if let Some(r) = tilt_witness(mu, &Tilt::constant_one(sites), opts)? {
        return Ok(r);
    }
    let down = is_downward_fkg(mu, opts)?;
    if let Some(Witness::Conditioned { zeros, u, v }) = &down.witness {
        for k in 0..=40u32 {
            let eps = Rational::new(1.into(), num_bigint::BigInt::from(10).pow(k));
            let t = Tilt::product_zeros(sites, zeros, &eps)?;
            if let Some(r) = pair_under_tilt(mu, &t, *u, *v, opts)? {
                return Ok(r);
            }
        }
        return Ok(PropertyReport::fails(Property::Dca, down.witness.clone().expect("checked"), down.margin)
            .with_note("tilt limit did not resolve; conditioning witness given"));
    }
    // Closed form and brute force disagree only within float tolerance.
    let coords = ThreeSiteCoords::from_measure(mu)?;
    let v = classify(&coords, opts.tolerance)?;
    let system = ["A", "C", "D"]
        .into_iter()
        .zip([crate::three_site::System::A, crate::three_site::System::C, crate::three_site::System::D])
        .find_map(|(name, s)| v.first_failure(s, opts.tolerance).map(|i| (name, i)));
    let (system, index) = system.unwrap_or(("D", 0));
    Ok(PropertyReport::fails(Property::Dca, Witness::Inequality { system: system.into(), index }, None))
}

fn pair_under_tilt<T: Scalar>(
    mu: &Measure<T>,
    t: &Tilt,
    u: UpSet,
    v: UpSet,
    opts: &CheckOptions,
) -> Result<Option<PropertyReport>> {
    let h = RealFunction::from_fn(mu.sites(), |c| T::from_rational(t.h.at(c)));
    let tilted = tilt(mu, &h)?;
    let cov = covariance_of_up_sets(&tilted, u, v);
    if !cov.below(opts.tolerance) {
        return Ok(None);
    }
    let w = Witness::Tilt { h: t.h.values().to_vec(), u, v };
    Ok(Some(PropertyReport::fails(Property::Dca, w, Some(cov.to_margin()))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn s(n: usize) -> SiteSet {
        SiteSet::new(n).unwrap()
    }

    #[test]
    fn samplers_emit_valid_tilts() {
        for family in [TiltFamily::Exponential, TiltFamily::ProductZeros, TiltFamily::Mixed] {
            let mut sampler = TiltSampler::new(9, family);
            for n in 1..=4 {
                for _ in 0..50 {
                    let t = sampler.sample(s(n)).unwrap();
                    Tilt::validate(&t.h).unwrap();
                }
            }
        }
    }

    #[test]
    fn validation_rejects_bad_functions() {
        let inc = RealFunction::from_fn(s(2), |c| int(1 + c.ones() as i64));
        assert!(Tilt::validate(&inc).is_err());
        // Decreasing but log-submodular.
        let sub = RealFunction::new(s(2), vec![int(4), int(2), int(2), rat(1, 2)]).unwrap();
        assert!(Tilt::validate(&sub).is_err());
        assert!(Tilt::validate(&RealFunction::constant(s(2), int(0))).is_err());
    }

    #[test]
    fn same_seed_same_tilts() {
        let mut a = TiltSampler::new(5, TiltFamily::Mixed);
        let mut b = TiltSampler::new(5, TiltFamily::Mixed);
        for _ in 0..20 {
            assert_eq!(a.sample(s(3)).unwrap(), b.sample(s(3)).unwrap());
        }
    }

    #[test]
    fn two_sites_closed_form() {
        let mut sampler = TiltSampler::new(1, TiltFamily::Mixed);
        let good = Measure::from_weights(s(2), vec![int(2), int(1), int(1), int(1)]).unwrap();
        assert!(dca_falsify(&good, &mut sampler, 50, &CheckOptions::default()).unwrap().is_holds());
        let bad = Measure::from_weights(s(2), vec![int(1), int(2), int(1), int(1)]).unwrap();
        let r = dca_falsify(&bad, &mut sampler, 50, &CheckOptions::default()).unwrap();
        assert!(matches!(r.witness, Some(Witness::Tilt { .. })));
    }

    #[test]
    fn four_sites_never_certify() {
        let mu = Measure::<Rational>::uniform(s(4));
        let mut sampler = TiltSampler::new(2, TiltFamily::Mixed);
        let r = dca_falsify(&mu, &mut sampler, 20, &CheckOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::SearchExhausted);
    }
}
