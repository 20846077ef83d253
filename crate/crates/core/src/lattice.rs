//! Configurations of `{0,1}^S`, the coordinatewise order, up-sets and
//! increasing functions.
//!
//! A configuration is a bitmask with site `x` stored in bit `x`. Up-sets are
//! bitsets over the `2^n` configuration indices, which for `n <= 6` fit in a
//! single `u64`; intersection is a word-wise AND.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Scalar;

pub const MAX_SITES: usize = 6;

/// The finite site set `S = {0, .., n-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteSet {
    n: u8,
}

impl SiteSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return Err(Error::SiteCount(n));
        }
        Ok(SiteSet { n: n as u8 })
    }

    pub fn n(self) -> usize {
        self.n as usize
    }

    /// Number of configurations, `2^n`.
    pub fn size(self) -> usize {
        1 << self.n
    }

    /// Bitmask with every site set (the all-ones configuration).
    pub fn full_mask(self) -> u8 {
        (self.size() - 1) as u8
    }

    /// Bitset over configurations containing every configuration.
    pub fn all_configs_mask(self) -> u64 {
        if self.size() == 64 {
            u64::MAX
        } else {
            (1u64 << self.size()) - 1
        }
    }

    pub fn configs(self) -> impl Iterator<Item = Config> {
        let n = self.n;
        (0..self.size()).map(move |m| Config { mask: m as u8, n })
    }

    pub fn config(self, mask: u64) -> Result<Config> {
        if mask >= self.size() as u64 {
            return Err(Error::ConfigOutOfRange { mask, n: self.n() });
        }
        Ok(Config { mask: mask as u8, n: self.n })
    }

    pub fn check_site(self, site: usize) -> Result<()> {
        if site >= self.n() {
            return Err(Error::SiteOutOfRange { site, n: self.n() });
        }
        Ok(())
    }

    pub fn same_as(self, other: SiteSet) -> Result<()> {
        if self != other {
            return Err(Error::SiteMismatch(self.n(), other.n()));
        }
        Ok(())
    }

    /// Bitmask of a list of sites.
    pub fn site_mask(self, sites: &[usize]) -> Result<u8> {
        let mut mask = 0u8;
        for &s in sites {
            self.check_site(s)?;
            if mask & (1 << s) != 0 {
                return Err(Error::DuplicateSite(s));
            }
            mask |= 1 << s;
        }
        Ok(mask)
    }
}

/// A point `η` of `{0,1}^S`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    mask: u8,
    n: u8,
}

impl Config {
    pub fn new(sites: SiteSet, mask: u64) -> Result<Self> {
        sites.config(mask)
    }

    /// Parses the site-0-first bit string used in reports, e.g. `"011"`.
    pub fn parse(text: &str) -> Result<Self> {
        let sites = SiteSet::new(text.len())?;
        let mut mask = 0u64;
        for (i, ch) in text.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => mask |= 1 << i,
                _ => return Err(Error::Input(format!("bad configuration string {text:?}"))),
            }
        }
        sites.config(mask)
    }

    pub fn index(self) -> usize {
        self.mask as usize
    }

    pub fn mask(self) -> u8 {
        self.mask
    }

    pub fn sites(self) -> SiteSet {
        SiteSet { n: self.n }
    }

    pub fn get(self, site: usize) -> bool {
        self.mask >> site & 1 == 1
    }

    /// Coordinatewise `self <= other`.
    pub fn leq(self, other: Config) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn ones(self) -> u32 {
        self.mask.count_ones()
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.mask >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Config({self})")
    }
}

impl Serialize for Config {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Config {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Config::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// `(a ∧ b, a ∨ b)`: coordinatewise minimum and maximum.
pub fn meet_join(a: Config, b: Config) -> Result<(Config, Config)> {
    if a.n != b.n {
        return Err(Error::SiteMismatch(a.n as usize, b.n as usize));
    }
    Ok((
        Config { mask: a.mask & b.mask, n: a.n },
        Config { mask: a.mask | b.mask, n: a.n },
    ))
}

/// `η_{x1,x2,..}`: complements the listed sites.
pub fn flip(a: Config, sites: &[usize]) -> Result<Config> {
    let toggle = a.sites().site_mask(sites)?;
    Ok(Config { mask: a.mask ^ toggle, n: a.n })
}

/// An upward-closed set of configurations.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UpSet {
    members: u64,
    n: u8,
}

impl UpSet {
    /// Wraps a membership bitset, checking upward closure.
    pub fn from_members(sites: SiteSet, members: u64) -> Result<Self> {
        if members & !sites.all_configs_mask() != 0 {
            return Err(Error::Input("up-set members outside the configuration space".into()));
        }
        if !is_upward_closed(sites, members) {
            return Err(Error::Input(format!("bitset {members:#x} is not upward closed")));
        }
        Ok(UpSet { members, n: sites.n })
    }

    pub(crate) fn from_raw(sites: SiteSet, members: u64) -> Self {
        debug_assert!(is_upward_closed(sites, members));
        UpSet { members, n: sites.n }
    }

    /// Smallest up-set containing the given configurations.
    pub fn generated_by(sites: SiteSet, generators: &[Config]) -> Result<Self> {
        let mut members = 0u64;
        for g in generators {
            sites.same_as(g.sites())?;
            for c in sites.configs() {
                if g.leq(c) {
                    members |= 1 << c.index();
                }
            }
        }
        Ok(UpSet { members, n: sites.n })
    }

    /// `{η : η(x) = 1}`.
    pub fn coordinate(sites: SiteSet, x: usize) -> Result<Self> {
        sites.check_site(x)?;
        let mut members = 0u64;
        for c in sites.configs() {
            if c.get(x) {
                members |= 1 << c.index();
            }
        }
        Ok(UpSet { members, n: sites.n })
    }

    pub fn members(self) -> u64 {
        self.members
    }

    pub fn sites(self) -> SiteSet {
        SiteSet { n: self.n }
    }

    pub fn contains(self, c: Config) -> bool {
        self.members >> c.index() & 1 == 1
    }

    pub fn len(self) -> u32 {
        self.members.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.members == 0
    }

    pub fn intersect(self, other: UpSet) -> UpSet {
        UpSet { members: self.members & other.members, n: self.n }
    }

    pub fn is_subset(self, other: UpSet) -> bool {
        self.members & !other.members == 0
    }

    /// Minimal elements, in index order.
    pub fn minimal_elements(self) -> Vec<Config> {
        let sites = self.sites();
        sites
            .configs()
            .filter(|&c| self.contains(c))
            .filter(|&c| {
                (0..sites.n()).all(|x| {
                    !c.get(x) || !self.contains(Config { mask: c.mask & !(1 << x), n: c.n })
                })
            })
            .collect()
    }
}

impl fmt::Debug for UpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mins: Vec<String> = self.minimal_elements().iter().map(|c| c.to_string()).collect();
        write!(f, "UpSet[{}]", mins.join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct UpSetRepr {
    n: usize,
    minimal: Vec<Config>,
}

impl Serialize for UpSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        UpSetRepr { n: self.n as usize, minimal: self.minimal_elements() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UpSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = UpSetRepr::deserialize(d)?;
        let sites = SiteSet::new(repr.n).map_err(serde::de::Error::custom)?;
        UpSet::generated_by(sites, &repr.minimal).map_err(serde::de::Error::custom)
    }
}

/// Upward-closure predicate: every member stays a member when any site is
/// raised to 1.
pub fn is_upward_closed(sites: SiteSet, members: u64) -> bool {
    (0..sites.size()).all(|c| {
        members >> c & 1 == 0 || (0..sites.n()).all(|x| members >> (c | 1 << x) & 1 == 1)
    })
}

static UP_SET_CACHE: [OnceLock<Vec<u64>>; MAX_SITES + 1] = [
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
];

fn up_set_masks(n: usize) -> &'static [u64] {
    UP_SET_CACHE[n].get_or_init(|| {
        if n == 0 {
            return vec![0, 1];
        }
        // An up-set of {0,1}^n splits on the top site into a lower half A and
        // an upper half B of up-sets of {0,1}^(n-1) with A ⊆ B.
        let prev = up_set_masks(n - 1);
        let half = 1u32 << (n - 1);
        let mut out = Vec::new();
        for &b in prev {
            for &a in prev {
                if a & !b == 0 {
                    out.push(a | b << half);
                }
            }
        }
        out.sort_unstable();
        out
    })
}

/// Every up-set of `{0,1}^n`, ordered by membership bitset.
#[derive(Clone, Copy, Debug)]
pub struct UpSetFamily {
    sites: SiteSet,
    masks: &'static [u64],
}

impl UpSetFamily {
    pub fn sites(&self) -> SiteSet {
        self.sites
    }

    pub fn masks(&self) -> &'static [u64] {
        self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn get(&self, i: usize) -> UpSet {
        UpSet::from_raw(self.sites, self.masks[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = UpSet> + '_ {
        self.masks.iter().map(|&m| UpSet::from_raw(self.sites, m))
    }
}

/// All up-sets of `{0,1}^n` in lexicographic bitset order, including `∅` and
/// the full set. Six sites (7,828,354 up-sets) must be requested explicitly.
pub fn enumerate_up_sets(sites: SiteSet, allow_six: bool) -> Result<UpSetFamily> {
    if sites.n() == MAX_SITES && !allow_six {
        return Err(Error::Budget(
            "up-set enumeration for 6 sites requires the n = 6 opt-in".into(),
        ));
    }
    Ok(UpSetFamily { sites, masks: up_set_masks(sites.n()) })
}

/// A real-valued function on configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct RealFunction<T> {
    sites: SiteSet,
    values: Vec<T>,
}

impl<T: Scalar> RealFunction<T> {
    pub fn new(sites: SiteSet, values: Vec<T>) -> Result<Self> {
        if values.len() != sites.size() {
            return Err(Error::Length { expected: sites.size(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(RealFunction { sites, values })
    }

    pub fn from_fn(sites: SiteSet, f: impl Fn(Config) -> T) -> Self {
        RealFunction { sites, values: sites.configs().map(f).collect() }
    }

    pub fn constant(sites: SiteSet, c: T) -> Self {
        Self::from_fn(sites, |_| c.clone())
    }

    /// `η ↦ η(x)`.
    pub fn coordinate(sites: SiteSet, x: usize) -> Result<Self> {
        sites.check_site(x)?;
        Ok(Self::from_fn(sites, |c| if c.get(x) { T::one() } else { T::zero() }))
    }

    pub fn indicator(u: UpSet) -> Self {
        Self::from_fn(u.sites(), |c| if u.contains(c) { T::one() } else { T::zero() })
    }

    pub fn sites(&self) -> SiteSet {
        self.sites
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn at(&self, c: Config) -> &T {
        &self.values[c.index()]
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.sites.same_as(other.sites)?;
        Ok(RealFunction {
            sites: self.sites,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() * b.clone())
                .collect(),
        })
    }
}

/// First pair `(η, η + x)` with `f(η) > f(η + x) + tol`, scanning configs in
/// index order and sites in increasing order. Single-site raises suffice by
/// transitivity of the order.
pub fn increasing_violation<T: Scalar>(values: &[T], sites: SiteSet, tol: f64) -> Option<(Config, Config)> {
    for c in sites.configs() {
        for x in 0..sites.n() {
            if c.get(x) {
                continue;
            }
            let up = Config { mask: c.mask | 1 << x, n: c.n };
            let slack = values[up.index()].clone() - values[c.index()].clone();
            if slack.below(tol) {
                return Some((c, up));
            }
        }
    }
    None
}

/// Whether `f(η) <= f(ζ)` whenever `η <= ζ`; on failure the first violating
/// single-site pair `(lower, upper)`.
pub fn is_increasing<T: Scalar>(f: &RealFunction<T>) -> std::result::Result<(), (Config, Config)> {
    match increasing_violation(&f.values, f.sites, 0.0) {
        Some(pair) => Err(pair),
        None => Ok(()),
    }
}

/// `f = constant + Σ coefficient_i · 1_{U_i}` with positive coefficients and
/// distinct up-sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<T> {
    pub constant: T,
    pub terms: Vec<(T, UpSet)>,
}

impl<T: Scalar> Decomposition<T> {
    pub fn reconstruct(&self, sites: SiteSet) -> RealFunction<T> {
        RealFunction::from_fn(sites, |c| {
            self.terms
                .iter()
                .filter(|(_, u)| u.contains(c))
                .fold(self.constant.clone(), |acc, (w, _)| acc + w.clone())
        })
    }
}

/// Layer-cake decomposition of an increasing function: with distinct values
/// `v_0 < .. < v_k`, `f = v_0 + Σ_{i>=1} (v_i - v_{i-1}) 1_{f >= v_i}`.
pub fn decompose_increasing<T: Scalar>(f: &RealFunction<T>) -> Result<Decomposition<T>> {
    if let Err((lower, upper)) = is_increasing(f) {
        return Err(Error::NotIncreasing { lower: lower.to_string(), upper: upper.to_string() });
    }
    let mut levels: Vec<T> = f.values.clone();
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    levels.dedup();
    let constant = levels[0].clone();
    let terms = levels
        .windows(2)
        .map(|w| {
            let members = f
                .values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v >= w[1])
                .fold(0u64, |acc, (i, _)| acc | 1 << i);
            (w[1].clone() - w[0].clone(), UpSet::from_raw(f.sites, members))
        })
        .collect();
    Ok(Decomposition { constant, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, Rational};

    fn cfg(s: &str) -> Config {
        Config::parse(s).unwrap()
    }

    #[test]
    fn meet_join_examples() {
        assert_eq!(meet_join(cfg("101"), cfg("011")).unwrap(), (cfg("001"), cfg("111")));
        assert_eq!(meet_join(cfg("110"), cfg("110")).unwrap(), (cfg("110"), cfg("110")));
        assert_eq!(meet_join(cfg("110"), cfg("000")).unwrap(), (cfg("000"), cfg("110")));
        assert!(matches!(meet_join(cfg("11"), cfg("110")), Err(Error::SiteMismatch(2, 3))));
    }

    #[test]
    fn flip_examples() {
        assert_eq!(flip(cfg("000"), &[0, 1]).unwrap(), cfg("110"));
        assert_eq!(flip(cfg("101"), &[]).unwrap(), cfg("101"));
        assert!(flip(cfg("000"), &[3]).is_err());
        assert!(matches!(flip(cfg("000"), &[1, 1]), Err(Error::DuplicateSite(1))));
    }

    #[test]
    fn lattice_axioms_exhaustive() {
        for n in 1..=3 {
            let s = SiteSet::new(n).unwrap();
            for a in s.configs() {
                for x in 0..n {
                    assert_eq!(flip(flip(a, &[x]).unwrap(), &[x]).unwrap(), a);
                }
                for b in s.configs() {
                    let (m, j) = meet_join(a, b).unwrap();
                    assert_eq!(meet_join(b, a).unwrap(), (m, j));
                    assert_eq!(meet_join(a, j).unwrap().0, a, "absorption");
                    assert_eq!(meet_join(a, m).unwrap().1, a, "absorption");
                    for c in s.configs() {
                        let (bc_m, bc_j) = meet_join(b, c).unwrap();
                        assert_eq!(meet_join(a, bc_m).unwrap().0, meet_join(m, c).unwrap().0);
                        assert_eq!(meet_join(a, bc_j).unwrap().1, meet_join(j, c).unwrap().1);
                    }
                }
            }
        }
    }

    /// Filter-all-subsets oracle.
    fn brute_force_up_sets(n: usize) -> Vec<u64> {
        let s = SiteSet::new(n).unwrap();
        (0..1u64 << s.size()).filter(|&m| is_upward_closed(s, m)).collect()
    }

    #[test]
    fn up_set_counts_match_subset_filter() {
        for (n, expected) in [(1, 3), (2, 6), (3, 20), (4, 168)] {
            let s = SiteSet::new(n).unwrap();
            let fam = enumerate_up_sets(s, false).unwrap();
            assert_eq!(fam.len(), expected);
            assert_eq!(fam.masks(), brute_force_up_sets(n).as_slice());
        }
    }

    #[test]
    fn five_site_up_sets() {
        let s = SiteSet::new(5).unwrap();
        let fam = enumerate_up_sets(s, false).unwrap();
        assert_eq!(fam.len(), 7581);
        assert!(fam.masks().windows(2).all(|w| w[0] < w[1]));
        assert!(fam.masks().iter().all(|&m| is_upward_closed(s, m)));
        assert!(enumerate_up_sets(SiteSet::new(6).unwrap(), false).is_err());
    }

    #[test]
    fn minimal_elements_round_trip() {
        let s = SiteSet::new(3).unwrap();
        for u in enumerate_up_sets(s, false).unwrap().iter() {
            assert_eq!(UpSet::generated_by(s, &u.minimal_elements()).unwrap(), u);
            let json = serde_json::to_string(&u).unwrap();
            assert_eq!(serde_json::from_str::<UpSet>(&json).unwrap(), u);
        }
    }

    #[test]
    fn increasing_examples() {
        let s = SiteSet::new(3).unwrap();
        let coord = RealFunction::<Rational>::coordinate(s, 1).unwrap();
        assert!(is_increasing(&coord).is_ok());
        assert!(is_increasing(&RealFunction::constant(s, int(4))).is_ok());
        let ind = RealFunction::from_fn(s, |c| if c.mask() == 0 { int(1) } else { int(0) });
        assert_eq!(is_increasing(&ind), Err((cfg("000"), cfg("100"))));
    }

    #[test]
    fn decomposition_examples() {
        let s = SiteSet::new(2).unwrap();
        let coord = RealFunction::<Rational>::coordinate(s, 0).unwrap();
        let d = decompose_increasing(&coord).unwrap();
        assert_eq!(d.constant, int(0));
        assert_eq!(d.terms, vec![(int(1), UpSet::coordinate(s, 0).unwrap())]);

        let d = decompose_increasing(&RealFunction::constant(s, int(5))).unwrap();
        assert_eq!((d.constant, d.terms.len()), (int(5), 0));

        let sum = RealFunction::from_fn(s, |c| int(c.ones() as i64));
        let d = decompose_increasing(&sum).unwrap();
        assert_eq!(d.terms.len(), 2);
        assert_eq!(d.terms[0].1, UpSet::generated_by(s, &[cfg("10"), cfg("01")]).unwrap());
        assert_eq!(d.terms[1].1, UpSet::generated_by(s, &[cfg("11")]).unwrap());
        assert_eq!(d.reconstruct(s), sum);

        let bad = RealFunction::from_fn(s, |c| int(-(c.ones() as i64)));
        assert!(decompose_increasing(&bad).is_err());
    }
}
