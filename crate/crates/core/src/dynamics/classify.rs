use serde::{Deserialize, Serialize};

use super::RateTable;
use crate::lattice::{Config, SiteSet};
use crate::measures::{Property, PropertyReport, Witness};
use crate::rational::{int, serde_rational, Rational, Scalar};

fn config(sites: SiteSet, i: usize) -> Config {
    Config::new(sites, i as u64).expect("index in range")
}

/// First `(η, η + y)` with `values[η] > values[η + y]` (or `<` when
/// `decreasing`).
fn monotone_violation(values: &[Rational], sites: SiteSet, decreasing: bool) -> Option<(usize, usize)> {
    for c in 0..sites.size() {
        for y in 0..sites.n() {
            if c >> y & 1 == 1 {
                continue;
            }
            let up = c | 1 << y;
            let bad = if decreasing { values[c] < values[up] } else { values[c] > values[up] };
            if bad {
                return Some((c, up));
            }
        }
    }
    None
}

/// Births increasing and deaths decreasing at every site.
pub fn is_attractive(r: &RateTable) -> PropertyReport {
    let sites = r.sites();
    for x in 0..sites.n() {
        for (row, decreasing) in [(r.beta_row(x), false), (r.delta_row(x), true)] {
            if let Some((lo, hi)) = monotone_violation(row, sites, decreasing) {
                let w = Witness::SiteConfigPair { site: x, lower: config(sites, lo), upper: config(sites, hi) };
                let slack = if decreasing { &row[lo] - &row[hi] } else { &row[hi] - &row[lo] };
                return PropertyReport::fails(Property::Attractive, w, Some(slack.to_margin()))
                    .with_note(if decreasing { "death rate increases" } else { "birth rate decreases" });
            }
        }
    }
    PropertyReport::holds(Property::Attractive, None)
}

fn first_nonconstant(row: &[Rational]) -> Option<usize> {
    row.iter().position(|v| *v != row[0])
}

/// Site whose rates depend on the configuration, if any.
pub(crate) fn first_dependent_site(r: &RateTable) -> Option<usize> {
    (0..r.sites().n())
        .find(|&x| first_nonconstant(r.beta_row(x)).is_some() || first_nonconstant(r.delta_row(x)).is_some())
}

/// Whether every rate is constant in the configuration.
pub fn has_independent_flips(r: &RateTable) -> bool {
    first_dependent_site(r).is_none()
}

pub fn independent_flips_report(r: &RateTable) -> PropertyReport {
    let sites = r.sites();
    for x in 0..sites.n() {
        for row in [r.beta_row(x), r.delta_row(x)] {
            if let Some(c) = first_nonconstant(row) {
                let w = Witness::SiteConfigs { site: x, eta: config(sites, 0), zeta: config(sites, c) };
                return PropertyReport::fails(Property::IndependentFlips, w, None);
            }
        }
    }
    PropertyReport::holds(Property::IndependentFlips, None)
}

/// Death rates constant in the configuration.
pub fn constant_deaths(r: &RateTable) -> PropertyReport {
    let sites = r.sites();
    for x in 0..sites.n() {
        if let Some(c) = first_nonconstant(r.delta_row(x)) {
            let w = Witness::SiteConfigs { site: x, eta: config(sites, 0), zeta: config(sites, c) };
            return PropertyReport::fails(Property::ConstantDeaths, w, None);
        }
    }
    PropertyReport::holds(Property::ConstantDeaths, None)
}

/// Death rates constant on configurations that are not identically zero.
/// At `x` the exempt configurations are those vanishing off `x`.
pub fn death_constant_on_nonzero(r: &RateTable) -> PropertyReport {
    let sites = r.sites();
    for x in 0..sites.n() {
        let row = r.delta_row(x);
        let mut nonzero = (0..row.len()).filter(|&c| c & !(1 << x) != 0);
        let Some(reference) = nonzero.next() else { continue };
        if let Some(c) = nonzero.find(|&c| row[c] != row[reference]) {
            let w = Witness::SiteConfigs { site: x, eta: config(sites, reference), zeta: config(sites, c) };
            return PropertyReport::fails(Property::DeathConstantOnNonzero, w, None);
        }
    }
    PropertyReport::holds(Property::DeathConstantOnNonzero, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetCoefficient {
    pub set: Vec<usize>,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

/// Coefficients of `β(x, η) = Σ_A c(x, A) 1{η ≢ 0 on A}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveDecomposition {
    pub site: usize,
    /// `(A as sorted sites, c(x, A))` for every nonempty `A` with a nonzero
    /// coefficient, in increasing mask order.
    pub coefficients: Vec<SetCoefficient>,
    /// Whether the expansion reproduces the table exactly.
    pub exact: bool,
    pub additive: bool,
}

impl AdditiveDecomposition {
    pub fn coefficient(&self, set: &[usize]) -> Rational {
        self.coefficients
            .iter()
            .find(|c| c.set == set)
            .map(|c| c.value.clone())
            .unwrap_or_else(|| int(0))
    }
}

fn sites_of(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|x| mask >> x & 1 == 1).collect()
}

/// Möbius inversion of `G(D) = f(S) - f(S \ D)` where `f(B)` is the birth
/// rate at the configuration with ones exactly on `B`.
pub fn additive_decomposition(r: &RateTable, x: usize) -> AdditiveDecomposition {
    let sites = r.sites();
    let full = sites.size() - 1;
    let f = r.beta_row(x);
    let g: Vec<Rational> = (0..=full).map(|d| &f[full] - &f[full & !d]).collect();
    let mut coeffs = vec![int(0); full + 1];
    for a in 1..=full {
        // Σ over subsets d of a.
        let mut d = a;
        loop {
            let sign = if (a & !d).count_ones() % 2 == 0 { 1 } else { -1 };
            coeffs[a] += &g[d] * int(sign);
            if d == 0 {
                break;
            }
            d = (d - 1) & a;
        }
    }
    let exact = (0..=full).all(|b| {
        let rebuilt: Rational = (1..=full).filter(|a| a & b != 0).map(|a| coeffs[a].clone()).sum();
        rebuilt == f[b]
    });
    let nonneg = coeffs.iter().all(|c| *c >= int(0));
    AdditiveDecomposition {
        site: x,
        coefficients: (1..=full)
            .filter(|&a| coeffs[a] != int(0))
            .map(|a| SetCoefficient { set: sites_of(a), value: coeffs[a].clone() })
            .collect(),
        exact,
        additive: exact && nonneg,
    }
}

pub fn additive_births(r: &RateTable) -> PropertyReport {
    let zero = r.sites().config(0).expect("zero config");
    for x in 0..r.sites().n() {
        let d = additive_decomposition(r, x);
        if !d.exact {
            let w = Witness::Coefficient { site: x, set: Vec::new(), value: r.beta(x, zero).clone() };
            return PropertyReport::fails(Property::AdditiveBirths, w, None)
                .with_note("birth rate at the all-zero configuration is nonzero");
        }
        if let Some(c) = d.coefficients.iter().find(|c| c.value < int(0)) {
            let w = Witness::Coefficient { site: x, set: c.set.clone(), value: c.value.clone() };
            return PropertyReport::fails(Property::AdditiveBirths, w, Some(c.value.to_margin()));
        }
    }
    PropertyReport::holds(Property::AdditiveBirths, None)
}

fn submodular_slack(f: &[Rational], a: usize, b: usize) -> Rational {
    &f[a] + &f[b] - &f[a | b] - &f[a & b]
}

/// `β(u, η∨ζ) + β(u, η∧ζ) <= β(u, η) + β(u, ζ)`. With `full = false` only
/// pairs `(γ + x, γ + y)` are examined, which decides the inequality for all
/// pairs; `full = true` sweeps every pair. The margin is the smallest slack
/// over the examined pairs.
pub fn check_submodular_births(r: &RateTable, u: usize, full: bool) -> PropertyReport {
    let sites = r.sites();
    let f = r.beta_row(u);
    let mut pairs = Vec::new();
    if full {
        for a in 0..sites.size() {
            for b in a + 1..sites.size() {
                if a & b != a && a & b != b {
                    pairs.push((a, b));
                }
            }
        }
    } else {
        for g in 0..sites.size() {
            for x in 0..sites.n() {
                for y in x + 1..sites.n() {
                    if g >> x & 1 == 0 && g >> y & 1 == 0 {
                        pairs.push((g | 1 << x, g | 1 << y));
                    }
                }
            }
        }
        pairs.sort_unstable();
    }
    let mut min: Option<Rational> = None;
    let mut first: Option<(usize, usize, Rational)> = None;
    for &(a, b) in &pairs {
        let s = submodular_slack(f, a, b);
        if s < int(0) && first.is_none() {
            first = Some((a, b, s.clone()));
        }
        if min.as_ref().is_none_or(|m| s < *m) {
            min = Some(s);
        }
    }
    match first {
        Some((a, b, _)) => {
            let w = Witness::SiteConfigs { site: u, eta: config(sites, a), zeta: config(sites, b) };
            PropertyReport::fails(Property::SubmodularBirths, w, min.map(|m| m.to_margin()))
        }
        None => PropertyReport::holds(Property::SubmodularBirths, min.map(|m| m.to_margin())),
    }
}

/// The submodular inequality at every site.
pub fn submodular_births(r: &RateTable) -> PropertyReport {
    let mut min: Option<Rational> = None;
    for u in 0..r.sites().n() {
        let rep = check_submodular_births(r, u, false);
        if rep.is_fails() {
            return rep;
        }
        if let Some(crate::rational::Margin::Exact(m)) = rep.margin {
            if min.as_ref().is_none_or(|b| m < *b) {
                min = Some(m);
            }
        }
    }
    PropertyReport::holds(Property::SubmodularBirths, min.map(|m| m.to_margin()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(n: usize) -> SiteSet {
        SiteSet::new(n).unwrap()
    }

    fn path(n: usize) -> Vec<(usize, usize)> {
        (0..n - 1).map(|i| (i, i + 1)).collect()
    }

    fn births(n: usize, beta: impl Fn(usize, Config) -> Rational) -> RateTable {
        RateTable::from_fn(s(n), beta, |_, _| int(1)).unwrap()
    }

    #[test]
    fn attractive_examples() {
        let contact = RateTable::contact(s(4), &path(4), &rat(3, 2), &int(1)).unwrap();
        assert!(is_attractive(&contact).is_holds());
        let flips = RateTable::independent(s(2), &[int(1), int(2)], &[int(3), int(4)]).unwrap();
        assert!(is_attractive(&flips).is_holds());
        let bad = births(2, |x, c| if c.get(1 - x) { int(0) } else { int(1) });
        let rep = is_attractive(&bad);
        assert!(rep.is_fails());
        let Some(Witness::SiteConfigPair { site, lower, upper }) = rep.witness else { panic!() };
        assert!(bad.beta(site, lower) > bad.beta(site, upper));
    }

    #[test]
    fn independent_flip_examples() {
        let flips = RateTable::independent(s(3), &vec![int(1); 3], &vec![int(2); 3]).unwrap();
        assert!(has_independent_flips(&flips));
        assert!(!has_independent_flips(&RateTable::contact(s(3), &path(3), &int(1), &int(1)).unwrap()));
        let all_or_none = RateTable::from_fn(
            s(3),
            |x, c| if (0..3).filter(|&y| y != x).all(|y| c.get(y)) { int(1) } else { int(0) },
            |x, c| if (0..3).filter(|&y| y != x).all(|y| !c.get(y)) { int(1) } else { int(0) },
        )
        .unwrap();
        assert!(!has_independent_flips(&all_or_none));
        assert!(independent_flips_report(&all_or_none).is_fails());
    }

    #[test]
    fn death_exemption() {
        let contact = RateTable::contact(s(3), &path(3), &int(1), &int(1)).unwrap();
        assert!(death_constant_on_nonzero(&contact).is_holds());
        let bad = RateTable::from_fn(s(3), |_, _| int(0), |x, c| int(1) + if c.get((x + 1) % 3) { int(1) } else { int(0) })
            .unwrap();
        assert!(death_constant_on_nonzero(&bad).is_fails());
        let exempt = RateTable::from_fn(s(3), |_, _| int(0), |_, c| if c.index() == 0 { int(5) } else { int(2) })
            .unwrap();
        assert!(death_constant_on_nonzero(&exempt).is_holds());
        assert!(constant_deaths(&exempt).is_fails());
    }

    #[test]
    fn contact_process_is_additive() {
        let lambda = rat(5, 3);
        let r = RateTable::contact(s(4), &path(4), &lambda, &int(1)).unwrap();
        for x in 0..4 {
            let d = additive_decomposition(&r, x);
            assert!(d.additive && d.exact);
            for a in 1..16usize {
                let set = sites_of(a);
                let expected = if set.len() == 1 && (set[0] + 1 == x || x + 1 == set[0]) { lambda.clone() } else { int(0) };
                assert_eq!(d.coefficient(&set), expected, "x={x} A={set:?}");
            }
        }
        assert!(additive_births(&r).is_holds());
    }

    #[test]
    fn all_others_occupied_is_not_additive() {
        let r = births(3, |x, c| if (0..3).filter(|&y| y != x).all(|y| c.get(y)) { int(1) } else { int(0) });
        let d = additive_decomposition(&r, 0);
        assert!(d.exact);
        assert!(!d.additive);
        assert_eq!(d.coefficient(&[1, 2]), int(-1));
        assert_eq!(d.coefficient(&[1]), int(1));
        assert!(additive_births(&r).is_fails());
        let zero = RateTable::zero(s(3));
        let dz = additive_decomposition(&zero, 1);
        assert!(dz.additive && dz.coefficients.is_empty());
    }

    #[test]
    fn reconstruction_needs_zero_at_origin() {
        let r = births(2, |_, _| int(3));
        assert!(!additive_decomposition(&r, 0).exact);
        assert!(additive_births(&r).is_fails());
    }

    #[test]
    fn submodular_examples() {
        let contact = RateTable::contact(s(4), &path(4), &int(1), &int(1)).unwrap();
        assert!(submodular_births(&contact).is_holds());
        let monomial = births(3, |x, c| if x == 0 && c.get(1) && c.get(2) { int(1) } else { int(0) });
        let rep = check_submodular_births(&monomial, 0, false);
        let Some(Witness::SiteConfigs { eta, zeta, .. }) = rep.witness else { panic!() };
        assert_eq!((eta.to_string(), zeta.to_string()), ("010".to_string(), "001".to_string()));
        let constant = births(3, |_, _| int(2));
        let rep = check_submodular_births(&constant, 1, true);
        assert!(rep.is_holds());
        assert_eq!(rep.margin.unwrap().to_f64(), 0.0);
    }

    #[test]
    fn local_pairs_decide_submodularity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let table: Vec<i64> = (0..16).map(|_| rng.random_range(0..4)).collect();
            let r = births(4, |_, c| int(table[c.index()]));
            for u in 0..4 {
                let fast = check_submodular_births(&r, u, false).is_holds();
                let full = check_submodular_births(&r, u, true).is_holds();
                assert_eq!(fast, full);
            }
        }
    }

    #[test]
    fn additive_implies_submodular_and_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let c: Vec<i64> = (0..16).map(|_| rng.random_range(0..3)).collect();
            let r = births(4, |_, eta| (1..16usize).filter(|a| a & eta.index() != 0).map(|a| int(c[a])).sum());
            assert!(additive_births(&r).is_holds());
            assert!(submodular_births(&r).is_holds());
            assert!(is_attractive(&r).is_holds());
        }
    }
}
