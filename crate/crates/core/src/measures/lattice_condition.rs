use super::{normalize, CheckOptions, Measure, Property, PropertyReport, WeightVector, Witness};
use crate::error::Result;
use crate::lattice::{Config, SiteSet};
use crate::par::map_collect;
use crate::rational::Scalar;

fn slack<T: Scalar>(mu: &Measure<T>, eta: usize, zeta: usize) -> T {
    let p = mu.probs();
    p[eta & zeta].clone() * p[eta | zeta].clone() - p[eta].clone() * p[zeta].clone()
}

/// Pairs differing at exactly two sites, one up and one down:
/// `(γ + x, γ + y)` with `γ(x) = γ(y) = 0`, `x < y`.
fn local_pairs(sites: SiteSet) -> Vec<(usize, usize)> {
    let n = sites.n();
    let mut out = Vec::new();
    for g in 0..sites.size() {
        for x in 0..n {
            for y in x + 1..n {
                if g >> x & 1 == 0 && g >> y & 1 == 0 {
                    let (a, b) = (g | 1 << x, g | 1 << y);
                    out.push((a.min(b), a.max(b)));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Incomparable pairs `η < ζ` in index order; comparable pairs hold with
/// equality.
fn all_pairs(sites: SiteSet) -> Vec<(usize, usize)> {
    let size = sites.size();
    (0..size)
        .flat_map(|a| (a + 1..size).map(move |b| (a, b)))
        .filter(|&(a, b)| a & b != a && a & b != b)
        .collect()
}

/// Lattice condition `μ(η∧ζ)μ(η∨ζ) >= μ(η)μ(ζ)`. Zeros are allowed; the report
/// records whether the weights are strictly positive. Strictly positive
/// weights are decided on pairs differing at two sites; otherwise every pair
/// is checked. Margins are taken on the normalized measure.
pub fn satisfies_lattice<T: Scalar>(w: &WeightVector<T>, opts: &CheckOptions) -> Result<PropertyReport> {
    let mu = normalize(w)?;
    let sites = mu.sites();
    let positive = w.is_strictly_positive();
    let pairs = if positive && !opts.full_margin { local_pairs(sites) } else { all_pairs(sites) };
    let tol = opts.tolerance;
    let slacks = map_collect(0..pairs.len(), opts.parallelism, |k| slack(&mu, pairs[k].0, pairs[k].1));
    let config = |i: usize| Config::new(sites, i as u64).expect("index in range");
    let mut report = match slacks.iter().position(|s| s.below(tol)) {
        Some(k) => {
            let (eta, zeta) = pairs[k];
            let witness = Witness::ConfigPair { eta: config(eta), zeta: config(zeta) };
            let margin = if opts.full_margin { min_slack(&slacks) } else { slacks[k].clone() };
            PropertyReport::fails(Property::Lattice, witness, Some(margin.to_margin()))
        }
        None => {
            let margin = (!slacks.is_empty()).then(|| min_slack(&slacks).to_margin());
            PropertyReport::holds(Property::Lattice, margin)
        }
    };
    report.strictly_positive = Some(positive);
    if !positive {
        report = report.with_note("weights have zeros: checked every pair");
    }
    Ok(report)
}

fn min_slack<T: Scalar>(xs: &[T]) -> T {
    xs.iter()
        .skip(1)
        .fold(xs[0].clone(), |m, x| if *x < m { x.clone() } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Verdict;
    use crate::rational::{int, rat, Rational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(n: usize) -> SiteSet {
        SiteSet::new(n).unwrap()
    }

    fn brute(w: &[Rational]) -> bool {
        let size = w.len();
        (0..size).all(|a| (0..size).all(|b| w[a & b].clone() * w[a | b].clone() >= w[a].clone() * w[b].clone()))
    }

    #[test]
    fn product_holds_with_equality() {
        let mu = Measure::product(s(3), &[rat(1, 3), rat(2, 5), rat(1, 7)]).unwrap();
        let r = satisfies_lattice(&mu.as_weights(), &CheckOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.margin.unwrap().to_f64(), 0.0);
        assert_eq!(r.strictly_positive, Some(true));
    }

    #[test]
    fn local_and_full_agree_on_positive_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=4 {
            for _ in 0..200 {
                let w: Vec<Rational> = (0..1 << n).map(|_| int(rng.random_range(1..6))).collect();
                let wv = WeightVector::new(s(n), w.clone()).unwrap();
                let fast = satisfies_lattice(&wv, &CheckOptions::default()).unwrap();
                let full = satisfies_lattice(&wv, &CheckOptions { full_margin: true, ..Default::default() }).unwrap();
                assert_eq!(fast.verdict, full.verdict);
                assert_eq!(fast.is_holds(), brute(&w));
            }
        }
    }

    #[test]
    fn zeros_use_the_full_sweep() {
        // Only non-local pairs can fail here.
        let mut w = vec![int(0); 8];
        w[0b001] = int(1);
        w[0b110] = int(1);
        let r = satisfies_lattice(&WeightVector::new(s(3), w).unwrap(), &CheckOptions::default()).unwrap();
        assert!(r.is_fails());
        assert_eq!(r.strictly_positive, Some(false));
        let Some(Witness::ConfigPair { eta, zeta }) = r.witness else { panic!() };
        assert_eq!((eta.index(), zeta.index()), (1, 6));
    }

    #[test]
    fn sparse_random_agree_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let w: Vec<Rational> = (0..8).map(|_| int(rng.random_range(0..3) * rng.random_range(0..3))).collect();
            let Ok(wv) = WeightVector::new(s(3), w.clone()) else { continue };
            let r = satisfies_lattice(&wv, &CheckOptions::default()).unwrap();
            assert_eq!(r.is_holds(), brute(&w), "{w:?}");
            if let Some(Witness::ConfigPair { eta, zeta }) = r.witness {
                let (a, b) = (eta.index(), zeta.index());
                assert!(w[a & b].clone() * w[a | b].clone() < w[a].clone() * w[b].clone());
            }
        }
    }

    #[test]
    fn scale_invariant_margin() {
        let w = WeightVector::new(s(2), vec![int(3), int(1), int(2), int(5)]).unwrap();
        let a = satisfies_lattice(&w, &CheckOptions::default()).unwrap();
        let b = satisfies_lattice(&w.scale(&int(7)), &CheckOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.margin.unwrap().to_f64(), (15.0 - 2.0) / 121.0);
    }
}
