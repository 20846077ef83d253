use super::{CheckOptions, Measure, Property, PropertyReport, Witness};
use crate::error::Result;
use crate::lattice::enumerate_up_sets;
use crate::par::map_collect;
use crate::rational::Scalar;

/// Whether `lower <= upper` stochastically: `upper(U) >= lower(U)` for every
/// up-set `U`. The margin is the smallest slack over all up-sets.
pub fn stochastically_dominates<T: Scalar>(
    lower: &Measure<T>,
    upper: &Measure<T>,
    opts: &CheckOptions,
) -> Result<PropertyReport> {
    lower.sites().same_as(upper.sites())?;
    let family = enumerate_up_sets(lower.sites(), opts.allow_six)?;
    let masks = family.masks();
    let slacks = map_collect(0..masks.len(), opts.parallelism, |i| {
        upper.prob_event(masks[i]) - lower.prob_event(masks[i])
    });
    let min = slacks
        .iter()
        .fold(None::<&T>, |m, x| if m.is_none_or(|m| x < m) { Some(x) } else { m })
        .map(|m| m.to_margin());
    Ok(match slacks.iter().position(|s| s.below(opts.tolerance)) {
        Some(i) => PropertyReport::fails(Property::StochasticOrder, Witness::UpSet { u: family.get(i) }, min),
        None => PropertyReport::holds(Property::StochasticOrder, min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SiteSet;
    use crate::rational::{rat, Rational};

    #[test]
    fn product_order_matches_coordinatewise_order() {
        let s = SiteSet::new(2).unwrap();
        let grid: Vec<Rational> = (0..=4).map(|k| rat(k, 4)).collect();
        for p0 in &grid {
            for p1 in &grid {
                for q0 in &grid {
                    for q1 in &grid {
                        let lo = Measure::product(s, &[p0.clone(), p1.clone()]).unwrap();
                        let hi = Measure::product(s, &[q0.clone(), q1.clone()]).unwrap();
                        let r = stochastically_dominates(&lo, &hi, &CheckOptions::default()).unwrap();
                        assert_eq!(r.is_holds(), p0 <= q0 && p1 <= q1);
                        if let Some(Witness::UpSet { u }) = r.witness {
                            assert!(hi.prob_up_set(u) < lo.prob_up_set(u));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reflexive() {
        let s = SiteSet::new(3).unwrap();
        let mu = Measure::from_weights(s, (1..=8).map(crate::rational::int).collect()).unwrap();
        let r = stochastically_dominates(&mu, &mu, &CheckOptions::default()).unwrap();
        assert!(r.is_holds());
        assert_eq!(r.margin.unwrap().to_f64(), 0.0);
    }
}
