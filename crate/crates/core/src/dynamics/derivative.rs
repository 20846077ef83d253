use super::{semigroup_apply, Generator};
use crate::error::{Error, Result};
use crate::lattice::SiteSet;
use crate::measures::Measure;
use crate::rational::{int, Rational, Scalar};

/// `coef · Π μ(E_i)` over at most two events, each a bitset over
/// configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: Rational,
    pub events: Vec<u64>,
}

/// Polynomial of degree at most two in event probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    sites: SiteSet,
    terms: Vec<Term>,
}

impl Functional {
    pub fn new(sites: SiteSet, terms: Vec<Term>) -> Result<Self> {
        let all = sites.all_configs_mask();
        for (k, t) in terms.iter().enumerate() {
            if t.events.len() > 2 {
                return Err(Error::MalformedFunctional(format!("term {k} has degree {}", t.events.len())));
            }
            if t.events.iter().any(|e| e & !all != 0) {
                return Err(Error::MalformedFunctional(format!("term {k} names configurations beyond 2^n")));
            }
        }
        Ok(Functional { sites, terms })
    }

    pub fn sites(&self) -> SiteSet {
        self.sites
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn linear(sites: SiteSet, event: u64) -> Result<Self> {
        Self::new(sites, vec![Term { coef: int(1), events: vec![event] }])
    }

    /// `μ(U∩V) - μ(U)μ(V)`.
    pub fn covariance(sites: SiteSet, u: u64, v: u64) -> Result<Self> {
        Self::new(
            sites,
            vec![Term { coef: int(1), events: vec![u & v] }, Term { coef: int(-1), events: vec![u, v] }],
        )
    }

    /// `μ(E11)μ(E00) - μ(E10)μ(E01)`.
    pub fn determinant(sites: SiteSet, e11: u64, e00: u64, e10: u64, e01: u64) -> Result<Self> {
        Self::new(
            sites,
            vec![Term { coef: int(1), events: vec![e11, e00] }, Term { coef: int(-1), events: vec![e10, e01] }],
        )
    }

    /// `μ(E∩U∩V)μ(E) - μ(E∩U)μ(E∩V)`: the covariance under `μ{·|E}` times
    /// `μ(E)²`.
    pub fn conditional_covariance(sites: SiteSet, e: u64, u: u64, v: u64) -> Result<Self> {
        Self::new(
            sites,
            vec![
                Term { coef: int(1), events: vec![e & u & v, e] },
                Term { coef: int(-1), events: vec![e & u, e & v] },
            ],
        )
    }

    pub fn evaluate<T: Scalar>(&self, mu: &Measure<T>) -> Result<T> {
        self.sites.same_as(mu.sites())?;
        Ok(self.terms.iter().fold(T::zero(), |acc, t| {
            let prod = t.events.iter().fold(T::one(), |p, &e| p * mu.prob_event(e));
            acc + T::from_rational(&t.coef) * prod
        }))
    }
}

fn event_mass(v: &[Rational], mut e: u64) -> Rational {
    let mut acc = int(0);
    while e != 0 {
        acc += &v[e.trailing_zeros() as usize];
        e &= e - 1;
    }
    acc
}

/// `d/dt F(μS(t))` at `t = 0`, exactly, from `d/dt μS(t)|_0 = μQ`.
pub fn derivative_at_zero(q: &Generator, mu: &Measure<Rational>, f: &Functional) -> Result<Rational> {
    q.sites().same_as(mu.sites())?;
    f.sites.same_as(mu.sites())?;
    let dmu = q.left_apply_exact(mu.probs());
    let mut total = int(0);
    for t in &f.terms {
        let mass: Vec<Rational> = t.events.iter().map(|&e| mu.prob_event(e)).collect();
        let dmass: Vec<Rational> = t.events.iter().map(|&e| event_mass(&dmu, e)).collect();
        let d = match t.events.len() {
            0 => int(0),
            1 => dmass[0].clone(),
            _ => &dmass[0] * &mass[1] + &mass[0] * &dmass[1],
        };
        total += &t.coef * d;
    }
    Ok(total)
}

/// Second-order one-sided difference `(-3F(0) + 4F(h) - F(2h)) / 2h`; the
/// semigroup is only defined forward in time.
pub fn finite_difference(q: &Generator, mu: &Measure<Rational>, f: &Functional, h: f64) -> Result<f64> {
    let f0 = f.evaluate(&mu.to_f64())?;
    let f1 = f.evaluate(&semigroup_apply(q, mu, h)?)?;
    let f2 = f.evaluate(&semigroup_apply(q, mu, 2.0 * h)?)?;
    Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_generator, RateTable};
    use crate::rational::rat;

    fn s(n: usize) -> SiteSet {
        SiteSet::new(n).unwrap()
    }

    fn coord_event(sites: SiteSet, x: usize) -> u64 {
        sites.configs().filter(|c| c.get(x)).fold(0, |acc, c| acc | 1 << c.index())
    }

    #[test]
    fn linear_under_zero_generator() {
        let q = build_generator(&RateTable::zero(s(2)));
        let mu = Measure::from_weights(s(2), vec![int(1), int(2), int(3), int(4)]).unwrap();
        let f = Functional::linear(s(2), 0b0110).unwrap();
        assert_eq!(derivative_at_zero(&q, &mu, &f).unwrap(), int(0));
    }

    #[test]
    fn rejects_malformed() {
        let bad = Term { coef: int(1), events: vec![1, 2, 4] };
        assert!(matches!(Functional::new(s(2), vec![bad]), Err(Error::MalformedFunctional(_))));
        assert!(Functional::linear(s(2), 1 << 4).is_err());
    }

    #[test]
    fn decreasing_birth_product_closed_form() {
        // β(x, η) = 1 - η(y), no deaths; at product(ρ, λ) the covariance of
        // the two coordinates moves at rate -(1-ρ)(1-λ)(ρ+λ).
        let sites = s(2);
        let r = RateTable::from_fn(sites, |x, c| if c.get(1 - x) { int(0) } else { int(1) }, |_, _| int(0)).unwrap();
        let q = build_generator(&r);
        let f = Functional::covariance(sites, coord_event(sites, 0), coord_event(sites, 1)).unwrap();
        for a in 1..8 {
            for b in 1..8 {
                let (rho, lam) = (rat(a, 8), rat(b, 8));
                let mu = Measure::product(sites, &[rho.clone(), lam.clone()]).unwrap();
                let expected = -(int(1) - &rho) * (int(1) - &lam) * (&rho + &lam);
                assert_eq!(derivative_at_zero(&q, &mu, &f).unwrap(), expected);
            }
        }
    }

    #[test]
    fn matches_finite_differences() {
        let sites = s(3);
        let r = RateTable::contact(sites, &[(0, 1), (1, 2)], &rat(3, 2), &rat(1, 2)).unwrap();
        let q = build_generator(&r);
        let mu = Measure::from_weights(sites, (1..=8).map(int).collect()).unwrap();
        let f = Functional::conditional_covariance(sites, 0b0101_0101, coord_event(sites, 1), coord_event(sites, 2))
            .unwrap();
        let exact = derivative_at_zero(&q, &mu, &f).unwrap().to_f64();
        let fd = finite_difference(&q, &mu, &f, 1e-5).unwrap();
        assert!((exact - fd).abs() < 1e-6, "{exact} vs {fd}");
    }
}
