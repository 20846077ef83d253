use nalgebra::DMatrix;

use super::classify::first_dependent_site;
use super::{Generator, RateTable};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::rational::Scalar;

/// Poisson tail left out by default.
pub const TAIL: f64 = 1e-13;

/// Tighter tail used to re-check a reported violation.
pub const RETRY_TAIL: f64 = 1e-16;

#[derive(Clone, Copy)]
enum Side {
    /// Row vector: measures.
    Left,
    /// Column vector: functions.
    Right,
}

/// One step of `P = I + Q/Λ`.
fn step(q: &Generator, v: &[f64], lambda: f64, side: Side) -> Vec<f64> {
    let n = q.sites().n();
    let rates = q.rates_f64();
    let exit = |c: usize| rates[c * n..(c + 1) * n].iter().sum::<f64>();
    (0..v.len())
        .map(|c| {
            let stay = v[c] * (1.0 - exit(c) / lambda);
            let moved: f64 = (0..n)
                .map(|x| {
                    let d = c ^ 1 << x;
                    match side {
                        Side::Left => v[d] * rates[d * n + x],
                        Side::Right => v[d] * rates[c * n + x],
                    }
                })
                .sum();
            stay + moved / lambda
        })
        .collect()
}

/// `v e^{tQ}` or `e^{tQ} v` as a Poisson mixture of powers of `P`. Terms
/// are added past the Poisson mode until the remaining weight is below
/// `tail`; weights are formed in log space.
fn uniformize(q: &Generator, v: &[f64], t: f64, tail: f64, side: Side) -> Result<Vec<f64>> {
    if t.is_nan() || t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let lambda = q.max_exit_rate();
    if lambda == 0.0 || t == 0.0 {
        return Ok(v.to_vec());
    }
    let rate = lambda * t;
    let log_rate = rate.ln();
    let mut acc = vec![0.0; v.len()];
    let mut power = v.to_vec();
    let mut log_fact = 0.0;
    let mut kept = 0.0;
    for k in 0u64.. {
        if k > 0 {
            log_fact += (k as f64).ln();
            power = step(q, &power, lambda, side);
        }
        let w = (k as f64 * log_rate - rate - log_fact).exp();
        kept += w;
        for (a, p) in acc.iter_mut().zip(&power) {
            *a += w * p;
        }
        let kf = k as f64;
        if kf + 2.0 > rate {
            // Geometric bound on Σ_{j>k} w_j.
            let next = w * rate / (kf + 1.0);
            let bound = next / (1.0 - rate / (kf + 2.0));
            if bound < tail {
                break;
            }
        }
    }
    if let Side::Left = side {
        // Rescale by the kept Poisson weight.
        for a in acc.iter_mut() {
            *a /= kept;
        }
    }
    Ok(acc)
}

/// `μ S(t)` with the default truncation.
pub fn semigroup_apply<T: Scalar>(q: &Generator, mu: &Measure<T>, t: f64) -> Result<Measure<f64>> {
    semigroup_apply_with_tail(q, mu, t, TAIL)
}

pub fn semigroup_apply_with_tail<T: Scalar>(q: &Generator, mu: &Measure<T>, t: f64, tail: f64) -> Result<Measure<f64>> {
    q.sites().same_as(mu.sites())?;
    let v: Vec<f64> = mu.probs().iter().map(|p| p.to_f64()).collect();
    let out = uniformize(q, &v, t, tail, Side::Left)?;
    Measure::new(mu.sites(), out.into_iter().map(|p| p.max(0.0)).collect())
}

/// `S(t) f`.
pub fn semigroup_function(q: &Generator, f: &[f64], t: f64) -> Result<Vec<f64>> {
    if f.len() != q.sites().size() {
        return Err(Error::Length { expected: q.sites().size(), got: f.len() });
    }
    uniformize(q, f, t, TAIL, Side::Right)
}

/// `exp(tQ)` by nalgebra's dense exponential; used to cross-check
/// uniformization.
pub fn dense_oracle(q: &Generator, t: f64) -> Result<DMatrix<f64>> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok((q.to_dense() * t).exp())
}

/// Product of two-state kernels for rates that do not depend on the
/// configuration: `P_t(η, γ) = Π_z p_t(z, η(z), γ(z))`.
pub fn independent_flip_kernel(r: &RateTable, t: f64) -> Result<DMatrix<f64>> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if let Some(x) = first_dependent_site(r) {
        return Err(Error::NotIndependentFlips(x));
    }
    let sites = r.sites();
    let zero = sites.config(0)?;
    let kernels: Vec<[[f64; 2]; 2]> = (0..sites.n())
        .map(|z| {
            let b = r.beta(z, zero).to_f64();
            let d = r.delta(z, zero).to_f64();
            let s = b + d;
            if s == 0.0 {
                return [[1.0, 0.0], [0.0, 1.0]];
            }
            let m = -(-s * t).exp_m1();
            let up = b / s * m;
            let down = d / s * m;
            [[1.0 - up, up], [down, 1.0 - down]]
        })
        .collect();
    let size = sites.size();
    Ok(DMatrix::from_fn(size, size, |i, j| {
        kernels
            .iter()
            .enumerate()
            .map(|(z, k)| k[i >> z & 1][j >> z & 1])
            .product()
    }))
}

/// `μ [S_1(t/m) S_2(t/m)]^m`.
pub fn trotter_compose<T: Scalar>(
    q1: &Generator,
    q2: &Generator,
    mu: &Measure<T>,
    t: f64,
    steps: usize,
) -> Result<Measure<f64>> {
    q1.sites().same_as(q2.sites())?;
    q1.sites().same_as(mu.sites())?;
    if steps == 0 {
        return Err(Error::Input("Trotter composition needs at least one step".into()));
    }
    let h = t / steps as f64;
    let mut cur = mu.to_f64();
    for _ in 0..steps {
        cur = semigroup_apply(q2, &semigroup_apply(q1, &cur, h)?, h)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_generator;
    use crate::lattice::SiteSet;
    use crate::rational::{int, rat, Rational};

    fn s(n: usize) -> SiteSet {
        SiteSet::new(n).unwrap()
    }

    #[test]
    fn identity_at_time_zero() {
        let r = RateTable::contact(s(3), &[(0, 1), (1, 2)], &int(2), &int(1)).unwrap();
        let mu = Measure::from_weights(s(3), (1..=8).map(int).collect::<Vec<Rational>>()).unwrap();
        let out = semigroup_apply(&build_generator(&r), &mu, 0.0).unwrap();
        assert!(out.max_abs_diff(&mu.to_f64()) == 0.0);
        assert!(semigroup_apply(&build_generator(&r), &mu, -1.0).is_err());
    }

    #[test]
    fn two_state_chain_equilibrates() {
        let r = RateTable::independent(s(1), &[int(1)], &[int(1)]).unwrap();
        let mu = Measure::<Rational>::point_mass(s(1).config(0).unwrap());
        let out = semigroup_apply(&build_generator(&r), &mu, 20.0).unwrap();
        assert!((out.probs()[1] - 0.5).abs() < 1e-9);
        for t in [0.1, 0.7, 3.0] {
            let k = independent_flip_kernel(&r, t).unwrap();
            assert!((k[(0, 1)] - (1.0 - (-2.0 * t).exp()) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_matches_expm() {
        let r = RateTable::independent(s(2), &[rat(1, 3), int(2)], &[rat(3, 2), rat(1, 5)]).unwrap();
        let q = build_generator(&r);
        for t in [0.0, 0.3, 1.0, 4.0] {
            let k = independent_flip_kernel(&r, t).unwrap();
            let e = dense_oracle(&q, t).unwrap();
            assert!((k - e).amax() < 1e-10);
        }
        let contact = RateTable::contact(s(2), &[(0, 1)], &int(1), &int(1)).unwrap();
        assert!(matches!(independent_flip_kernel(&contact, 1.0), Err(Error::NotIndependentFlips(_))));
    }

    #[test]
    fn functions_and_measures_pair_up() {
        let r = RateTable::contact(s(3), &[(0, 1), (1, 2)], &int(1), &rat(1, 2)).unwrap();
        let q = build_generator(&r);
        let mu = Measure::from_weights(s(3), (1..=8).map(int).collect::<Vec<Rational>>()).unwrap();
        let f: Vec<f64> = (0..8).map(|i| (i * i) as f64).collect();
        let t = 0.8;
        let lhs: f64 = semigroup_apply(&q, &mu, t).unwrap().probs().iter().zip(&f).map(|(p, v)| p * v).sum();
        let sf = semigroup_function(&q, &f, t).unwrap();
        let rhs: f64 = mu.to_f64().probs().iter().zip(&sf).map(|(p, v)| p * v).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn trotter_with_zero_second_generator() {
        let r = RateTable::contact(s(3), &[(0, 1), (1, 2)], &int(1), &int(1)).unwrap();
        let q = build_generator(&r);
        let z = build_generator(&RateTable::zero(s(3)));
        let mu = Measure::<Rational>::uniform(s(3));
        let a = trotter_compose(&q, &z, &mu, 1.0, 3).unwrap();
        let b = semigroup_apply(&q, &mu, 1.0).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }
}
