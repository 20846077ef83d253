use serde::{Deserialize, Serialize};

use super::{semigroup_function, Generator};
use crate::error::{Error, Result};

/// Smallest slacks of the three pointwise statements about `S(t)` for a
/// system with a single active birth site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactsMargins {
    /// `[S h][S fgh] - [S fh][S gh]`.
    pub product: f64,
    /// Smallest value of `S h`.
    pub positive: f64,
    /// `S h(η) - S h(η + y)`.
    pub decreasing: f64,
    /// `S h(η∨ζ) S h(η∧ζ) - S h(η) S h(ζ)`.
    pub log_supermodular: f64,
    /// `f_t(η + y) - f_t(η)` with `f_t = S(fh) / S h`.
    pub ratio_increasing: f64,
}

impl FactsMargins {
    pub fn holds(&self, tol: f64) -> bool {
        self.positive > 0.0
            && [self.product, self.decreasing, self.log_supermodular, self.ratio_increasing]
                .iter()
                .all(|m| *m >= -tol)
    }

    pub fn worst(&self) -> f64 {
        [self.product, self.decreasing, self.log_supermodular, self.ratio_increasing]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

fn times(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn min_over_raises(v: &[f64], n: usize, slack: impl Fn(f64, f64) -> f64) -> f64 {
    let mut m = f64::INFINITY;
    for c in 0..v.len() {
        for y in 0..n {
            if c >> y & 1 == 0 {
                m = m.min(slack(v[c], v[c | 1 << y]));
            }
        }
    }
    m
}

/// Evaluates all margins at time `t` for functions `f`, `g` and `h` given
/// by their values.
pub fn facts_audit(q: &Generator, f: &[f64], g: &[f64], h: &[f64], t: f64) -> Result<FactsMargins> {
    let size = q.sites().size();
    let n = q.sites().n();
    for v in [f, g, h] {
        if v.len() != size {
            return Err(Error::Length { expected: size, got: v.len() });
        }
    }
    let s = |v: &[f64]| semigroup_function(q, v, t);
    let sh = s(h)?;
    let sfh = s(&times(f, h))?;
    let sgh = s(&times(g, h))?;
    let sfgh = s(&times(&times(f, g), h))?;

    let product = (0..size)
        .map(|c| sh[c] * sfgh[c] - sfh[c] * sgh[c])
        .fold(f64::INFINITY, f64::min);
    let positive = sh.iter().copied().fold(f64::INFINITY, f64::min);
    let decreasing = min_over_raises(&sh, n, |lo, hi| lo - hi);
    let mut log_supermodular = f64::INFINITY;
    for a in 0..size {
        for b in a + 1..size {
            if a & b != a && a & b != b {
                log_supermodular = log_supermodular.min(sh[a | b] * sh[a & b] - sh[a] * sh[b]);
            }
        }
    }
    let ft: Vec<f64> = sfh.iter().zip(&sh).map(|(x, y)| x / y).collect();
    let ratio_increasing = min_over_raises(&ft, n, |lo, hi| hi - lo);
    Ok(FactsMargins { product, positive, decreasing, log_supermodular, ratio_increasing })
}
