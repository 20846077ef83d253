//! Spin systems: rate tables, generators, semigroups and rate classifiers.

mod classify;
mod derivative;
mod facts;
mod semigroup;

pub use classify::{
    additive_births, additive_decomposition, check_submodular_births, constant_deaths,
    death_constant_on_nonzero, has_independent_flips, independent_flips_report, is_attractive,
    submodular_births, AdditiveDecomposition, SetCoefficient,
};
pub use derivative::{derivative_at_zero, finite_difference, Functional, Term};
pub use facts::{facts_audit, FactsMargins};
pub use semigroup::{
    dense_oracle, independent_flip_kernel, semigroup_apply, semigroup_apply_with_tail, semigroup_function,
    trotter_compose, RETRY_TAIL, TAIL,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Config, SiteSet};
use crate::rational::{format_rational, int, Rational, RationalRepr, Scalar};

/// Birth rates `β(x, ·)` and death rates `δ(x, ·)` per site, stored over all
/// configurations. Entries never depend on the site's own bit.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    sites: SiteSet,
    beta: Vec<Vec<Rational>>,
    delta: Vec<Vec<Rational>>,
}

impl RateTable {
    /// Values at configurations with `η(x) = 1` are replaced by those at
    /// `η(x) = 0`.
    pub fn new(sites: SiteSet, beta: Vec<Vec<Rational>>, delta: Vec<Vec<Rational>>) -> Result<Self> {
        for table in [&beta, &delta] {
            if table.len() != sites.n() {
                return Err(Error::Length { expected: sites.n(), got: table.len() });
            }
            for (x, row) in table.iter().enumerate() {
                if row.len() != sites.size() {
                    return Err(Error::Length { expected: sites.size(), got: row.len() });
                }
                if let Some(c) = row.iter().position(|v| *v < int(0)) {
                    return Err(Error::NegativeRate { site: x, config: c });
                }
            }
        }
        let symmetrize = |table: Vec<Vec<Rational>>| -> Vec<Vec<Rational>> {
            table
                .into_iter()
                .enumerate()
                .map(|(x, row)| (0..row.len()).map(|c| row[c & !(1 << x)].clone()).collect())
                .collect()
        };
        Ok(RateTable { sites, beta: symmetrize(beta), delta: symmetrize(delta) })
    }

    pub fn from_fn(
        sites: SiteSet,
        beta: impl Fn(usize, Config) -> Rational,
        delta: impl Fn(usize, Config) -> Rational,
    ) -> Result<Self> {
        let table = |f: &dyn Fn(usize, Config) -> Rational| -> Vec<Vec<Rational>> {
            (0..sites.n()).map(|x| sites.configs().map(|c| f(x, c)).collect()).collect()
        };
        Self::new(sites, table(&beta), table(&delta))
    }

    pub fn zero(sites: SiteSet) -> Self {
        let z = vec![vec![int(0); sites.size()]; sites.n()];
        RateTable { sites, beta: z.clone(), delta: z }
    }

    /// Constant rates per site.
    pub fn independent(sites: SiteSet, beta: &[Rational], delta: &[Rational]) -> Result<Self> {
        if beta.len() != sites.n() || delta.len() != sites.n() {
            return Err(Error::Length { expected: sites.n(), got: beta.len().min(delta.len()) });
        }
        Self::from_fn(sites, |x, _| beta[x].clone(), |x, _| delta[x].clone())
    }

    /// Contact process: `β(x, η) = λ · #{occupied neighbours}`, `δ ≡ delta`.
    pub fn contact(sites: SiteSet, edges: &[(usize, usize)], lambda: &Rational, delta: &Rational) -> Result<Self> {
        let mut nbrs = vec![Vec::new(); sites.n()];
        for &(i, j) in edges {
            sites.check_site(i)?;
            sites.check_site(j)?;
            if i == j {
                return Err(Error::Input(format!("self-loop at site {i}")));
            }
            nbrs[i].push(j);
            nbrs[j].push(i);
        }
        Self::from_fn(
            sites,
            |x, c| lambda.clone() * int(nbrs[x].iter().filter(|&&y| c.get(y)).count() as i64),
            |_, _| delta.clone(),
        )
    }

    pub fn sites(&self) -> SiteSet {
        self.sites
    }

    pub fn beta(&self, x: usize, c: Config) -> &Rational {
        &self.beta[x][c.index()]
    }

    pub fn delta(&self, x: usize, c: Config) -> &Rational {
        &self.delta[x][c.index()]
    }

    pub fn beta_row(&self, x: usize) -> &[Rational] {
        &self.beta[x]
    }

    pub fn delta_row(&self, x: usize) -> &[Rational] {
        &self.delta[x]
    }

    /// Rate at which site `x` flips from configuration index `c`.
    pub fn flip_rate(&self, x: usize, c: usize) -> &Rational {
        if c >> x & 1 == 1 {
            &self.delta[x][c]
        } else {
            &self.beta[x][c]
        }
    }

    pub fn add(&self, other: &RateTable) -> Result<RateTable> {
        self.sites.same_as(other.sites)?;
        let sum = |a: &[Vec<Rational>], b: &[Vec<Rational>]| -> Vec<Vec<Rational>> {
            a.iter()
                .zip(b)
                .map(|(r, s)| r.iter().zip(s).map(|(u, v)| u + v).collect())
                .collect()
        };
        Ok(RateTable { sites: self.sites, beta: sum(&self.beta, &other.beta), delta: sum(&self.delta, &other.delta) })
    }

    /// Keeps only the rates of the listed sites.
    pub fn restrict(&self, keep: &[usize]) -> RateTable {
        let mut out = RateTable::zero(self.sites);
        for &x in keep {
            out.beta[x] = self.beta[x].clone();
            out.delta[x] = self.delta[x].clone();
        }
        out
    }
}

/// Spin-system JSON: explicit tables keyed by site, or the contact shorthand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpinSystemJson {
    Contact {
        model: ContactModel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        edges: Vec<(usize, usize)>,
        lambda: RationalRepr,
        delta: RationalRepr,
    },
    Table {
        n: usize,
        #[serde(default)]
        beta: BTreeMap<String, Vec<RationalRepr>>,
        #[serde(default)]
        delta: BTreeMap<String, Vec<RationalRepr>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactModel {
    Contact,
}

impl SpinSystemJson {
    pub fn to_rates(&self) -> Result<RateTable> {
        match self {
            SpinSystemJson::Contact { n, edges, lambda, delta, .. } => {
                let inferred = edges.iter().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(1);
                let sites = SiteSet::new(n.unwrap_or(inferred))?;
                RateTable::contact(sites, edges, &lambda.to_rational()?, &delta.to_rational()?)
            }
            SpinSystemJson::Table { n, beta, delta } => {
                let sites = SiteSet::new(*n)?;
                let read = |map: &BTreeMap<String, Vec<RationalRepr>>| -> Result<Vec<Vec<Rational>>> {
                    let mut table = vec![vec![int(0); sites.size()]; sites.n()];
                    for (key, row) in map {
                        let x: usize = key
                            .parse()
                            .map_err(|_| Error::Input(format!("site key {key:?} is not an index")))?;
                        sites.check_site(x)?;
                        if row.len() != sites.size() {
                            return Err(Error::Length { expected: sites.size(), got: row.len() });
                        }
                        table[x] = row.iter().map(|r| r.to_rational()).collect::<Result<_>>()?;
                    }
                    Ok(table)
                };
                RateTable::new(sites, read(beta)?, read(delta)?)
            }
        }
    }

    /// Canonical table form.
    pub fn from_rates(r: &RateTable) -> Self {
        let dump = |rows: &[Vec<Rational>]| -> BTreeMap<String, Vec<RationalRepr>> {
            rows.iter()
                .enumerate()
                .map(|(x, row)| {
                    (x.to_string(), row.iter().map(|v| RationalRepr::Text(format_rational(v))).collect())
                })
                .collect()
        };
        SpinSystemJson::Table { n: r.sites.n(), beta: dump(&r.beta), delta: dump(&r.delta) }
    }
}

/// Single-flip rate matrix, stored sparsely as `rate[config * n + site]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    sites: SiteSet,
    rates: Vec<Rational>,
    rates_f64: Vec<f64>,
}

pub fn build_generator(r: &RateTable) -> Generator {
    let n = r.sites.n();
    let rates: Vec<Rational> = (0..r.sites.size())
        .flat_map(|c| (0..n).map(move |x| (c, x)))
        .map(|(c, x)| r.flip_rate(x, c).clone())
        .collect();
    let rates_f64 = rates.iter().map(|v| v.to_f64()).collect();
    Generator { sites: r.sites, rates, rates_f64 }
}

impl Generator {
    pub fn sites(&self) -> SiteSet {
        self.sites
    }

    /// `Q(c, c ⊕ x)`.
    pub fn rate(&self, c: usize, x: usize) -> &Rational {
        &self.rates[c * self.sites.n() + x]
    }

    pub(crate) fn rates_f64(&self) -> &[f64] {
        &self.rates_f64
    }

    pub fn exit_rate(&self, c: usize) -> Rational {
        let n = self.sites.n();
        self.rates[c * n..(c + 1) * n].iter().sum()
    }

    pub fn max_exit_rate(&self) -> f64 {
        let n = self.sites.n();
        (0..self.sites.size())
            .map(|c| self.rates_f64[c * n..(c + 1) * n].iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Generator) -> Result<Generator> {
        self.sites.same_as(other.sites)?;
        let rates: Vec<Rational> = self.rates.iter().zip(&other.rates).map(|(a, b)| a + b).collect();
        let rates_f64 = rates.iter().map(|v| v.to_f64()).collect();
        Ok(Generator { sites: self.sites, rates, rates_f64 })
    }

    /// Dense exact matrix; rows sum to zero.
    pub fn to_dense_exact(&self) -> Vec<Vec<Rational>> {
        let (n, size) = (self.sites.n(), self.sites.size());
        let mut q = vec![vec![int(0); size]; size];
        for (c, row) in q.iter_mut().enumerate() {
            for x in 0..n {
                row[c ^ 1 << x] = self.rate(c, x).clone();
            }
            row[c] = -self.exit_rate(c);
        }
        q
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let exact = self.to_dense_exact();
        let size = self.sites.size();
        nalgebra::DMatrix::from_fn(size, size, |i, j| exact[i][j].to_f64())
    }

    /// Row vector times `Q`, exactly.
    pub fn left_apply_exact(&self, v: &[Rational]) -> Vec<Rational> {
        let n = self.sites.n();
        (0..self.sites.size())
            .map(|z| {
                let inflow: Rational = (0..n).map(|x| &v[z ^ 1 << x] * self.rate(z ^ 1 << x, x)).sum();
                inflow - &v[z] * self.exit_rate(z)
            })
            .collect()
    }
}
