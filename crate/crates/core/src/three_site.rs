//! Closed-form characterizations on three sites.
//!
//! Coordinates follow the site-0-first bit strings: `a = μ(111)`,
//! `b1 = μ(011)`, `b2 = μ(101)`, `b3 = μ(110)`, `c1 = μ(100)`, `c2 = μ(010)`,
//! `c3 = μ(001)`, `d = μ(000)`. Each system has three inequalities obtained
//! from the first by cycling the sites; slacks are `LHS - RHS` on the
//! normalized coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SiteSet;
use crate::measures::{Measure, WeightVector};
use crate::rational::{Rational, Scalar};

/// Configuration index of `a, b1, b2, b3, c1, c2, c3, d`.
pub const COORD_INDEX: [usize; 8] = [7, 6, 5, 3, 1, 2, 4, 0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum System {
    A,
    B,
    C,
    D,
    E,
    /// `a·d >= b_i·c_i`: the lattice pairs differing at all three sites.
    /// Implied by D and E when the measure is strictly positive.
    Cross,
}

impl System {
    pub const PAPER: [System; 5] = [System::A, System::B, System::C, System::D, System::E];
    pub const ALL: [System; 6] = [System::A, System::B, System::C, System::D, System::E, System::Cross];

    pub fn name(self) -> &'static str {
        match self {
            System::A => "A",
            System::B => "B",
            System::C => "C",
            System::D => "D",
            System::E => "E",
            System::Cross => "cross",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreeSiteCoords<T> {
    pub a: T,
    pub b: [T; 3],
    pub c: [T; 3],
    pub d: T,
}

impl<T: Scalar> ThreeSiteCoords<T> {
    pub fn from_weights(w: &[T]) -> Result<Self> {
        if w.len() != 8 {
            return Err(Error::Length { expected: 8, got: w.len() });
        }
        let at = |k: usize| w[COORD_INDEX[k]].clone();
        Ok(ThreeSiteCoords {
            a: at(0),
            b: [at(1), at(2), at(3)],
            c: [at(4), at(5), at(6)],
            d: at(7),
        })
    }

    pub fn from_measure(mu: &Measure<T>) -> Result<Self> {
        Self::from_weights(mu.probs())
    }

    /// Weight vector indexed by configuration mask.
    pub fn to_weights(&self) -> Vec<T> {
        let vals = [
            &self.a, &self.b[0], &self.b[1], &self.b[2], &self.c[0], &self.c[1], &self.c[2], &self.d,
        ];
        let mut w = vec![T::zero(); 8];
        for (k, v) in vals.into_iter().enumerate() {
            w[COORD_INDEX[k]] = v.clone();
        }
        w
    }

    pub fn to_weight_vector(&self) -> Result<WeightVector<T>> {
        WeightVector::new(SiteSet::new(3)?, self.to_weights())
    }

    pub fn total(&self) -> T {
        self.to_weights().into_iter().fold(T::zero(), |acc, x| acc + x)
    }

    pub fn normalized(&self) -> Result<Self> {
        let total = self.total();
        if total.is_zero() {
            return Err(Error::ZeroTotal);
        }
        let w: Vec<T> = self.to_weights().into_iter().map(|x| x / total.clone()).collect();
        Self::from_weights(&w)
    }

    /// Raw slacks, not normalized; homogeneous of degree two.
    fn raw_slacks(&self, system: System) -> [T; 3] {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let (bi, bj, bk) = (b[i].clone(), b[j].clone(), b[k].clone());
            let (ci, cj, ck) = (c[i].clone(), c[j].clone(), c[k].clone());
            match system {
                System::A => a.clone() * (cj + ck + d.clone()) - bi.clone() * (bj + bk + ci),
                System::B => d.clone() * (bj + bk + a.clone()) - ci.clone() * (cj + ck + bi),
                System::C => (bi + a.clone()) * (ci + d.clone()) - (ck + bj) * (bk + cj),
                System::D => bi * d.clone() - cj * ck,
                System::E => ci * a.clone() - bj * bk,
                System::Cross => a.clone() * d.clone() - bi * ci,
            }
        })
    }
}

/// Slacks of one system on the normalized coordinates.
pub fn margins<T: Scalar>(m: &ThreeSiteCoords<T>, system: System) -> Result<[T; 3]> {
    Ok(m.normalized()?.raw_slacks(system))
}

fn holds<T: Scalar>(slacks: &[T; 3], tol: f64) -> bool {
    slacks.iter().all(|s| !s.below(tol))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemMargins {
    pub system: System,
    pub slacks: Vec<crate::rational::Margin>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeSiteVerdicts {
    pub lattice: bool,
    pub dca: bool,
    pub downward_fkg: bool,
    pub associated: bool,
    pub margins: Vec<SystemMargins>,
}

impl ThreeSiteVerdicts {
    /// lattice ⇒ DCA ⇒ downward FKG ⇒ association.
    pub fn respects_chain(&self) -> bool {
        (!self.lattice || self.dca) && (!self.dca || self.downward_fkg) && (!self.downward_fkg || self.associated)
    }

    pub fn system(&self, s: System) -> &SystemMargins {
        self.margins.iter().find(|m| m.system == s).expect("all systems present")
    }

    /// First failing inequality of a system, if any.
    pub fn first_failure(&self, s: System, tol: f64) -> Option<usize> {
        self.system(s).slacks.iter().position(|m| match m {
            crate::rational::Margin::Exact(r) => *r < Rational::from_integer(0.into()),
            crate::rational::Margin::Float(x) => *x < -tol,
        })
    }
}

/// Verdicts for the four properties: lattice ⇔ D∧E∧cross, DCA ⇔ downward
/// FKG ⇔ A∧C∧D, association ⇔ A∧B∧C. Float coordinates use `tol` on the
/// normalized slacks.
pub fn classify<T: Scalar>(m: &ThreeSiteCoords<T>, tol: f64) -> Result<ThreeSiteVerdicts> {
    let norm = m.normalized()?;
    let mut ok = [false; 6];
    let mut out = Vec::with_capacity(6);
    for (k, system) in System::ALL.into_iter().enumerate() {
        let slacks = norm.raw_slacks(system);
        ok[k] = holds(&slacks, tol);
        out.push(SystemMargins {
            system,
            slacks: slacks.iter().map(|s| s.to_margin()).collect(),
            holds: ok[k],
        });
    }
    let [a, b, c, d, e, cross] = ok;
    Ok(ThreeSiteVerdicts {
        lattice: d && e && cross,
        dca: a && c && d,
        downward_fkg: a && c && d,
        associated: a && b && c,
        margins: out,
    })
}

/// `a·d >= b_i·c_i` for each `i`. Requires (A) and (D) to hold, under which
/// the implication must come out true.
pub fn cross_implication<T: Scalar>(m: &ThreeSiteCoords<T>) -> Result<bool> {
    let norm = m.normalized()?;
    if !holds(&norm.raw_slacks(System::A), 0.0) || !holds(&norm.raw_slacks(System::D), 0.0) {
        return Err(Error::Precondition("(A) and (D) must hold".into()));
    }
    Ok(holds(&norm.raw_slacks(System::Cross), 0.0))
}

/// Named-coordinate JSON form: `{"a": .., "b1": .., .., "d": ..}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCoords {
    pub a: crate::rational::RationalRepr,
    pub b1: crate::rational::RationalRepr,
    pub b2: crate::rational::RationalRepr,
    pub b3: crate::rational::RationalRepr,
    pub c1: crate::rational::RationalRepr,
    pub c2: crate::rational::RationalRepr,
    pub c3: crate::rational::RationalRepr,
    pub d: crate::rational::RationalRepr,
}

impl NamedCoords {
    pub fn to_coords(&self) -> Result<ThreeSiteCoords<Rational>> {
        let coords = ThreeSiteCoords {
            a: self.a.to_rational()?,
            b: [self.b1.to_rational()?, self.b2.to_rational()?, self.b3.to_rational()?],
            c: [self.c1.to_rational()?, self.c2.to_rational()?, self.c3.to_rational()?],
            d: self.d.to_rational()?,
        };
        coords.to_weight_vector()?;
        Ok(coords)
    }

    pub fn from_coords(m: &ThreeSiteCoords<Rational>) -> Self {
        let r = |x: &Rational| crate::rational::RationalRepr::from(x);
        NamedCoords {
            a: r(&m.a),
            b1: r(&m.b[0]),
            b2: r(&m.b[1]),
            b3: r(&m.b[2]),
            c1: r(&m.c[0]),
            c2: r(&m.c[1]),
            c3: r(&m.c[2]),
            d: r(&m.d),
        }
    }
}
