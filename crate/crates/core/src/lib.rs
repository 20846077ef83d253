//! Exact checkers for correlation properties of measures on `{0,1}^S` and
//! the spin-system semigroups acting on them.

pub mod error;
pub mod lattice;
pub mod measures;
pub mod par;
pub mod rational;
pub mod dynamics;
pub mod harness;
pub mod io;
pub mod three_site;

pub use error::{Error, Result};
pub use lattice::{Config, RealFunction, SiteSet, UpSet};
pub use measures::{CheckOptions, Measure, PropertyReport, Verdict, WeightVector, Witness};
pub use par::Parallelism;
pub use rational::{parse_rational, Rational};
