//! Concrete measurement theories: payload encodings and their post-processing.
//!
//! A [`Family`] knows how to check that a payload is a canonical measurement
//! over an outcome set of a given size, how to push it forward along a
//! function table, and (for finite families) how to list every measurement.
//! The functor laws are not trusted here; fragments validate them.

mod classical;
mod effect;
mod presented;
mod probabilistic;
mod unknown;
mod weird;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use classical::{Boolean, Classical};
pub use effect::{EffectAlgebra, EffectAlgebraFamily};
pub use presented::{Presented, Relation};
pub use probabilistic::{Delta, ProbMeas, RandomFunctions};
pub use unknown::UnknownFunctions;
pub use weird::Weird;

/// Canonical value of a measurement. Which variant a family uses is fixed by
/// the family; equality of payloads is equality of measurements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    /// A function `S → X` as a table of length `|S|`.
    Classical(Vec<usize>),
    /// The atoms-to-blocks function `W → X` of a partition of unity in `2^W`.
    Partition(Vec<usize>),
    /// Carrier indices of an effect algebra, one per outcome.
    Effects(Vec<usize>),
    Distribution(Vec<Rational>),
    /// One distribution over `X` per element of `S`.
    Kernel(Vec<Vec<Rational>>),
    /// Sparse distribution over tables `S → X`, sorted by table, positive weights.
    RandomFunction(Vec<(Vec<usize>, Rational)>),
    /// Sorted, duplicate-free, nonempty set of tables `S → X`.
    UnknownFunction(Vec<Vec<usize>>),
    /// `None` is the trivial measurement; otherwise a sorted 3-subset.
    Weird(Option<[usize; 3]>),
    /// Canonical representative `map_*(generator)` of a presented class.
    Presented { generator: usize, map: Vec<usize> },
}

fn list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    write!(f, "[")?;
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, "]")
}

struct R<'a>(&'a Rational);

impl fmt::Display for R<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&rational::format(self.0))
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Classical(t) | Payload::Partition(t) | Payload::Effects(t) => list(f, t),
            Payload::Distribution(d) => list(f, &d.iter().map(R).collect::<Vec<_>>()),
            Payload::Kernel(rows) => {
                write!(f, "[")?;
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    list(f, &row.iter().map(R).collect::<Vec<_>>())?;
                }
                write!(f, "]")
            }
            Payload::RandomFunction(terms) => {
                for (i, (t, w)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{}", R(w))?;
                    list(f, t)?;
                }
                Ok(())
            }
            Payload::UnknownFunction(set) => {
                write!(f, "{{")?;
                for (i, t) in set.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    list(f, t)?;
                }
                write!(f, "}}")
            }
            Payload::Weird(None) => write!(f, "τ"),
            Payload::Weird(Some(s)) => write!(f, "{{{},{},{}}}", s[0], s[1], s[2]),
            Payload::Presented { generator, map } => {
                write!(f, "g{generator}")?;
                list(f, map)
            }
        }
    }
}

/// Behaviour of one measurement theory on finite outcome sets.
pub trait Family: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    /// The unique measurement over the one-element set.
    fn unit(&self) -> Payload;

    /// Accepts `payload` iff it is a canonical measurement over a set of size
    /// `arity`.
    fn check(&self, arity: usize, payload: &Payload) -> Result<()>;

    /// `f_*payload` for the function with the given table into a set of size
    /// `cod`. The payload must already be checked against `table.len()`.
    fn pushforward(&self, table: &[usize], cod: usize, payload: &Payload) -> Result<Payload>;

    /// `|M(arity)|` when the family is finite at that size and the count fits.
    fn cardinality(&self, _arity: usize) -> Option<u128> {
        None
    }

    /// Every measurement over a set of size `arity`, sorted. `None` for
    /// families with a continuum of measurements.
    fn enumerate(&self, _arity: usize) -> Option<Vec<Payload>> {
        None
    }

    fn is_enumerable(&self) -> bool {
        false
    }

    /// Largest outcome-set size the family can serve, if limited.
    fn max_arity(&self) -> Option<usize> {
        None
    }

    /// Human-readable rendering; families with named carriers override this.
    fn describe(&self, payload: &Payload) -> String {
        payload.to_string()
    }
}

pub type FamilyRef = Arc<dyn Family>;

pub(crate) fn invalid(family: &str, reason: impl Into<String>) -> Error {
    Error::InvalidPayload {
        family: family.to_string(),
        reason: reason.into(),
    }
}

pub(crate) fn check_table(family: &str, arity: usize, table: &[usize], len: usize) -> Result<()> {
    if table.len() != len {
        return Err(invalid(
            family,
            format!("expected a table of length {len}, got {}", table.len()),
        ));
    }
    if let Some(&v) = table.iter().find(|&&v| v >= arity) {
        return Err(invalid(
            family,
            format!("outcome {v} is out of range for {arity} outcomes"),
        ));
    }
    Ok(())
}

pub(crate) fn check_distribution(family: &str, arity: usize, d: &[Rational]) -> Result<()> {
    if d.len() != arity {
        return Err(invalid(
            family,
            format!("expected {arity} probabilities, got {}", d.len()),
        ));
    }
    if let Some(p) = d.iter().find(|p| **p < rational::zero()) {
        return Err(invalid(family, format!("negative probability {}", R(p))));
    }
    let total: Rational = d.iter().sum();
    if total != rational::one() {
        return Err(invalid(
            family,
            format!("probabilities sum to {}, not 1", R(&total)),
        ));
    }
    Ok(())
}

pub(crate) fn push_distribution(table: &[usize], cod: usize, d: &[Rational]) -> Vec<Rational> {
    let mut out = vec![rational::zero(); cod];
    for (x, p) in d.iter().enumerate() {
        out[table[x]] += p;
    }
    out
}

/// `n^m` as `u128`, saturating.
pub(crate) fn power(n: usize, m: usize) -> u128 {
    crate::finset::function_count(m, n).unwrap_or(u128::MAX)
}

/// Binomial coefficient as `u128`.
pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}
