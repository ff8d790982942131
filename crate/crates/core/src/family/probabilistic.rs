use std::collections::BTreeMap;

use super::{check_distribution, check_table, invalid, push_distribution, Family, Payload};
use crate::error::Result;
use crate::rational::{self, Rational};

/// Probability distributions: `Δ(X)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Delta;

impl Family for Delta {
    fn name(&self) -> String {
        "delta".into()
    }

    fn unit(&self) -> Payload {
        Payload::Distribution(vec![rational::one()])
    }

    fn check(&self, arity: usize, payload: &Payload) -> Result<()> {
        match payload {
            Payload::Distribution(d) => check_distribution(&self.name(), arity, d),
            _ => Err(invalid(&self.name(), "expected a distribution")),
        }
    }

    fn pushforward(&self, table: &[usize], cod: usize, payload: &Payload) -> Result<Payload> {
        match payload {
            Payload::Distribution(d) => Ok(Payload::Distribution(push_distribution(table, cod, d))),
            _ => Err(invalid(&self.name(), "expected a distribution")),
        }
    }
}

/// Classical measurements with random outcomes: `Δ(X)^S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbMeas {
    states: usize,
}

impl ProbMeas {
    pub fn new(states: usize) -> Self {
        ProbMeas { states }
    }
}

impl Family for ProbMeas {
    fn name(&self) -> String {
        format!("prob-meas(S={})", self.states)
    }

    fn unit(&self) -> Payload {
        Payload::Kernel(vec![vec![rational::one()]; self.states])
    }

    fn check(&self, arity: usize, payload: &Payload) -> Result<()> {
        let Payload::Kernel(rows) = payload else {
            return Err(invalid(&self.name(), "expected one distribution per state"));
        };
        if rows.len() != self.states {
            return Err(invalid(
                &self.name(),
                format!("expected {} rows, got {}", self.states, rows.len()),
            ));
        }
        rows.iter()
            .try_for_each(|row| check_distribution(&self.name(), arity, row))
    }

    fn pushforward(&self, table: &[usize], cod: usize, payload: &Payload) -> Result<Payload> {
        match payload {
            Payload::Kernel(rows) => Ok(Payload::Kernel(
                rows.iter()
                    .map(|row| push_distribution(table, cod, row))
                    .collect(),
            )),
            _ => Err(invalid(&self.name(), "expected one distribution per state")),
        }
    }
}

/// Distributions over deterministic measurements: `Δ(X^S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomFunctions {
    states: usize,
}

impl RandomFunctions {
    pub fn new(states: usize) -> Self {
        RandomFunctions { states }
    }

    /// Sorts, merges equal tables, and drops zero weights.
    pub fn normalize(terms: impl IntoIterator<Item = (Vec<usize>, Rational)>) -> Payload {
        let mut merged: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (t, w) in terms {
            *merged.entry(t).or_insert_with(rational::zero) += w;
        }
        Payload::RandomFunction(
            merged
                .into_iter()
                .filter(|(_, w)| *w != rational::zero())
                .collect(),
        )
    }
}

impl Family for RandomFunctions {
    fn name(&self) -> String {
        format!("random-functions(S={})", self.states)
    }

    fn unit(&self) -> Payload {
        Payload::RandomFunction(vec![(vec![0; self.states], rational::one())])
    }

    fn check(&self, arity: usize, payload: &Payload) -> Result<()> {
        let name = self.name();
        let Payload::RandomFunction(terms) = payload else {
            return Err(invalid(&name, "expected weighted function tables"));
        };
        for (t, w) in terms {
            check_table(&name, arity, t, self.states)?;
            if *w <= rational::zero() {
                return Err(invalid(&name, "weights in the support must be positive"));
            }
        }
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(invalid(&name, "support must be sorted without repeats"));
        }
        let total: Rational = terms.iter().map(|(_, w)| w).sum();
        if total != rational::one() {
            return Err(invalid(&name, "weights do not sum to 1"));
        }
        Ok(())
    }

    fn pushforward(&self, table: &[usize], _cod: usize, payload: &Payload) -> Result<Payload> {
        match payload {
            Payload::RandomFunction(terms) => Ok(Self::normalize(
                terms
                    .iter()
                    .map(|(t, w)| (t.iter().map(|&s| table[s]).collect(), w.clone())),
            )),
            _ => Err(invalid(&self.name(), "expected weighted function tables")),
        }
    }
}
