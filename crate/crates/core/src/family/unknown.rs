use super::{check_table, invalid, power, Family, Payload};
use crate::error::Result;
use crate::finset::Tables;

/// Nondeterministic measurements: nonempty sets of functions, `P(X^S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownFunctions {
    states: usize,
}

const ENUMERATION_CAP: u128 = 1 << 20;

impl UnknownFunctions {
    pub fn new(states: usize) -> Self {
        UnknownFunctions { states }
    }

    pub fn normalize(mut tables: Vec<Vec<usize>>) -> Payload {
        tables.sort();
        tables.dedup();
        Payload::UnknownFunction(tables)
    }
}

impl Family for UnknownFunctions {
    fn name(&self) -> String {
        format!("unknown-functions(S={})", self.states)
    }

    fn unit(&self) -> Payload {
        Payload::UnknownFunction(vec![vec![0; self.states]])
    }

    fn check(&self, arity: usize, payload: &Payload) -> Result<()> {
        let name = self.name();
        let Payload::UnknownFunction(set) = payload else {
            return Err(invalid(&name, "expected a set of function tables"));
        };
        if set.is_empty() {
            return Err(invalid(&name, "the set of functions must be nonempty"));
        }
        for t in set {
            check_table(&name, arity, t, self.states)?;
        }
        if set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(&name, "tables must be sorted without repeats"));
        }
        Ok(())
    }

    fn pushforward(&self, table: &[usize], _cod: usize, payload: &Payload) -> Result<Payload> {
        match payload {
            Payload::UnknownFunction(set) => Ok(Self::normalize(
                set.iter()
                    .map(|t| t.iter().map(|&s| table[s]).collect())
                    .collect(),
            )),
            _ => Err(invalid(&self.name(), "expected a set of function tables")),
        }
    }

    fn cardinality(&self, arity: usize) -> Option<u128> {
        let functions = power(arity, self.states);
        if functions >= 127 {
            return None;
        }
        Some((1u128 << functions) - 1)
    }

    fn enumerate(&self, arity: usize) -> Option<Vec<Payload>> {
        let count = self.cardinality(arity)?;
        if count > ENUMERATION_CAP {
            return None;
        }
        let functions: Vec<Vec<usize>> = Tables::new(self.states, arity).collect();
        let mut out: Vec<Payload> = (1..=count as u64)
            .map(|mask| {
                Payload::UnknownFunction(
                    functions
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, t)| t.clone())
                        .collect(),
                )
            })
            .collect();
        out.sort();
        Some(out)
    }

    fn is_enumerable(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_nonempty_subsets() {
        let u = UnknownFunctions::new(1);
        assert_eq!(u.enumerate(2).unwrap().len(), 3);
        assert_eq!(u.cardinality(3), Some(7));
        assert!(u.enumerate(0).unwrap().is_empty());
        assert_eq!(UnknownFunctions::new(2).enumerate(3).unwrap().len(), 511);
    }

    #[test]
    fn pushforward_takes_images() {
        let u = UnknownFunctions::new(1);
        let full = Payload::UnknownFunction(vec![vec![0], vec![1], vec![2]]);
        assert_eq!(
            u.pushforward(&[0, 1, 1], 2, &full).unwrap(),
            Payload::UnknownFunction(vec![vec![0], vec![1]])
        );
    }
}
