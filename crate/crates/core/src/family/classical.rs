use super::{check_table, invalid, power, Family, Payload};
use crate::error::Result;
use crate::finset::Tables;

/// Deterministic measurements on a state set `S`: `M(X) = X^S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classical {
    states: usize,
}

impl Classical {
    pub fn new(states: usize) -> Self {
        Classical { states }
    }

    pub fn states(&self) -> usize {
        self.states
    }
}

impl Family for Classical {
    fn name(&self) -> String {
        format!("classical(S={})", self.states)
    }

    fn unit(&self) -> Payload {
        Payload::Classical(vec![0; self.states])
    }

    fn check(&self, arity: usize, payload: &Payload) -> Result<()> {
        match payload {
            Payload::Classical(t) => check_table(&self.name(), arity, t, self.states),
            _ => Err(invalid(&self.name(), "expected a function table")),
        }
    }

    fn pushforward(&self, table: &[usize], _cod: usize, payload: &Payload) -> Result<Payload> {
        match payload {
            Payload::Classical(t) => Ok(Payload::Classical(t.iter().map(|&s| table[s]).collect())),
            _ => Err(invalid(&self.name(), "expected a function table")),
        }
    }

    fn cardinality(&self, arity: usize) -> Option<u128> {
        Some(power(arity, self.states))
    }

    fn enumerate(&self, arity: usize) -> Option<Vec<Payload>> {
        Some(Tables::new(self.states, arity).map(Payload::Classical).collect())
    }

    fn is_enumerable(&self) -> bool {
        true
    }
}

/// Partitions of unity in the Boolean algebra `2^W`, encoded by the function
/// sending each atom to the outcome whose block contains it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boolean {
    atoms: usize,
}

impl Boolean {
    pub fn new(atoms: usize) -> Self {
        Boolean { atoms }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    /// Block of outcome `x` as a bitmask of atoms.
    pub fn block(payload: &Payload, x: usize) -> u64 {
        match payload {
            Payload::Partition(t) => t
                .iter()
                .enumerate()
                .filter(|(_, &b)| b == x)
                .fold(0, |m, (w, _)| m | (1 << w)),
            _ => 0,
        }
    }
}

impl Family for Boolean {
    fn name(&self) -> String {
        format!("boolean(W={})", self.atoms)
    }

    fn unit(&self) -> Payload {
        Payload::Partition(vec![0; self.atoms])
    }

    fn check(&self, arity: usize, payload: &Payload) -> Result<()> {
        match payload {
            Payload::Partition(t) => check_table(&self.name(), arity, t, self.atoms),
            _ => Err(invalid(&self.name(), "expected an atom-to-block table")),
        }
    }

    /// Block `y` of the pushforward is the join of the blocks in `f⁻¹(y)`.
    fn pushforward(&self, table: &[usize], _cod: usize, payload: &Payload) -> Result<Payload> {
        match payload {
            Payload::Partition(t) => Ok(Payload::Partition(t.iter().map(|&b| table[b]).collect())),
            _ => Err(invalid(&self.name(), "expected an atom-to-block table")),
        }
    }

    fn cardinality(&self, arity: usize) -> Option<u128> {
        Some(power(arity, self.atoms))
    }

    fn enumerate(&self, arity: usize) -> Option<Vec<Payload>> {
        Some(Tables::new(self.atoms, arity).map(Payload::Partition).collect())
    }

    fn is_enumerable(&self) -> bool {
        true
    }
}
