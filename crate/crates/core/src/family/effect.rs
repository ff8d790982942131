use std::fmt;

use super::{invalid, Family, Payload};
use crate::error::{Error, Result};
use crate::finset::Tables;

/// A finite effect algebra given by its partial sum table.
///
/// Axioms checked on construction: `⊕` is commutative and associative where
/// defined, every element has exactly one orthosupplement, `a ⊕ 1` is defined
/// only for `a = 0`, and the declared zero is the orthosupplement of one.
#[derive(Clone, PartialEq, Eq)]
pub struct EffectAlgebra {
    labels: Vec<String>,
    sum: Vec<Vec<Option<usize>>>,
    zero: usize,
    one: usize,
}

impl fmt::Debug for EffectAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EffectAlgebra")
            .field("labels", &self.labels)
            .field("zero", &self.zero)
            .field("one", &self.one)
            .finish()
    }
}

impl EffectAlgebra {
    pub fn new(
        labels: Vec<String>,
        sum: Vec<Vec<Option<usize>>>,
        zero: usize,
        one: usize,
    ) -> Result<Self> {
        let ea = EffectAlgebra {
            labels,
            sum,
            zero,
            one,
        };
        ea.check_axioms()?;
        Ok(ea)
    }

    /// Builds the table from the listed sums `a ⊕ b = c`; each unordered pair
    /// needs to be listed once.
    pub fn from_sums(
        labels: Vec<String>,
        zero: usize,
        one: usize,
        sums: &[(usize, usize, usize)],
    ) -> Result<Self> {
        let n = labels.len();
        let mut table = vec![vec![None; n]; n];
        for &(a, b, c) in sums {
            if a >= n || b >= n || c >= n {
                return Err(Error::EffectAlgebraAxiom(format!(
                    "sum entry ({a}, {b}, {c}) refers to an element outside the carrier of size {n}"
                )));
            }
            for (x, y) in [(a, b), (b, a)] {
                match table[x][y] {
                    Some(old) if old != c => {
                        return Err(Error::EffectAlgebraAxiom(format!(
                            "commutativity: {} ⊕ {} is given as both {} and {}",
                            labels[x], labels[y], labels[old], labels[c]
                        )))
                    }
                    _ => table[x][y] = Some(c),
                }
            }
        }
        Self::new(labels, table, zero, one)
    }

    /// The `n + 1`-element chain `0, 1/n, …, 1` with truncated addition
    /// defined when the total does not exceed one.
    pub fn chain(n: usize) -> Self {
        let labels = (0..=n)
            .map(|i| match i {
                0 => "0".to_string(),
                i if i == n => "1".to_string(),
                i => format!("{i}/{n}"),
            })
            .collect();
        let sum = (0..=n)
            .map(|a| (0..=n).map(|b| (a + b <= n).then_some(a + b)).collect())
            .collect();
        EffectAlgebra {
            labels,
            sum,
            zero: 0,
            one: n,
        }
    }

    /// The Boolean algebra `2^k` as an effect algebra (disjoint union).
    pub fn powerset(k: usize) -> Self {
        let n = 1usize << k;
        let labels = (0..n).map(|m| format!("{m:0k$b}")).collect();
        let sum = (0..n)
            .map(|a| (0..n).map(|b| (a & b == 0).then_some(a | b)).collect())
            .collect();
        EffectAlgebra {
            labels,
            sum,
            zero: 0,
            one: n - 1,
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn one(&self) -> usize {
        self.one
    }

    pub fn add(&self, a: usize, b: usize) -> Option<usize> {
        self.sum[a][b]
    }

    /// `⊕` of a sequence, left to right; `None` if some partial sum is undefined.
    pub fn total(&self, items: impl IntoIterator<Item = usize>) -> Option<usize> {
        items
            .into_iter()
            .try_fold(self.zero, |acc, e| self.add(acc, e))
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.size();
        let fail = |msg: String| Err(Error::EffectAlgebraAxiom(msg));
        let l = |i: usize| &self.labels[i];
        if n == 0 {
            return fail("the carrier is empty".into());
        }
        if self.zero >= n || self.one >= n {
            return fail("zero or one is outside the carrier".into());
        }
        let mut sorted: Vec<&String> = self.labels.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return fail(format!("label `{}` is repeated", w[0]));
        }
        if self.sum.len() != n || self.sum.iter().any(|row| row.len() != n) {
            return fail(format!("the sum table must be {n}×{n}"));
        }
        if let Some(c) = self.sum.iter().flatten().flatten().find(|&&c| c >= n) {
            return fail(format!("sum table entry {c} is outside the carrier"));
        }
        for a in 0..n {
            for b in 0..n {
                if self.sum[a][b] != self.sum[b][a] {
                    return fail(format!("commutativity fails for ({}, {})", l(a), l(b)));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let Some(ab) = self.sum[a][b] else { continue };
                for c in 0..n {
                    let Some(abc) = self.sum[ab][c] else { continue };
                    match self.sum[b][c].and_then(|bc| self.sum[a][bc]) {
                        Some(v) if v == abc => {}
                        _ => {
                            return fail(format!(
                                "associativity fails for ({}, {}, {}): ({} ⊕ {}) ⊕ {} is defined but {} ⊕ ({} ⊕ {}) is not equal to it",
                                l(a), l(b), l(c), l(a), l(b), l(c), l(a), l(b), l(c)
                            ))
                        }
                    }
                }
            }
        }
        for a in 0..n {
            let supplements: Vec<usize> =
                (0..n).filter(|&b| self.sum[a][b] == Some(self.one)).collect();
            if supplements.len() != 1 {
                return fail(format!(
                    "{} has {} orthosupplements, expected exactly one",
                    l(a),
                    supplements.len()
                ));
            }
        }
        for a in 0..n {
            if self.sum[a][self.one].is_some() && a != self.zero {
                return fail(format!("zero-one law fails: {} ⊕ 1 is defined", l(a)));
            }
        }
        if self.sum[self.zero][self.one] != Some(self.one) {
            return fail(format!("the declared zero {} is not the orthosupplement of one", l(self.zero)));
        }
        Ok(())
    }
}

/// `M_E(X)`: `X`-indexed effect tuples summing to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectAlgebraFamily {
    algebra: EffectAlgebra,
}

impl EffectAlgebraFamily {
    pub fn new(algebra: EffectAlgebra) -> Self {
        EffectAlgebraFamily { algebra }
    }

    pub fn algebra(&self) -> &EffectAlgebra {
        &self.algebra
    }
}

impl Family for EffectAlgebraFamily {
    fn name(&self) -> String {
        format!("effect-algebra(|E|={})", self.algebra.size())
    }

    fn unit(&self) -> Payload {
        Payload::Effects(vec![self.algebra.one])
    }

    fn check(&self, arity: usize, payload: &Payload) -> Result<()> {
        let Payload::Effects(e) = payload else {
            return Err(invalid(&self.name(), "expected an effect tuple"));
        };
        if e.len() != arity {
            return Err(invalid(
                &self.name(),
                format!("expected {arity} effects, got {}", e.len()),
            ));
        }
        if let Some(&v) = e.iter().find(|&&v| v >= self.algebra.size()) {
            return Err(invalid(&self.name(), format!("effect {v} is outside the carrier")));
        }
        match self.algebra.total(e.iter().copied()) {
            Some(t) if t == self.algebra.one => Ok(()),
            _ => Err(invalid(&self.name(), "effects do not sum to one")),
        }
    }

    fn pushforward(&self, table: &[usize], cod: usize, payload: &Payload) -> Result<Payload> {
        let Payload::Effects(e) = payload else {
            return Err(invalid(&self.name(), "expected an effect tuple"));
        };
        let mut out = vec![self.algebra.zero; cod];
        for (x, &ex) in e.iter().enumerate() {
            let y = table[x];
            out[y] = self
                .algebra
                .add(out[y], ex)
                .ok_or_else(|| invalid(&self.name(), "partial sum over a fiber is undefined"))?;
        }
        Ok(Payload::Effects(out))
    }

    fn cardinality(&self, arity: usize) -> Option<u128> {
        Some(self.enumerate(arity)?.len() as u128)
    }

    fn enumerate(&self, arity: usize) -> Option<Vec<Payload>> {
        let n = self.algebra.size();
        let total = super::power(n, arity);
        if total > 1 << 24 {
            return None;
        }
        Some(
            Tables::new(arity, n)
                .filter(|e| self.algebra.total(e.iter().copied()) == Some(self.algebra.one))
                .map(Payload::Effects)
                .collect(),
        )
    }

    fn is_enumerable(&self) -> bool {
        true
    }

    fn describe(&self, payload: &Payload) -> String {
        match payload {
            Payload::Effects(e) => {
                let parts: Vec<&str> = e
                    .iter()
                    .map(|&i| self.algebra.labels.get(i).map_or("?", String::as_str))
                    .collect();
                format!("({})", parts.join(", "))
            }
            other => other.to_string(),
        }
    }
}
