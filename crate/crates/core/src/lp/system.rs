//! The linear system whose nonnegative solutions are probabilistic states.
//!
//! Variables are `ρ(α)(x)` for every carried `α` and outcome `x`, laid out in
//! id order and then outcome order. Equality rows are, in order: one
//! normalization row `Σ_x ρ(α)(x) = 1` per measurement, then for every table
//! entry `(f, α)` and every `y` the naturality row
//! `Σ_{x ∈ f⁻¹(y)} ρ(α)(x) − ρ(f_*α)(y) = 0`. Rows are simplified (like terms
//! combined, `0 = 0` dropped, first coefficient made positive) and duplicates
//! removed keeping the first occurrence. The inequality rows `−x_v ≤ 0` follow
//! the equalities, one per variable.

use std::collections::HashMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fragment::Fragment;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowOrigin {
    Normalization { alpha: usize },
    Naturality { alpha: usize, slot: usize, y: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    /// Sorted by variable, nonzero coefficients.
    pub coeffs: Vec<(usize, i64)>,
    pub rhs: i64,
    pub origin: RowOrigin,
}

type RowKey = (Vec<(usize, i64)>, i64);

#[derive(Clone, Debug)]
pub struct StateSystem {
    family: String,
    bound: usize,
    offsets: Vec<usize>,
    num_vars: usize,
    rows: Vec<Row>,
    index: HashMap<RowKey, usize>,
}

/// Combines like terms, drops zeros and makes the first coefficient positive.
/// Returns `None` for rows that reduce to `0 = 0`.
fn simplify(mut coeffs: Vec<(usize, i64)>, mut rhs: i64) -> Option<RowKey> {
    coeffs.sort_unstable();
    let mut merged: Vec<(usize, i64)> = Vec::with_capacity(coeffs.len());
    for (v, c) in coeffs {
        match merged.last_mut() {
            Some((w, d)) if *w == v => *d += c,
            _ => merged.push((v, c)),
        }
    }
    merged.retain(|&(_, c)| c != 0);
    if merged.is_empty() && rhs == 0 {
        return None;
    }
    if merged.first().is_some_and(|&(_, c)| c < 0) || (merged.is_empty() && rhs < 0) {
        merged.iter_mut().for_each(|(_, c)| *c = -*c);
        rhs = -rhs;
    }
    Some((merged, rhs))
}

impl StateSystem {
    pub fn build(frag: &Fragment) -> Result<Self> {
        if !frag.is_materialized() {
            return Err(Error::NotMaterialized);
        }
        let mut offsets = Vec::with_capacity(frag.len() + 1);
        let mut num_vars = 0;
        for id in frag.ids() {
            offsets.push(num_vars);
            num_vars += frag.arity(id);
        }
        offsets.push(num_vars);

        let mut sys = StateSystem {
            family: frag.family().name(),
            bound: frag.bound(),
            offsets,
            num_vars,
            rows: Vec::new(),
            index: HashMap::new(),
        };
        for alpha in frag.ids() {
            let coeffs = (0..frag.arity(alpha)).map(|x| (sys.var(alpha, x), 1)).collect();
            sys.push(coeffs, 1, RowOrigin::Normalization { alpha });
        }
        for alpha in frag.ids() {
            let m = frag.arity(alpha);
            for slot in 0..frag.row_len(m) {
                let (n, table) = frag.slot_map(m, slot);
                let beta = frag.entry(alpha, slot).expect("materialized");
                for y in 0..n {
                    let coeffs = sys.naturality_coeffs(alpha, &table, beta, y);
                    sys.push(coeffs, 0, RowOrigin::Naturality { alpha, slot, y });
                }
            }
        }
        Ok(sys)
    }

    fn naturality_coeffs(&self, alpha: usize, table: &[usize], beta: usize, y: usize) -> Vec<(usize, i64)> {
        let mut coeffs: Vec<(usize, i64)> = table
            .iter()
            .enumerate()
            .filter(|(_, &fx)| fx == y)
            .map(|(x, _)| (self.var(alpha, x), 1))
            .collect();
        coeffs.push((self.var(beta, y), -1));
        coeffs
    }

    fn push(&mut self, coeffs: Vec<(usize, i64)>, rhs: i64, origin: RowOrigin) {
        let Some(key) = simplify(coeffs, rhs) else {
            return;
        };
        if self.index.contains_key(&key) {
            return;
        }
        self.index.insert(key.clone(), self.rows.len());
        self.rows.push(Row {
            coeffs: key.0,
            rhs: key.1,
            origin,
        });
    }

    /// Index of the deduplicated row equal to the naturality row of
    /// `(f, α)` at `y`, if that row is not trivial.
    pub fn naturality_row(&self, frag: &Fragment, alpha: usize, slot: usize, y: usize) -> Option<usize> {
        let m = frag.arity(alpha);
        let (_, table) = frag.slot_map(m, slot);
        let beta = frag.entry(alpha, slot)?;
        let key = simplify(self.naturality_coeffs(alpha, &table, beta, y), 0)?;
        self.index.get(&key).copied()
    }

    /// Normalization rows have disjoint supports, so only a second
    /// measurement over the empty set can lose its row to deduplication.
    pub fn normalization_row(&self, alpha: usize) -> Option<usize> {
        self.rows
            .iter()
            .position(|r| r.origin == RowOrigin::Normalization { alpha })
    }

    pub fn var(&self, alpha: usize, x: usize) -> usize {
        self.offsets[alpha] + x
    }

    /// `(α, x)` of a variable.
    pub fn var_owner(&self, v: usize) -> (usize, usize) {
        let alpha = self.offsets.partition_point(|&o| o <= v) - 1;
        (alpha, v - self.offsets[alpha])
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_equalities(&self) -> usize {
        self.rows.len()
    }

    /// Equalities followed by one nonnegativity row per variable.
    pub fn num_constraints(&self) -> usize {
        self.rows.len() + self.num_vars
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn describe_row(&self, k: usize) -> String {
        if k >= self.rows.len() {
            return format!("-x{} <= 0", k - self.rows.len());
        }
        let row = &self.rows[k];
        let mut s = String::new();
        for (i, &(v, c)) in row.coeffs.iter().enumerate() {
            let sign = if c < 0 { "-" } else if i > 0 { "+" } else { "" };
            let mag = c.abs();
            if i > 0 {
                s.push(' ');
            }
            if mag == 1 {
                let _ = write!(s, "{sign}x{v}");
            } else {
                let _ = write!(s, "{sign}{mag}x{v}");
            }
        }
        if row.coeffs.is_empty() {
            s.push('0');
        }
        let _ = write!(s, " = {}", row.rhs);
        match row.origin {
            RowOrigin::Normalization { alpha } => format!("{s}  [norm #{alpha}]"),
            RowOrigin::Naturality { alpha, slot, y } => format!("{s}  [nat #{alpha} slot {slot} y {y}]"),
        }
    }

    /// SHA-256 over the variable count and every equality row in order.
    pub fn layout_digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("vars {}\n", self.num_vars).as_bytes());
        for k in 0..self.rows.len() {
            h.update(self.describe_row(k).as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::family::Classical;

    #[test]
    fn simplify_rules() {
        assert_eq!(simplify(vec![(3, 1), (3, -1)], 0), None);
        assert_eq!(simplify(vec![(2, -1), (1, 1)], 0), Some((vec![(1, 1), (2, -1)], 0)));
        assert_eq!(simplify(vec![(2, -1)], -1), Some((vec![(2, 1)], 1)));
        assert_eq!(simplify(vec![], 1), Some((vec![], 1)));
    }

    #[test]
    fn tiny_system() {
        // classical S=1, bound 1: only τ; one variable, ρ(τ)(0) = 1
        let frag = Fragment::full(Arc::new(Classical::new(1)), 1).unwrap();
        let sys = StateSystem::build(&frag).unwrap();
        assert_eq!(sys.num_vars(), 1);
        assert_eq!(sys.rows().len(), 1);
        assert_eq!(sys.describe_row(0), "x0 = 1  [norm #0]");
        assert_eq!(sys.describe_row(1), "-x0 <= 0");
        assert_eq!(sys.layout_digest().len(), 64);
    }

    #[test]
    fn var_owner_inverts_var() {
        let frag = Fragment::full(Arc::new(Classical::new(2)), 3).unwrap();
        let sys = StateSystem::build(&frag).unwrap();
        for alpha in frag.ids() {
            for x in 0..frag.arity(alpha) {
                assert_eq!(sys.var_owner(sys.var(alpha, x)), (alpha, x));
            }
        }
    }
}
