//! Exact phase-one simplex for `A x = b, x ≥ 0`.
//!
//! The tableau is kept in sparse rows of exact rationals. Bland's rule picks
//! the entering column (lowest index with negative reduced cost) and breaks
//! ratio-test ties by the lowest basic variable index, so the method cannot
//! cycle. Artificial columns leave the basis and never re-enter.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinRow {
    /// Sorted by variable, no explicit zeros.
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PhaseOne {
    /// A basic feasible point.
    Feasible(Vec<Rational>),
    /// Multipliers `μ` with `μᵀA ≥ 0` and `μᵀb < 0`.
    Infeasible(Vec<Rational>),
}

type Sparse = Vec<(usize, Rational)>;

fn get(row: &Sparse, col: usize) -> Option<&Rational> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|i| &row[i].1)
}

/// `target − factor · source`, merged by column.
fn axpy(target: &Sparse, factor: &Rational, source: &Sparse) -> Sparse {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < source.len() {
        let ti = target.get(i).map_or(usize::MAX, |e| e.0);
        let sj = source.get(j).map_or(usize::MAX, |e| e.0);
        if ti < sj {
            out.push(target[i].clone());
            i += 1;
        } else if sj < ti {
            out.push((sj, -(factor * &source[j].1)));
            j += 1;
        } else {
            let v = &target[i].1 - factor * &source[j].1;
            if !v.is_zero() {
                out.push((ti, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct Tableau {
    rows: Vec<Sparse>,
    rhs: Vec<Rational>,
    cost: Sparse,
    cost_rhs: Rational,
    basis: Vec<usize>,
    num_vars: usize,
}

impl Tableau {
    fn entering(&self) -> Option<usize> {
        self.cost
            .iter()
            .find(|(c, v)| *c < self.num_vars && v.is_negative())
            .map(|e| e.0)
    }

    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let Some(a) = get(row, q) else { continue };
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.rhs[i] / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|b| b.0)
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let a = get(&self.rows[p], q).expect("pivot entry").clone();
        let inv = a.recip();
        for e in self.rows[p].iter_mut() {
            e.1 *= &inv;
        }
        self.rhs[p] *= &inv;
        let prow = std::mem::take(&mut self.rows[p]);
        let prhs = self.rhs[p].clone();
        for i in 0..self.rows.len() {
            if i == p {
                continue;
            }
            if let Some(f) = get(&self.rows[i], q).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &prow);
                self.rhs[i] -= &f * &prhs;
            }
        }
        if let Some(f) = get(&self.cost, q).cloned() {
            self.cost = axpy(&self.cost, &f, &prow);
            self.cost_rhs -= &f * &prhs;
        }
        self.rows[p] = prow;
        self.basis[p] = q;
    }
}

/// Decides feasibility of `{x ≥ 0 : rows}` exactly.
pub fn phase_one(rows: &[LinRow], num_vars: usize) -> PhaseOne {
    let m = rows.len();
    let mut signs = Vec::with_capacity(m);
    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        cost: Vec::new(),
        cost_rhs: Rational::zero(),
        basis: (num_vars..num_vars + m).collect(),
        num_vars,
    };
    for (i, row) in rows.iter().enumerate() {
        let flip = row.rhs.is_negative();
        signs.push(flip);
        let mut coeffs: Sparse = row
            .coeffs
            .iter()
            .map(|(v, c)| (*v, if flip { -c.clone() } else { c.clone() }))
            .collect();
        coeffs.push((num_vars + i, Rational::one()));
        t.rows.push(coeffs);
        t.rhs.push(if flip { -row.rhs.clone() } else { row.rhs.clone() });
    }
    // Reduced costs of the all-artificial basis: −Σ rows on the original columns.
    let mut cost: Sparse = Vec::new();
    for row in &t.rows {
        let orig: Sparse = row.iter().filter(|e| e.0 < num_vars).cloned().collect();
        cost = axpy(&cost, &Rational::one(), &orig);
    }
    t.cost = cost;
    t.cost_rhs = -t.rhs.iter().sum::<Rational>();

    while let Some(q) = t.entering() {
        let p = t.leaving(q).expect("phase one is bounded below by zero");
        t.pivot(p, q);
    }

    if t.cost_rhs.is_zero() {
        let mut x = vec![Rational::zero(); num_vars];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < num_vars {
                x[b] = t.rhs[i].clone();
            }
        }
        PhaseOne::Feasible(x)
    } else {
        // y_i = 1 − d(a_i); the Farkas multipliers are −y, unflipped.
        let multipliers = (0..m)
            .map(|i| {
                let d = get(&t.cost, num_vars + i).cloned().unwrap_or_else(Rational::zero);
                let y = Rational::one() - d;
                if signs[i] {
                    y
                } else {
                    -y
                }
            })
            .collect();
        PhaseOne::Infeasible(multipliers)
    }
}

/// True iff `μᵀA ≥ 0` componentwise and `μᵀb < 0`.
pub fn is_farkas_certificate(rows: &[LinRow], num_vars: usize, mu: &[Rational]) -> bool {
    if mu.len() != rows.len() {
        return false;
    }
    let mut combo = vec![Rational::zero(); num_vars];
    let mut rhs = Rational::zero();
    for (row, m) in rows.iter().zip(mu) {
        if m.is_zero() {
            continue;
        }
        for (v, c) in &row.coeffs {
            combo[*v] += m * c;
        }
        rhs += m * &row.rhs;
    }
    combo.iter().all(|c| !c.is_negative()) && rhs.is_negative()
}

pub fn satisfies(rows: &[LinRow], x: &[Rational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && rows.iter().all(|r| {
            r.coeffs.iter().map(|(v, c)| c * &x[*v]).sum::<Rational>() == r.rhs
        })
}
