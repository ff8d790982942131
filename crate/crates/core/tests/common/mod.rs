//! Independent reference implementations: plain backtracking for discrete
//! states, dense elimination plus Fourier-Motzkin for the probabilistic ones.
//! Nothing here calls the solvers under test.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use gmtlab::family::{
    Boolean, Classical, Delta, EffectAlgebra, EffectAlgebraFamily, RandomFunctions, UnknownFunctions, Weird,
};
use gmtlab::rational::{self, Rational};
use gmtlab::{FamilyRef, Fragment, Measurement, Payload};

/// Every `(α, table, β)` with `table_*α = β`.
pub fn entries(frag: &Fragment) -> Vec<(usize, Vec<usize>, usize)> {
    let mut out = Vec::new();
    for alpha in frag.ids() {
        let m = frag.arity(alpha);
        for slot in 0..frag.row_len(m) {
            let (_, table) = frag.slot_map(m, slot);
            out.push((alpha, table, frag.entry(alpha, slot).unwrap()));
        }
    }
    out
}

/// Assigns one value per measurement in id order, checking each entry as
/// soon as both of its ends are assigned. `image(table, v)` is the required
/// value at the target given value `v` at the source.
fn backtrack(
    frag: &Fragment,
    values: &dyn Fn(usize) -> Vec<usize>,
    image: &dyn Fn(&[usize], usize) -> usize,
) -> BTreeSet<Vec<usize>> {
    let mut by_later: Vec<Vec<(usize, Vec<usize>, usize)>> = vec![Vec::new(); frag.len()];
    for (a, t, b) in entries(frag) {
        by_later[a.max(b)].push((a, t, b));
    }
    let mut out = BTreeSet::new();
    let mut assignment = Vec::new();
    fn go(
        frag: &Fragment,
        values: &dyn Fn(usize) -> Vec<usize>,
        image: &dyn Fn(&[usize], usize) -> usize,
        by_later: &[Vec<(usize, Vec<usize>, usize)>],
        assignment: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        let id = assignment.len();
        if id == frag.len() {
            out.insert(assignment.clone());
            return;
        }
        for v in values(frag.arity(id)) {
            assignment.push(v);
            if by_later[id].iter().all(|(a, t, b)| image(t, assignment[*a]) == assignment[*b]) {
                go(frag, values, image, by_later, assignment, out);
            }
            assignment.pop();
        }
    }
    go(frag, values, image, &by_later, &mut assignment, &mut out);
    out
}

pub fn deterministic_oracle(frag: &Fragment) -> BTreeSet<Vec<usize>> {
    backtrack(frag, &|m| (0..m).collect(), &|t, x| t[x])
}

pub fn possibilistic_oracle(frag: &Fragment) -> BTreeSet<Vec<usize>> {
    backtrack(frag, &|m| (1..1usize << m).collect(), &|t, mask| {
        (0..t.len()).filter(|x| mask >> x & 1 == 1).fold(0, |acc, x| acc | 1 << t[x])
    })
}

/// Normalization and pushforward equalities as dense rows `[coeffs | rhs]`
/// over variables laid out measurement by measurement.
pub fn state_equations(frag: &Fragment) -> (Vec<Vec<Rational>>, usize) {
    let mut start = Vec::new();
    let mut nvars = 0;
    for id in frag.ids() {
        start.push(nvars);
        nvars += frag.arity(id);
    }
    let mut rows = Vec::new();
    for alpha in frag.ids() {
        let mut r = vec![Rational::zero(); nvars + 1];
        for x in 0..frag.arity(alpha) {
            r[start[alpha] + x] = Rational::one();
        }
        r[nvars] = Rational::one();
        rows.push(r);
    }
    for (alpha, table, beta) in entries(frag) {
        for y in 0..frag.arity(beta) {
            let mut r = vec![Rational::zero(); nvars + 1];
            for (x, &fx) in table.iter().enumerate() {
                if fx == y {
                    r[start[alpha] + x] += Rational::one();
                }
            }
            r[start[beta] + y] -= Rational::one();
            rows.push(r);
        }
    }
    (rows, nvars)
}

/// Solution set of the equalities as `x = offset + coeff · t`.
pub struct Affine {
    pub offset: Vec<Rational>,
    pub coeff: Vec<Vec<Rational>>,
}

impl Affine {
    pub fn dim(&self) -> usize {
        self.coeff.first().map_or(0, Vec::len)
    }

    pub fn point(&self, t: &[Rational]) -> Vec<Rational> {
        self.offset
            .iter()
            .zip(&self.coeff)
            .map(|(o, c)| o + c.iter().zip(t).map(|(a, b)| a * b).sum::<Rational>())
            .collect()
    }
}

pub fn solve_affine(mut rows: Vec<Vec<Rational>>, nvars: usize) -> Option<Affine> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nvars {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        rows[r].iter_mut().for_each(|x| *x *= &inv);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pr = rows[r].clone();
                rows[i].iter_mut().zip(&pr).for_each(|(a, b)| *a -= &f * b);
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[nvars].is_zero()) {
        return None;
    }
    let free: Vec<usize> = (0..nvars).filter(|c| !pivots.contains(c)).collect();
    let mut offset = vec![Rational::zero(); nvars];
    let mut coeff = vec![vec![Rational::zero(); free.len()]; nvars];
    for (j, &f) in free.iter().enumerate() {
        coeff[f][j] = Rational::one();
    }
    for (i, &p) in pivots.iter().enumerate() {
        offset[p] = rows[i][nvars].clone();
        for (j, &f) in free.iter().enumerate() {
            coeff[p][j] = -rows[i][f].clone();
        }
    }
    Some(Affine { offset, coeff })
}

/// Is `{t | a·t + b ≥ 0 for all rows}` nonempty? Plain Fourier-Motzkin.
pub fn fm_feasible(mut rows: Vec<(Vec<Rational>, Rational)>, dim: usize) -> bool {
    for j in (0..dim).rev() {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for (a, b) in rows {
            if a[j].is_positive() {
                pos.push((a, b));
            } else if a[j].is_negative() {
                neg.push((a, b));
            } else {
                rest.push((a, b));
            }
        }
        for (ap, bp) in &pos {
            for (an, bn) in &neg {
                let (cp, cn) = (-an[j].clone(), ap[j].clone());
                let a: Vec<Rational> = ap.iter().zip(an).map(|(x, y)| x * &cp + y * &cn).collect();
                rest.push((a, bp * &cp + bn * &cn));
            }
        }
        // Scale each row so duplicates collapse.
        let mut seen = BTreeSet::new();
        rows = Vec::new();
        for (a, b) in rest {
            let lead = a.iter().chain(std::iter::once(&b)).find(|x| !x.is_zero()).map(|x| x.abs());
            let (a, b) = match lead {
                Some(l) => (a.iter().map(|x| x / &l).collect(), &b / &l),
                None => (a, b),
            };
            if seen.insert((a.clone(), b.clone())) {
                rows.push((a, b));
            }
        }
    }
    rows.iter().all(|(_, b)| !b.is_negative())
}

/// Does the fragment have a probabilistic state?
pub fn probabilistic_oracle(frag: &Fragment) -> bool {
    let (rows, nvars) = state_equations(frag);
    let Some(aff) = solve_affine(rows, nvars) else {
        return false;
    };
    let ineq = (0..nvars).map(|v| (aff.coeff[v].clone(), aff.offset[v].clone())).collect();
    fm_feasible(ineq, aff.dim())
}

/// Solves the square system `a t = b`, if nonsingular.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        b.swap(c, p);
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                let (ac, bc) = (a[c].clone(), b[c].clone());
                a[i].iter_mut().zip(&ac).for_each(|(x, y)| *x -= &f * y);
                b[i] -= &f * bc;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Vertices of the state set: feasible points where some `d` independent
/// nonnegativity constraints are tight.
pub fn vertex_oracle(frag: &Fragment) -> Vec<Vec<Rational>> {
    let (rows, nvars) = state_equations(frag);
    let Some(aff) = solve_affine(rows, nvars) else {
        return Vec::new();
    };
    let d = aff.dim();
    let mut found = BTreeSet::new();
    for tight in subsets(nvars, d) {
        let a = tight.iter().map(|&v| aff.coeff[v].clone()).collect();
        let b = tight.iter().map(|&v| -aff.offset[v].clone()).collect();
        let Some(t) = solve_square(a, b) else { continue };
        let x = aff.point(&t);
        if x.iter().all(|xi| !xi.is_negative()) {
            found.insert(x);
        }
    }
    found.into_iter().collect()
}

pub fn full(family: FamilyRef, bound: usize) -> Fragment {
    Fragment::full(family, bound).unwrap()
}

pub fn half() -> Rational {
    rational::ratio(1, 2)
}

/// Small fragments spanning every family, each cheap enough for the oracles.
pub fn zoo() -> Vec<(String, Fragment)> {
    let mut out = Vec::new();
    for s in 1..=2 {
        out.push((format!("classical {s}"), full(Arc::new(Classical::new(s)), 3)));
        out.push((format!("boolean {s}"), full(Arc::new(Boolean::new(s)), 3)));
    }
    out.push(("unknown 1".into(), full(Arc::new(UnknownFunctions::new(1)), 3)));
    out.push(("weird".into(), full(Arc::new(Weird), 3)));
    out.push((
        "chain 2".into(),
        full(Arc::new(EffectAlgebraFamily::new(EffectAlgebra::chain(2))), 3),
    ));
    let swap = RandomFunctions::normalize([(vec![0], half()), (vec![1], half())]);
    out.push((
        "random swap".into(),
        Fragment::close(Arc::new(RandomFunctions::new(1)), &[Measurement::new(2, swap)], 2).unwrap(),
    ));
    let uniform = Payload::Distribution(vec![half(), half()]);
    out.push((
        "delta uniform".into(),
        Fragment::close(Arc::new(Delta), &[Measurement::new(2, uniform)], 2).unwrap(),
    ));
    out
}
