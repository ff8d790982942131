//! Functor-law validation for fragment tables.
//!
//! Functoriality is checked against a generating set of maps: adjacent
//! transpositions, the collapse `1 ↦ 0` on each set of size at least two,
//! the inclusions `n → n + 1`, and the merges `n → n − 1` identifying the last
//! two elements. Every map within the bound is a composite of these whose
//! intermediate sets stay within the bound (factor through the image, sort
//! with transpositions, merge or include one element at a time). So if
//! `g_*(f_*α) = (g∘f)_*α` holds for each generator `g` and every `f`, and the
//! identity law holds, it holds for all composable pairs by induction on the
//! length of a factorization of `g`.

use std::fmt;

use crate::finset::{compose, FinFun, Tables};
use crate::fragment::Fragment;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `M(1)` must have exactly one element.
    Singleton { count: usize },
    /// `id_*α ≠ α`.
    Identity { alpha: usize, got: usize },
    /// `(g∘f)_*α ≠ g_*(f_*α)`.
    Functoriality {
        g: FinFun,
        f: FinFun,
        alpha: usize,
        composite: usize,
        stepwise: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Singleton { count } => {
                write!(out, "singleton: {count} measurements over the one-element set")
            }
            Violation::Identity { alpha, got } => {
                write!(out, "identity: id_* of #{alpha} is #{got}")
            }
            Violation::Functoriality {
                g,
                f,
                alpha,
                composite,
                stepwise,
            } => write!(
                out,
                "functoriality: g = {g}, f = {f}, α = #{alpha}: (g∘f)_*α = #{composite} but g_*(f_*α) = #{stepwise}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LawReport {
    pub violations: Vec<Violation>,
    /// False when the table is not materialized and only the carrier-level
    /// checks could run.
    pub complete: bool,
}

impl LawReport {
    pub fn is_lawful(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The generating maps with domain of size `n`, within `bound`.
pub fn generating_maps(n: usize, bound: usize) -> Vec<FinFun> {
    let mut out = Vec::new();
    if n >= 2 {
        for i in 0..n - 1 {
            let mut t: Vec<usize> = (0..n).collect();
            t.swap(i, i + 1);
            out.push(FinFun::from_table_unchecked(n, t));
        }
        let mut collapse: Vec<usize> = (0..n).collect();
        collapse[1] = 0;
        out.push(FinFun::from_table_unchecked(n, collapse));
        out.push(FinFun::from_table_unchecked(
            n - 1,
            (0..n).map(|x| x.min(n - 2)).collect(),
        ));
    }
    if n < bound {
        out.push(FinFun::from_table_unchecked(n + 1, (0..n).collect()));
    }
    out
}

pub fn validate(frag: &Fragment) -> LawReport {
    let mut violations = Vec::new();
    let count = frag.carrier(1).len();
    if count != 1 {
        violations.push(Violation::Singleton { count });
    }
    if !frag.is_materialized() {
        return LawReport {
            violations,
            complete: false,
        };
    }
    let bound = frag.bound();
    let generators: Vec<Vec<FinFun>> = (0..=bound).map(|n| generating_maps(n, bound)).collect();
    for alpha in frag.ids() {
        let m = frag.arity(alpha);
        let identity: Vec<usize> = (0..m).collect();
        let got = frag.push(&identity, m, alpha);
        if got != alpha {
            violations.push(Violation::Identity { alpha, got });
        }
        for n in 0..=bound {
            for table in Tables::new(m, n) {
                let mid = frag.push(&table, n, alpha);
                for g in &generators[n] {
                    check_pair(frag, g, &table, n, alpha, mid, &mut violations);
                }
            }
        }
    }
    LawReport {
        violations,
        complete: true,
    }
}

fn check_pair(
    frag: &Fragment,
    g: &FinFun,
    f_table: &[usize],
    n: usize,
    alpha: usize,
    mid: usize,
    violations: &mut Vec<Violation>,
) {
    let k = g.cod().size();
    let gf: Vec<usize> = f_table.iter().map(|&x| g.apply(x)).collect();
    let composite = frag.push(&gf, k, alpha);
    let stepwise = frag.push(g.table(), k, mid);
    if composite != stepwise {
        violations.push(Violation::Functoriality {
            g: g.clone(),
            f: FinFun::from_table_unchecked(n, f_table.to_vec()),
            alpha,
            composite,
            stepwise,
        });
    }
}

/// Reverse index of a table, for re-checking only the law instances that
/// read one entry.
#[derive(Clone, Debug)]
pub struct LawIndex {
    generators: Vec<Vec<FinFun>>,
    /// For each measurement β, the entries `(α, slot)` whose value is β.
    preimages: Vec<Vec<(usize, usize)>>,
}

impl LawIndex {
    pub fn new(frag: &Fragment) -> Self {
        let bound = frag.bound();
        let mut preimages = vec![Vec::new(); frag.len()];
        for alpha in frag.ids() {
            if let Some(row) = frag.row(alpha) {
                for (slot, &beta) in row.iter().enumerate() {
                    preimages[beta as usize].push((alpha, slot));
                }
            }
        }
        LawIndex {
            generators: (0..=bound).map(|n| generating_maps(n, bound)).collect(),
            preimages,
        }
    }
}

/// Every violation among the law instances that read the entry `(alpha, slot)`.
///
/// `index` must be built from the table before the entry was changed. An
/// instance `(g, f, α)` reads `T(f, α)`, `T(g∘f, α)` and `T(g, T(f, α))`; all
/// three positions are enumerated here.
pub fn violations_touching(
    frag: &Fragment,
    index: &LawIndex,
    alpha: usize,
    slot: usize,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let m = frag.arity(alpha);
    let (n, f_table) = frag.slot_map(m, slot);
    let f = FinFun::from_table_unchecked(n, f_table.clone());

    if f.is_identity() {
        let got = frag.push(&f_table, n, alpha);
        if got != alpha {
            violations.push(Violation::Identity { alpha, got });
        }
    }

    // As the inner step f of (g, f, α).
    let mid = frag.push(&f_table, n, alpha);
    for g in &index.generators[n] {
        check_pair(frag, g, &f_table, n, alpha, mid, &mut violations);
    }

    // As the composite g∘f' of (g, f', α): f' ranges over the tables with
    // f'(x) ∈ g⁻¹(f(x)).
    for n0 in 0..=frag.bound() {
        for g in index.generators[n0].iter().filter(|g| g.cod().size() == n) {
            let choices: Vec<Vec<usize>> = f_table.iter().map(|&y| g.fiber(y).collect()).collect();
            if choices.iter().any(Vec::is_empty) {
                continue;
            }
            let mut pick = vec![0usize; m];
            loop {
                let table: Vec<usize> = pick.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
                let inner = frag.push(&table, n0, alpha);
                check_pair(frag, g, &table, n0, alpha, inner, &mut violations);
                // Odometer step over the choices.
                let Some(pos) = (0..m).rev().find(|&x| pick[x] + 1 < choices[x].len()) else {
                    break;
                };
                pick[pos] += 1;
                pick[pos + 1..].iter_mut().for_each(|p| *p = 0);
            }
        }
    }

    // As the outer step g of (g, f', α') with f'_*α' = α.
    if index.generators[m].iter().any(|g| *g == f) {
        for &(source, source_slot) in &index.preimages[alpha] {
            let sm = frag.arity(source);
            let (n1, t1) = frag.slot_map(sm, source_slot);
            if n1 != m || frag.push(&t1, n1, source) != alpha {
                continue;
            }
            check_pair(frag, &f, &t1, n1, source, alpha, &mut violations);
        }
    }

    violations.sort_by(|a, b| order_key(a).cmp(&order_key(b)));
    violations.dedup();
    violations
}

fn order_key(v: &Violation) -> (usize, usize, &[usize], &[usize], usize, usize) {
    match v {
        Violation::Singleton { count } => (0, *count, &[], &[], 0, 0),
        Violation::Identity { alpha, got } => (1, *alpha, &[], &[], *got, 0),
        Violation::Functoriality {
            g,
            f,
            alpha,
            composite,
            stepwise,
        } => (2, *alpha, g.table(), f.table(), *composite, *stepwise),
    }
}

/// `f_*δ_X(x) = δ_Y(f(x))` for every map within the bound.
pub fn delta_naturality_failures(frag: &Fragment) -> Vec<(FinFun, usize)> {
    let bound = frag.bound();
    let mut out = Vec::new();
    for m in 1..=bound {
        for n in 0..=bound {
            for f in crate::finset::enumerate_functions(&m.into(), &n.into()) {
                for x in 0..m {
                    let lhs = frag.push(f.table(), n, frag.delta(m, x).expect("x < m"));
                    let rhs = frag.delta(n, f.apply(x)).expect("f(x) < n");
                    if lhs != rhs {
                        out.push((f.clone(), x));
                    }
                }
            }
        }
    }
    out
}

/// Checks a pair `(g, f)` directly, outside the generating set.
pub fn check_composable(frag: &Fragment, g: &FinFun, f: &FinFun, alpha: usize) -> Option<Violation> {
    let gf = compose(g, f).ok()?;
    let composite = frag.push(gf.table(), g.cod().size(), alpha);
    let stepwise = frag.push(g.table(), g.cod().size(), frag.push(f.table(), f.cod().size(), alpha));
    (composite != stepwise).then(|| Violation::Functoriality {
        g: g.clone(),
        f: f.clone(),
        alpha,
        composite,
        stepwise,
    })
}
