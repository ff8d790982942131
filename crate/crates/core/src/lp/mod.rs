//! Exact linear feasibility for the probabilistic-state system.
//!
//! [`solve`] works on a subset of the equality rows: the normalization rows
//! and the naturality rows of the generating maps from [`crate::laws`]. On a
//! lawful fragment these imply all other naturality rows, since naturality
//! along `g` and along `f` gives naturality along `g∘f`. Every candidate point
//! is nevertheless checked against the whole system and violated rows are
//! added before solving again.
//!
//! Before the simplex runs, two-variable rows `x_u = x_v` are contracted with
//! a union-find. An infeasibility proof for the contracted system lifts to the
//! full system: residual coefficients inside each class are moved along the
//! spanning-tree rows to the class root, where they sum to the (nonnegative)
//! reduced coefficient and are absorbed by that variable's nonnegativity row.

pub mod certificate;
pub mod simplex;
pub mod system;

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fragment::Fragment;
use crate::laws::generating_maps;
use crate::rational::{self, Rational};
pub use certificate::Certificate;
use simplex::{LinRow, PhaseOne};
pub use system::StateSystem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Point(Vec<Rational>),
    Infeasible(Certificate),
}

/// Statistics from the last solve, for reports.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub rounds: usize,
    pub working_rows: usize,
    pub reduced_vars: usize,
    pub reduced_rows: usize,
}

/// Rows of the generating maps plus normalization: the initial working set.
pub fn generating_rows(frag: &Fragment, sys: &StateSystem) -> BTreeSet<usize> {
    let bound = frag.bound();
    let gens: Vec<_> = (0..=bound).map(|n| generating_maps(n, bound)).collect();
    let mut rows = BTreeSet::new();
    for alpha in frag.ids() {
        if let Some(r) = sys.normalization_row(alpha) {
            rows.insert(r);
        }
        let m = frag.arity(alpha);
        for g in &gens[m] {
            let n = g.cod().size();
            let slot = frag.slot(m, n, g.index());
            for y in 0..n {
                if let Some(r) = sys.naturality_row(frag, alpha, slot, y) {
                    rows.insert(r);
                }
            }
        }
    }
    rows
}

fn row_value(sys: &StateSystem, k: usize, x: &[Rational]) -> Rational {
    sys.rows()[k]
        .coeffs
        .iter()
        .map(|&(v, c)| &x[v] * rational::int(c))
        .sum()
}

pub fn violated_rows(sys: &StateSystem, x: &[Rational]) -> Vec<usize> {
    (0..sys.num_equalities())
        .filter(|&k| row_value(sys, k, x) != rational::int(sys.rows()[k].rhs))
        .collect()
}

struct Contraction {
    class_of: Vec<usize>,
    num_classes: usize,
    /// Tree rows `(row, u, v)` that merged two classes.
    edges: Vec<(usize, usize, usize)>,
    roots: Vec<usize>,
}

fn contract(sys: &StateSystem, working: &BTreeSet<usize>) -> Contraction {
    let n = sys.num_vars();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut edges = Vec::new();
    for &k in working {
        let row = &sys.rows()[k];
        if let [(u, a), (v, b)] = row.coeffs[..] {
            if row.rhs == 0 && a == -b {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru != rv {
                    parent[ru.max(rv)] = ru.min(rv);
                    edges.push((k, u, v));
                }
            }
        }
    }
    let mut class_of = vec![usize::MAX; n];
    let mut root_class: HashMap<usize, usize> = HashMap::new();
    let mut roots = Vec::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        let next = root_class.len();
        let c = *root_class.entry(r).or_insert_with(|| {
            roots.push(r);
            next
        });
        class_of[v] = c;
    }
    Contraction {
        num_classes: roots.len(),
        class_of,
        edges,
        roots,
    }
}

/// Decides the system exactly; on infeasibility the returned certificate
/// replays against `sys`.
pub fn solve(frag: &Fragment, sys: &StateSystem) -> Result<(Solution, SolveStats)> {
    let mut working = generating_rows(frag, sys);
    let mut stats = SolveStats::default();
    loop {
        stats.rounds += 1;
        stats.working_rows = working.len();
        let con = contract(sys, &working);

        let mut reduced: Vec<LinRow> = Vec::new();
        let mut source: Vec<usize> = Vec::new();
        let mut seen: HashMap<(Vec<(usize, i64)>, i64), ()> = HashMap::new();
        for &k in &working {
            let row = &sys.rows()[k];
            let mut acc: Vec<(usize, i64)> = row.coeffs.iter().map(|&(v, c)| (con.class_of[v], c)).collect();
            acc.sort_unstable();
            let mut merged: Vec<(usize, i64)> = Vec::new();
            for (c, a) in acc {
                match merged.last_mut() {
                    Some((d, b)) if *d == c => *b += a,
                    _ => merged.push((c, a)),
                }
            }
            merged.retain(|e| e.1 != 0);
            if merged.is_empty() && row.rhs == 0 {
                continue;
            }
            let key = (merged, row.rhs);
            if seen.insert(key.clone(), ()).is_some() {
                continue;
            }
            reduced.push(LinRow {
                coeffs: key.0.iter().map(|&(c, a)| (c, rational::int(a))).collect(),
                rhs: rational::int(key.1),
            });
            source.push(k);
        }
        stats.reduced_vars = con.num_classes;
        stats.reduced_rows = reduced.len();

        match simplex::phase_one(&reduced, con.num_classes) {
            PhaseOne::Feasible(z) => {
                let x: Vec<Rational> = (0..sys.num_vars()).map(|v| z[con.class_of[v]].clone()).collect();
                let violated = violated_rows(sys, &x);
                if violated.is_empty() {
                    return Ok((Solution::Point(x), stats));
                }
                working.extend(violated);
            }
            PhaseOne::Infeasible(mu) => {
                let cert = lift(sys, &con, &source, &mu);
                if !cert.replay(sys)? {
                    return Err(Error::Certificate(
                        "lifted multipliers failed to replay; this is a solver bug".into(),
                    ));
                }
                return Ok((Solution::Infeasible(cert), stats));
            }
        }
    }
}

fn lift(sys: &StateSystem, con: &Contraction, source: &[usize], mu: &[Rational]) -> Certificate {
    let ne = sys.num_equalities();
    let n = sys.num_vars();
    let mut multipliers = vec![Rational::zero(); ne + n];
    for (r, m) in mu.iter().enumerate() {
        multipliers[source[r]] += m;
    }
    let mut residual = vec![Rational::zero(); n];
    for (k, m) in multipliers[..ne].iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        for &(v, c) in &sys.rows()[k].coeffs {
            residual[v] += m * rational::int(c);
        }
    }

    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &(k, u, v) in &con.edges {
        adjacency[u].push((v, k));
        adjacency[v].push((u, k));
    }
    for &root in &con.roots {
        // BFS order from the root; children are settled before their parents.
        let mut order = vec![root];
        let mut parent_edge: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut queue = VecDeque::from([root]);
        let mut visited = BTreeSet::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(w, k) in &adjacency[u] {
                if visited.insert(w) {
                    parent_edge.insert(w, (u, k));
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        for &u in order.iter().skip(1).rev() {
            let (p, k) = parent_edge[&u];
            let row = &sys.rows()[k];
            let cu = row.coeffs.iter().find(|e| e.0 == u).expect("edge row mentions u").1;
            let cp = row.coeffs.iter().find(|e| e.0 == p).expect("edge row mentions p").1;
            let nu = -(&residual[u]) / rational::int(cu);
            residual[p] += &nu * rational::int(cp);
            residual[u] = Rational::zero();
            multipliers[k] += nu;
        }
        multipliers[ne + root] = std::mem::replace(&mut residual[root], Rational::zero());
    }
    Certificate::new(sys, multipliers)
}
