//! The probabilistic theory induced by a fragment's probabilistic states.
//!
//! States live in the product of `R^X` over carried measurements, with one
//! axis per `(α, x)` as laid out by [`StateSystem`]. The state set is the
//! polytope cut out by the normalization and naturality equalities and
//! nonnegativity. Each measurement `α` over `X` becomes the tuple of its
//! coordinate functionals `ĥα_x`, and `tr` is the coordinate of `τ`.
//!
//! Vertices are computed exactly: equalities of the form `x_u = x_v` are
//! merged first, the rest are solved by Gauss-Jordan elimination, and the
//! nonnegativity rows, rewritten over the free coordinates, go to the double
//! description in [`dd`]. The cap applies to the number of free coordinates.

pub mod dd;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::fragment::Fragment;
use crate::lp::StateSystem;
use crate::rational::{self, Rational};
use crate::states::ProbabilisticState;

pub const DEFAULT_DIMENSION_CAP: usize = 24;

#[derive(Clone, Debug)]
pub struct StatePolytope {
    system: StateSystem,
    tau_axis: usize,
    /// Free coordinates after solving the equalities; `None` when they are
    /// inconsistent.
    free_dim: Option<usize>,
    vertices: Vec<Vec<Rational>>,
}

/// A linear functional on the ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Effect {
    /// Sparse coefficients by axis.
    pub coeffs: Vec<(usize, Rational)>,
}

impl Effect {
    pub fn axis(axis: usize) -> Self {
        Effect {
            coeffs: vec![(axis, rational::one())],
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(a, c)| c * &point[*a]).sum()
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (k, (a, c)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if *c == rational::one() {
                write!(f, "x{a}")?;
            } else {
                write!(f, "{}·x{a}", rational::format(c))?;
            }
        }
        Ok(())
    }
}

fn union_find_classes(sys: &StateSystem) -> (Vec<usize>, usize) {
    let n = sys.num_vars();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for row in &sys.rows()[..sys.num_equalities()] {
        if let [(u, a), (v, b)] = row.coeffs[..] {
            if row.rhs == 0 && a == -b {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                parent[ru.max(rv)] = ru.min(rv);
            }
        }
    }
    let mut class_of = vec![0; n];
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        let next = ids.len();
        class_of[v] = *ids.entry(r).or_insert(next);
    }
    (class_of, ids.len())
}

/// Reduced row echelon form of `rows` (last entry is the right-hand side).
/// Returns `(pivot, row)` pairs, or `None` if the rows are inconsistent.
fn rref(rows: impl Iterator<Item = Vec<Rational>>, width: usize) -> Option<Vec<(usize, Vec<Rational>)>> {
    let mut basis: Vec<(usize, Vec<Rational>)> = Vec::new();
    for mut v in rows {
        for (p, b) in &basis {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= &f * bi;
                }
            }
        }
        let Some(p) = (0..width).find(|&i| !v[i].is_zero()) else {
            if !v[width].is_zero() {
                return None;
            }
            continue;
        };
        let inv = v[p].recip();
        v.iter_mut().for_each(|x| *x *= &inv);
        for (_, b) in basis.iter_mut() {
            if !b[p].is_zero() {
                let f = b[p].clone();
                for (bi, vi) in b.iter_mut().zip(&v) {
                    *bi -= &f * vi;
                }
            }
        }
        basis.push((p, v));
    }
    Some(basis)
}

pub fn build_state_polytope(frag: &Fragment, cap: usize) -> Result<StatePolytope> {
    let system = StateSystem::build(frag)?;
    let tau_axis = system.var(frag.tau(), 0);
    let (class_of, k) = union_find_classes(&system);
    let rows = system.rows()[..system.num_equalities()].iter().map(|row| {
        let mut v = vec![Rational::zero(); k + 1];
        for &(var, c) in &row.coeffs {
            v[class_of[var]] += rational::int(c);
        }
        v[k] = rational::int(row.rhs);
        v
    });
    let Some(basis) = rref(rows, k) else {
        return Ok(StatePolytope {
            system,
            tau_axis,
            free_dim: None,
            vertices: Vec::new(),
        });
    };
    let mut is_pivot = vec![false; k];
    for (p, _) in &basis {
        is_pivot[*p] = true;
    }
    let free: Vec<usize> = (0..k).filter(|&c| !is_pivot[c]).collect();
    let d = free.len();
    if d > cap {
        return Err(Error::DimensionCap { dim: d, cap });
    }

    // Homogeneous coordinates (s, t_f for f in free): s ≥ 0, t_f ≥ 0, and
    // for each pivot class p: x_p = b_p − Σ c_pf t_f ≥ 0.
    let mut cone: Vec<dd::IntVec> = Vec::new();
    let unit = |i: usize| {
        let mut v = vec![Rational::zero(); d + 1];
        v[i] = rational::one();
        dd::integral(&v)
    };
    cone.push(unit(0));
    for i in 0..d {
        cone.push(unit(i + 1));
    }
    for (_, b) in &basis {
        let mut v = vec![b[k].clone()];
        v.extend(free.iter().map(|&f| -b[f].clone()));
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        cone.push(dd::integral(&v));
    }
    cone.sort();
    cone.dedup();

    let mut vertices = Vec::new();
    for ray in dd::extreme_rays(&cone, d + 1)? {
        if !ray[0].is_positive() {
            return Err(Error::Unbounded("the state set has a recession direction".into()));
        }
        let s = Rational::from_integer(ray[0].clone());
        let mut class_value = vec![Rational::zero(); k];
        for (i, &f) in free.iter().enumerate() {
            class_value[f] = Rational::from_integer(ray[i + 1].clone()) / &s;
        }
        for (p, b) in &basis {
            let mut x = b[k].clone();
            for &f in &free {
                x -= &b[f] * &class_value[f];
            }
            class_value[*p] = x;
        }
        vertices.push(class_of.iter().map(|&c| class_value[c].clone()).collect());
    }
    vertices.sort();
    Ok(StatePolytope {
        system,
        tau_axis,
        free_dim: Some(d),
        vertices,
    })
}

impl StatePolytope {
    pub fn system(&self) -> &StateSystem {
        &self.system
    }

    pub fn ambient_dim(&self) -> usize {
        self.system.num_vars()
    }

    /// Dimension of the solution set of the equalities (an upper bound on
    /// the polytope's dimension), `None` if they have no solution.
    pub fn free_dim(&self) -> Option<usize> {
        self.free_dim
    }

    pub fn axis(&self, alpha: usize, x: usize) -> usize {
        self.system.var(alpha, x)
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// The unit effect: the coordinate of `τ`.
    pub fn tr(&self) -> Effect {
        Effect::axis(self.tau_axis)
    }

    /// Vertex `k` as a state of `frag`.
    pub fn vertex_state(&self, frag: &Fragment, k: usize) -> ProbabilisticState {
        let v = &self.vertices[k];
        ProbabilisticState {
            dist: frag
                .ids()
                .map(|id| (0..frag.arity(id)).map(|x| v[self.axis(id, x)].clone()).collect())
                .collect(),
        }
    }

    fn profile(&self, frag: &Fragment, alpha: usize) -> Vec<Rational> {
        let m = frag.arity(alpha);
        self.vertices
            .iter()
            .flat_map(|v| (0..m).map(move |x| v[self.axis(alpha, x)].clone()))
            .collect()
    }
}

/// The coordinate effects `ĥα_x`, each checked to lie between 0 and `tr` on
/// every vertex.
pub fn extract_effects(frag: &Fragment, poly: &StatePolytope, alpha: usize) -> Result<Vec<Effect>> {
    if alpha >= frag.len() {
        return Err(Error::NotCarried(format!("id {alpha}")));
    }
    let tr = poly.tr();
    let effects: Vec<Effect> = (0..frag.arity(alpha)).map(|x| Effect::axis(poly.axis(alpha, x))).collect();
    for v in poly.vertices() {
        let t = tr.eval(v);
        for e in &effects {
            let val = e.eval(v);
            if val.is_negative() || val > t {
                return Err(Error::Certificate(format!("effect {e} leaves [0, tr] at a vertex")));
            }
        }
    }
    Ok(effects)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation {
    /// Groups (two or more) of measurements over the same set whose effect
    /// tuples agree on every state.
    pub groups: Vec<Vec<usize>>,
}

impl Separation {
    pub fn is_separated(&self) -> bool {
        self.groups.is_empty()
    }

    /// Every unseparated pair `(α, β)` with `α < β`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.groups.iter().flat_map(|g| {
            g.iter()
                .enumerate()
                .flat_map(move |(i, &a)| g[i + 1..].iter().map(move |&b| (a, b)))
        })
    }
}

/// Decided on vertices: effects are linear and states are their convex hull.
pub fn check_separation(frag: &Fragment, poly: &StatePolytope) -> Separation {
    let mut groups = Vec::new();
    for n in 0..=frag.bound() {
        let mut by_profile: BTreeMap<Vec<Rational>, Vec<usize>> = BTreeMap::new();
        for alpha in frag.carrier(n) {
            by_profile.entry(poly.profile(frag, alpha)).or_default().push(alpha);
        }
        groups.extend(by_profile.into_values().filter(|g| g.len() > 1));
    }
    groups.sort();
    Separation { groups }
}

#[derive(Clone, Debug)]
pub struct EffectTupleEmbedding {
    /// `tuples[α][x] = ĥα_x`.
    pub tuples: Vec<Vec<Effect>>,
    pub tr: Effect,
    /// Identities checked exactly: one per vertex and measurement for
    /// normalization, one per vertex, table entry and outcome for
    /// pushforward.
    pub checks: usize,
}

impl EffectTupleEmbedding {
    /// `ĥα_x` evaluated at every vertex, vertex-major.
    pub fn values(&self, poly: &StatePolytope, alpha: usize) -> Vec<Vec<Rational>> {
        poly.vertices()
            .iter()
            .map(|v| self.tuples[alpha].iter().map(|e| e.eval(v)).collect())
            .collect()
    }
}

/// Sends each `α` to its effect tuple and verifies `Σ_x ĥα_x = tr` and
/// `ĥ(f_*α)_y = Σ_{f(x) = y} ĥα_x` on every vertex.
pub fn embed(frag: &Fragment, poly: &StatePolytope) -> Result<EffectTupleEmbedding> {
    let sep = check_separation(frag, poly);
    if let Some((a, b)) = sep.pairs().next() {
        return Err(Error::Refused(format!(
            "{} and {} are not separated by any probabilistic state",
            frag.describe(a),
            frag.describe(b)
        )));
    }
    let tr = poly.tr();
    let tuples = frag
        .ids()
        .map(|alpha| extract_effects(frag, poly, alpha))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = 0;
    for v in poly.vertices() {
        let t = tr.eval(v);
        for alpha in frag.ids() {
            let sum: Rational = tuples[alpha].iter().map(|e| e.eval(v)).sum();
            if sum != t {
                return Err(Error::Certificate(format!(
                    "effects of {} do not sum to tr",
                    frag.describe(alpha)
                )));
            }
            checks += 1;
            let m = frag.arity(alpha);
            for slot in 0..frag.row_len(m) {
                let (n, table) = frag.slot_map(m, slot);
                let beta = frag.entry(alpha, slot).ok_or(Error::NotMaterialized)?;
                let mut pushed = vec![Rational::zero(); n];
                for (x, &y) in table.iter().enumerate() {
                    pushed[y] += tuples[alpha][x].eval(v);
                }
                for (y, p) in pushed.iter().enumerate() {
                    if tuples[beta][y].eval(v) != *p {
                        return Err(Error::Certificate(format!(
                            "pushforward of {} along {table:?} breaks the effect-sum identity",
                            frag.describe(alpha)
                        )));
                    }
                    checks += 1;
                }
            }
        }
    }
    Ok(EffectTupleEmbedding { tuples, tr, checks })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::family::{Classical, Delta, Payload, UnknownFunctions, Weird};
    use crate::fragment::Measurement;
    use crate::states::is_probabilistic_state;

    #[test]
    fn classical_two_states_give_two_vertices() {
        let frag = Fragment::full(Arc::new(Classical::new(2)), 3).unwrap();
        let poly = build_state_polytope(&frag, DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(poly.vertices().len(), 2);
        for k in 0..2 {
            assert!(is_probabilistic_state(&frag, &poly.vertex_state(&frag, k)));
        }
        assert!(check_separation(&frag, &poly).is_separated());
        let emb = embed(&frag, &poly).unwrap();
        assert!(emb.checks > 0);
    }

    #[test]
    fn unknown_functions_polytope_is_empty() {
        let frag = Fragment::full(Arc::new(UnknownFunctions::new(1)), 3).unwrap();
        let poly = build_state_polytope(&frag, DEFAULT_DIMENSION_CAP).unwrap();
        assert!(poly.is_empty());
        let sep = check_separation(&frag, &poly);
        let over_two = frag.carrier(2).len();
        let pairs_two = sep.pairs().filter(|(a, _)| frag.arity(*a) == 2).count();
        assert_eq!(pairs_two, over_two * (over_two - 1) / 2);
        assert!(embed(&frag, &poly).is_err());
    }

    #[test]
    fn tau_and_deltas_pin_a_single_vertex() {
        let frag = Fragment::close(Arc::new(Delta), &[], 2).unwrap();
        let poly = build_state_polytope(&frag, DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(poly.vertices().len(), 1);
        let tau = extract_effects(&frag, &poly, frag.tau()).unwrap();
        assert_eq!(tau, vec![poly.tr()]);
    }

    #[test]
    fn weird_has_no_states_at_all() {
        let frag = Fragment::full(Arc::new(Weird), 3).unwrap();
        let poly = build_state_polytope(&frag, DEFAULT_DIMENSION_CAP).unwrap();
        assert!(poly.is_empty());
        let sep = check_separation(&frag, &poly);
        assert!(sep.pairs().any(|(a, _)| frag.arity(a) == 3));
    }

    #[test]
    fn delta_generator_is_recovered() {
        let u = Payload::Distribution(vec![rational::ratio(1, 2), rational::ratio(1, 2)]);
        let frag = Fragment::close(Arc::new(Delta), &[Measurement::new(2, u)], 3).unwrap();
        let poly = build_state_polytope(&frag, DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(poly.vertices().len(), 1);
        let emb = embed(&frag, &poly).unwrap();
        let g = frag.generators()[0];
        assert_eq!(emb.values(&poly, g), vec![vec![rational::ratio(1, 2); 2]]);
    }

    #[test]
    fn dimension_cap_refuses() {
        let frag = Fragment::full(Arc::new(Classical::new(3)), 3).unwrap();
        assert!(matches!(
            build_state_polytope(&frag, 1),
            Err(Error::DimensionCap { dim: 2, cap: 1 })
        ));
    }
}
