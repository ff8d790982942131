//! Natural states of a fragment: deterministic, probabilistic, possibilistic.
//!
//! A deterministic state picks an outcome `s(α)` for every carried `α` with
//! `f(s(α)) = s(f_*α)` on every table entry. A probabilistic state picks a
//! distribution with `Δ(f)(ρ(α)) = ρ(f_*α)`. A possibilistic state picks a
//! nonempty outcome set with `f[S(α)] = S(f_*α)`.

pub mod csp;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::fragment::Fragment;
use crate::lp::{self, Certificate, Solution, SolveStats, StateSystem};
use crate::rational::{self, Rational};
use csp::{Csp, Functional};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DeterministicState {
    /// Outcome chosen for each measurement id.
    pub outcome: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbabilisticState {
    /// Distribution over outcomes for each measurement id.
    pub dist: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PossibilisticState {
    /// Bitmask of possible outcomes for each measurement id.
    pub support: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbabilisticOutcome {
    State(ProbabilisticState),
    Infeasible(Certificate),
}

/// Largest bound for possibilistic search: subsets of `n` outcomes must fit
/// in a 64-bit domain.
pub const POSSIBILISTIC_MAX_BOUND: usize = 6;

fn functional_csp(frag: &Fragment, domain: impl Fn(usize) -> u64, image: impl Fn(&[usize], usize, usize) -> u8) -> Result<Csp> {
    if !frag.is_materialized() {
        return Err(Error::NotMaterialized);
    }
    let domains = frag.ids().map(|id| domain(frag.arity(id))).collect();
    let mut constraints = Vec::new();
    for alpha in frag.ids() {
        let m = frag.arity(alpha);
        let size = domain(m).checked_ilog2().map_or(0, |b| b as usize + 1);
        for slot in 0..frag.row_len(m) {
            let (n, table) = frag.slot_map(m, slot);
            let beta = frag.entry(alpha, slot).expect("materialized");
            let map = (0..size).map(|v| image(&table, n, v)).collect();
            constraints.push(Functional { from: alpha, to: beta, map });
        }
    }
    Ok(Csp::new(domains, constraints))
}

pub fn enumerate_deterministic_states(frag: &Fragment, limit: Option<usize>) -> Result<Vec<DeterministicState>> {
    let csp = functional_csp(
        frag,
        |m| if m == 0 { 0 } else { u64::MAX >> (64 - m) },
        |table, _, x| table[x] as u8,
    )?;
    Ok(csp
        .solve(limit)
        .into_iter()
        .map(|outcome| DeterministicState { outcome })
        .collect())
}

fn image_mask(table: &[usize], mask: usize) -> u8 {
    table
        .iter()
        .enumerate()
        .filter(|(x, _)| mask >> x & 1 == 1)
        .fold(0u8, |acc, (_, &y)| acc | (1 << y))
}

pub fn enumerate_possibilistic_states(frag: &Fragment, limit: Option<usize>) -> Result<Vec<PossibilisticState>> {
    if frag.bound() > POSSIBILISTIC_MAX_BOUND {
        return Err(Error::InvalidBound(format!(
            "possibilistic search supports bounds up to {POSSIBILISTIC_MAX_BOUND}"
        )));
    }
    // Value v encodes the outcome subset with bitmask v; v = 0 is excluded.
    let csp = functional_csp(
        frag,
        |m| (u64::MAX >> (64 - (1u32 << m))) & !1,
        |table, _, v| image_mask(table, v),
    )?;
    Ok(csp
        .solve(limit)
        .into_iter()
        .map(|s| PossibilisticState {
            support: s.into_iter().map(|v| v as u64).collect(),
        })
        .collect())
}

pub fn find_probabilistic_state(frag: &Fragment) -> Result<ProbabilisticOutcome> {
    Ok(find_probabilistic_state_with_stats(frag)?.0)
}

pub fn find_probabilistic_state_with_stats(frag: &Fragment) -> Result<(ProbabilisticOutcome, SolveStats)> {
    let sys = StateSystem::build(frag)?;
    let (solution, stats) = lp::solve(frag, &sys)?;
    let outcome = match solution {
        Solution::Point(x) => ProbabilisticOutcome::State(ProbabilisticState {
            dist: frag
                .ids()
                .map(|id| (0..frag.arity(id)).map(|o| x[sys.var(id, o)].clone()).collect())
                .collect(),
        }),
        Solution::Infeasible(cert) => ProbabilisticOutcome::Infeasible(cert),
    };
    Ok((outcome, stats))
}

/// Rebuilds the system from `frag` and replays `cert` exactly.
pub fn verify_certificate(frag: &Fragment, cert: &Certificate) -> Result<bool> {
    let sys = StateSystem::build(frag)?;
    cert.replay(&sys)
}

fn every_entry(frag: &Fragment, mut check: impl FnMut(usize, &[usize], usize) -> bool) -> bool {
    frag.ids().all(|alpha| {
        let m = frag.arity(alpha);
        (0..frag.row_len(m)).all(|slot| {
            let (_, table) = frag.slot_map(m, slot);
            let beta = frag.entry(alpha, slot).expect("materialized");
            check(alpha, &table, beta)
        })
    })
}

pub fn is_deterministic_state(frag: &Fragment, s: &DeterministicState) -> bool {
    frag.is_materialized()
        && s.outcome.len() == frag.len()
        && frag.ids().all(|id| s.outcome[id] < frag.arity(id))
        && every_entry(frag, |a, t, b| t[s.outcome[a]] == s.outcome[b])
}

pub fn is_possibilistic_state(frag: &Fragment, s: &PossibilisticState) -> bool {
    frag.is_materialized()
        && s.support.len() == frag.len()
        && frag
            .ids()
            .all(|id| s.support[id] != 0 && s.support[id] >> frag.arity(id) == 0)
        && every_entry(frag, |a, t, b| {
            image_mask(t, s.support[a] as usize) as u64 == s.support[b]
        })
}

pub fn is_probabilistic_state(frag: &Fragment, rho: &ProbabilisticState) -> bool {
    let shape_ok = rho.dist.len() == frag.len()
        && frag.ids().all(|id| {
            let d = &rho.dist[id];
            d.len() == frag.arity(id)
                && d.iter().all(|p| !p.is_negative())
                && d.iter().sum::<Rational>() == rational::one()
        });
    frag.is_materialized()
        && shape_ok
        && every_entry(frag, |a, t, b| {
            let mut pushed = vec![Rational::zero(); rho.dist[b].len()];
            for (x, p) in rho.dist[a].iter().enumerate() {
                pushed[t[x]] += p;
            }
            pushed == rho.dist[b]
        })
}

/// The point-mass state `α ↦ δ_{s(α)}`.
pub fn point_mass(frag: &Fragment, s: &DeterministicState) -> ProbabilisticState {
    ProbabilisticState {
        dist: frag
            .ids()
            .map(|id| {
                (0..frag.arity(id))
                    .map(|x| if x == s.outcome[id] { rational::one() } else { rational::zero() })
                    .collect()
            })
            .collect(),
    }
}

/// The singleton lift `α ↦ {s(α)}`.
pub fn singleton_lift(s: &DeterministicState) -> PossibilisticState {
    PossibilisticState {
        support: s.outcome.iter().map(|&x| 1u64 << x).collect(),
    }
}
