//! Recovering the state set of a strongly classical, projective fragment.
//!
//! `W` is the list of deterministic states in lexicographic order, and
//! `ev_X(α)` is the function `s ↦ s(α)` on `W`. The fragment is classical
//! over `W` exactly when every `ev_X` is a bijection onto `X^W`.

use crate::error::{Error, Result};
use crate::finset::function_count;
use crate::fragment::Fragment;
use crate::states::{enumerate_deterministic_states, DeterministicState};
use crate::structure::{is_projective, is_strongly_classical, CheckReport, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructionResult {
    pub states: Vec<DeterministicState>,
    /// `ev[α][w] = states[w].outcome[α]`.
    pub ev: Vec<Vec<usize>>,
    /// Whether `ev_X` is a bijection onto `X^W`, for `|X| = 0..=bound`.
    pub bijective: Vec<bool>,
    /// Table entries on which `ev_Y(f_*α) = f ∘ ev_X(α)` was checked.
    pub naturality_checks: usize,
}

impl ReconstructionResult {
    pub fn is_classical(&self) -> bool {
        self.bijective.iter().all(|&b| b)
    }
}

fn refusal(what: &str, report: &CheckReport) -> Error {
    Error::Refused(format!("{what}: {}", report.trace.join("; ")))
}

pub fn reconstruct(frag: &Fragment) -> Result<ReconstructionResult> {
    if !frag.family().is_enumerable() {
        return Err(Error::NotEnumerable(frag.family().name()));
    }
    let strong = is_strongly_classical(frag);
    if strong.verdict == Verdict::Fails {
        return Err(refusal("not strongly classical", &strong));
    }
    let proj = is_projective(frag);
    if proj.verdict == Verdict::Fails {
        return Err(refusal("not projective", &proj));
    }
    let states = enumerate_deterministic_states(frag, None)?;
    let ev: Vec<Vec<usize>> = frag
        .ids()
        .map(|alpha| states.iter().map(|s| s.outcome[alpha]).collect())
        .collect();

    let mut naturality_checks = 0;
    for alpha in frag.ids() {
        let m = frag.arity(alpha);
        for slot in 0..frag.row_len(m) {
            let (_, table) = frag.slot_map(m, slot);
            let beta = frag.entry(alpha, slot).ok_or(Error::NotMaterialized)?;
            if ev[alpha].iter().zip(&ev[beta]).any(|(&x, &y)| table[x] != y) {
                return Err(Error::Certificate(format!(
                    "evaluation is not natural at {}",
                    frag.describe(alpha)
                )));
            }
            naturality_checks += 1;
        }
    }

    let w = states.len();
    let bijective = (0..=frag.bound())
        .map(|n| {
            let ids = frag.carrier(n);
            let mut images: Vec<&Vec<usize>> = ids.clone().map(|a| &ev[a]).collect();
            images.sort();
            images.dedup();
            let injective = images.len() == ids.len();
            injective && function_count(w, n) == Some(ids.len() as u128)
        })
        .collect();

    Ok(ReconstructionResult {
        states,
        ev,
        bijective,
        naturality_checks,
    })
}
