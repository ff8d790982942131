//! Structural properties of fragments: binarizability, compatibility,
//! classicality, projectivity, and post-processing reachability.
//!
//! Compatibility of `α_1, …, α_n` is decided on the product `X_1 × … × X_n`
//! (row-major): a joint measurement exists over some `Y` iff one exists over
//! the product, and strong compatibility asks for exactly one there. When the
//! product is larger than the bound the answer is [`Verdict::Inconclusive`],
//! never a failure.
//!
//! Answers are relative to the fragment: searches range over carried
//! measurements only, and a generated fragment may lack joints that the full
//! theory has.

use std::collections::HashMap;
use std::fmt;

use crate::finset::{product_many, FinFun, Tables};
use crate::fragment::{Fragment, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    /// The fragment bound is too small to decide.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive: fragment bound too small",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Distinct measurements over the same set that no two-outcome
    /// coarse-graining separates.
    Indistinguishable { alpha: usize, beta: usize },
    /// A joint measurement with the requested marginals.
    Joint { alphas: Vec<usize>, beta: usize },
    NoJoint { alphas: Vec<usize> },
    /// At least two joints; the first two found are listed.
    ManyJoints { alphas: Vec<usize>, betas: Vec<usize> },
    /// `f_*α = g_*α` but `α` is not uniquely supported on the equalizer.
    Unsupported {
        alpha: usize,
        f: FinFun,
        g: FinFun,
        subset: Vec<usize>,
        sections: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub trace: Vec<String>,
    pub fragment_relative: bool,
    /// Instances decided within the bound.
    pub checked: usize,
    /// Instances skipped because a product exceeded the bound.
    pub inconclusive: usize,
}

impl CheckReport {
    fn new(frag: &Fragment, verdict: Verdict) -> Self {
        CheckReport {
            verdict,
            witness: None,
            trace: Vec::new(),
            fragment_relative: frag.provenance() == Provenance::Generated,
            checked: 0,
            inconclusive: 0,
        }
    }

    fn finish(mut self) -> Self {
        if self.inconclusive > 0 {
            self.fragment_relative = true;
        }
        self
    }
}

/// Distinct `α, β` over the same set are separated by some `f : X → 2`.
pub fn is_binarizable(frag: &Fragment) -> CheckReport {
    let mut report = CheckReport::new(frag, Verdict::Holds);
    if frag.bound() < 2 {
        report.verdict = Verdict::Inconclusive;
        report.trace.push("binary outcome sets need a bound of at least 2".into());
        return report;
    }
    for n in 0..=frag.bound() {
        let ids = frag.carrier(n);
        let binarizations: Vec<Vec<usize>> = Tables::new(n, 2).collect();
        let profiles: Vec<Vec<usize>> = ids
            .clone()
            .map(|a| binarizations.iter().map(|t| frag.push(t, 2, a)).collect())
            .collect();
        let mut seen: HashMap<&[usize], usize> = HashMap::new();
        for (k, p) in profiles.iter().enumerate() {
            report.checked += 1;
            if let Some(&first) = seen.get(p.as_slice()) {
                let (alpha, beta) = (ids.start + first, ids.start + k);
                report.verdict = Verdict::Fails;
                report.trace.push(format!(
                    "over {n} outcomes, {} and {} have the same image under all {} maps to 2",
                    frag.describe(alpha),
                    frag.describe(beta),
                    binarizations.len()
                ));
                report.witness = Some(Witness::Indistinguishable { alpha, beta });
                return report.finish();
            }
            seen.insert(p, k);
        }
    }
    report.finish()
}

/// Joints over the product of the marginals' outcome sets, in id order;
/// stops after `stop_after` matches. `None` if the product exceeds the bound.
fn joints(frag: &Fragment, alphas: &[usize], stop_after: usize) -> Option<Vec<usize>> {
    let sizes: Vec<usize> = alphas.iter().map(|&a| frag.arity(a)).collect();
    let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s))?;
    if total > frag.bound() {
        return None;
    }
    let (_, projections) = product_many(&sizes);
    let mut out = Vec::new();
    for beta in frag.carrier(total) {
        let fits = projections
            .iter()
            .zip(alphas)
            .all(|(p, &a)| frag.push(p.table(), p.cod().size(), beta) == a);
        if fits {
            out.push(beta);
            if out.len() >= stop_after {
                break;
            }
        }
    }
    Some(out)
}

fn names(frag: &Fragment, alphas: &[usize]) -> String {
    alphas
        .iter()
        .map(|&a| frag.describe(a))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn weakly_compatible(frag: &Fragment, alphas: &[usize]) -> CheckReport {
    let mut report = CheckReport::new(frag, Verdict::Holds);
    match joints(frag, alphas, 1) {
        None => {
            report.verdict = Verdict::Inconclusive;
            report.inconclusive = 1;
            report.trace.push(format!(
                "the product of the outcome sets of {} exceeds the bound {}",
                names(frag, alphas),
                frag.bound()
            ));
        }
        Some(found) => {
            report.checked = 1;
            if let Some(&beta) = found.first() {
                report.trace.push(format!("joint {}", frag.describe(beta)));
                report.witness = Some(Witness::Joint {
                    alphas: alphas.to_vec(),
                    beta,
                });
            } else {
                report.verdict = Verdict::Fails;
                report.trace.push(format!("no carried joint for {}", names(frag, alphas)));
                report.witness = Some(Witness::NoJoint {
                    alphas: alphas.to_vec(),
                });
            }
        }
    }
    report.finish()
}

pub fn strongly_compatible(frag: &Fragment, alphas: &[usize]) -> CheckReport {
    let mut report = CheckReport::new(frag, Verdict::Holds);
    match joints(frag, alphas, 2) {
        None => {
            report.verdict = Verdict::Inconclusive;
            report.inconclusive = 1;
            report.trace.push(format!(
                "the product of the outcome sets of {} exceeds the bound {}",
                names(frag, alphas),
                frag.bound()
            ));
        }
        Some(found) => {
            report.checked = 1;
            let alphas = alphas.to_vec();
            match found.as_slice() {
                [] => {
                    report.verdict = Verdict::Fails;
                    report.trace.push("none: no joint measurement".into());
                    report.witness = Some(Witness::NoJoint { alphas });
                }
                [beta] => {
                    report.trace.push(format!("unique joint {}", frag.describe(*beta)));
                    report.witness = Some(Witness::Joint { alphas, beta: *beta });
                }
                betas => {
                    report.verdict = Verdict::Fails;
                    report.trace.push(format!(
                        "multiple: {} and {} both have these marginals",
                        frag.describe(betas[0]),
                        frag.describe(betas[1])
                    ));
                    report.witness = Some(Witness::ManyJoints {
                        alphas,
                        betas: betas.to_vec(),
                    });
                }
            }
        }
    }
    report.finish()
}

/// Measurements that enter classicality sweeps: everything over a nonempty
/// outcome set.
fn sweep_ids(frag: &Fragment) -> Vec<usize> {
    (1..=frag.bound()).flat_map(|n| frag.carrier(n)).collect()
}

/// Non-decreasing index tuples of length `k` over `0..n`.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

pub const DEFAULT_WEAK_ARITY: usize = 3;

fn sweep(frag: &Fragment, max_arity: usize, min_arity: usize, strong: bool) -> CheckReport {
    let ids = sweep_ids(frag);
    let mut report = CheckReport::new(frag, Verdict::Holds);
    for k in min_arity..=max_arity {
        for combo in multisets(ids.len(), k) {
            let alphas: Vec<usize> = combo.iter().map(|&i| ids[i]).collect();
            let single = if strong {
                strongly_compatible(frag, &alphas)
            } else {
                weakly_compatible(frag, &alphas)
            };
            match single.verdict {
                Verdict::Inconclusive => report.inconclusive += 1,
                Verdict::Holds => report.checked += 1,
                Verdict::Fails => {
                    report.checked += 1;
                    report.verdict = Verdict::Fails;
                    report.trace.extend(single.trace);
                    report.witness = single.witness;
                    return report.finish();
                }
            }
        }
    }
    report.trace.push(format!(
        "{} families decided, {} beyond the bound",
        report.checked, report.inconclusive
    ));
    report.finish()
}

/// Every family of at most `max_arity` measurements whose product fits in
/// the bound is weakly compatible. Measurements over the empty set are left
/// out of the sweep.
pub fn is_weakly_classical(frag: &Fragment, max_arity: usize) -> CheckReport {
    sweep(frag, max_arity, 2, false)
}

/// Every pair whose product fits in the bound is strongly compatible; pairs
/// suffice for all finite families.
pub fn is_strongly_classical(frag: &Fragment) -> CheckReport {
    sweep(frag, 2, 2, true)
}

/// Number of `σ` over `|subset|` with `i_*σ = α` for the order-preserving
/// inclusion of `subset` into the outcome set of `α`.
fn sections(frag: &Fragment, alpha: usize, subset: &[usize]) -> usize {
    let m = frag.arity(alpha);
    frag.carrier(subset.len())
        .filter(|&s| frag.push(subset, m, s) == alpha)
        .count()
}

/// Whenever `f_*α = g_*α`, `α` is the image of exactly one measurement over
/// the equalizer `{x | f(x) = g(x)}`.
pub fn is_projective(frag: &Fragment) -> CheckReport {
    let mut report = CheckReport::new(frag, Verdict::Holds);
    let bound = frag.bound();
    for alpha in frag.ids() {
        let m = frag.arity(alpha);
        let mut cache: HashMap<u64, usize> = HashMap::new();
        for n in 0..=bound {
            let maps: Vec<Vec<usize>> = Tables::new(m, n).collect();
            let mut buckets: HashMap<usize, Vec<usize>> = HashMap::new();
            for (k, t) in maps.iter().enumerate() {
                buckets.entry(frag.push(t, n, alpha)).or_default().push(k);
            }
            // Scan f in index order and pair it with every earlier g.
            let mut bucket_of = vec![0usize; maps.len()];
            for (image, members) in &buckets {
                for &k in members {
                    bucket_of[k] = *image;
                }
            }
            for fk in 0..maps.len() {
                let members = &buckets[&bucket_of[fk]];
                for &gk in members.iter().take_while(|&&gk| gk < fk) {
                    let (f, g) = (&maps[fk], &maps[gk]);
                    let mask = (0..m).filter(|&x| f[x] == g[x]).fold(0u64, |acc, x| acc | 1 << x);
                    let subset: Vec<usize> = (0..m).filter(|x| mask >> x & 1 == 1).collect();
                    let count = *cache
                        .entry(mask)
                        .or_insert_with(|| sections(frag, alpha, &subset));
                    report.checked += 1;
                    if count != 1 {
                        let f = FinFun::from_table_unchecked(n, f.clone());
                        let g = FinFun::from_table_unchecked(n, g.clone());
                        report.verdict = Verdict::Fails;
                        report.trace.push(format!(
                            "{} has the same image along {f} and {g}, but {count} preimages over their equalizer of size {}",
                            frag.describe(alpha),
                            subset.len()
                        ));
                        report.witness = Some(Witness::Unsupported {
                            alpha,
                            f,
                            g,
                            subset,
                            sections: count,
                        });
                        return report.finish();
                    }
                }
            }
        }
    }
    report.trace.push(format!("{} coinciding pairs checked", report.checked));
    report.finish()
}

/// The lexicographically least `f` with `f_*α = β`, if any.
pub fn reachable(frag: &Fragment, alpha: usize, beta: usize) -> Option<FinFun> {
    let (m, n) = (frag.arity(alpha), frag.arity(beta));
    Tables::new(m, n)
        .find(|t| frag.push(t, n, alpha) == beta)
        .map(|t| FinFun::from_table_unchecked(n, t))
}
