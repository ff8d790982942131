//! Running analyses on a built fragment and recording the results.
//!
//! Every section carries a verdict, a short narrative and a JSON `data`
//! block. Apart from `elapsed_us`, a report depends only on the document and
//! the flags.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use gmtlab::fragment::Provenance;
use gmtlab::gpt::{build_state_polytope, check_separation, embed};
use gmtlab::laws::validate;
use gmtlab::lp::StateSystem;
use gmtlab::rational::{self, Rational};
use gmtlab::reconstruct::reconstruct;
use gmtlab::states::{
    enumerate_deterministic_states, enumerate_possibilistic_states, find_probabilistic_state_with_stats,
    verify_certificate, ProbabilisticOutcome, POSSIBILISTIC_MAX_BOUND,
};
use gmtlab::structure::{
    is_binarizable, is_projective, is_strongly_classical, is_weakly_classical, reachable, strongly_compatible,
    weakly_compatible, CheckReport, Verdict, Witness, DEFAULT_WEAK_ARITY,
};
use gmtlab::{Error, Fragment};

use crate::document::{Analysis, Built, Document, SchemaError};

/// Listings of states and per-measurement tables stop after this many rows.
pub const LIST_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Computed,
    /// The bound was too small to decide.
    Inconclusive,
    /// The analysis does not apply to this fragment; the narrative says why.
    Refused,
}

#[derive(Clone, Debug, Serialize)]
pub struct Section {
    pub analysis: String,
    pub status: Status,
    pub verdict: String,
    pub fragment_relative: bool,
    pub narrative: String,
    pub data: Value,
    pub elapsed_us: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: Option<String>,
    pub family: String,
    pub bound: usize,
    pub provenance: String,
    pub materialized: bool,
    /// Number of carried measurements over each outcome set size.
    pub carrier_sizes: Vec<usize>,
    pub generators: Vec<String>,
    pub sections: Vec<Section>,
    pub law_violation: bool,
    /// Infeasibility certificate text, when a probabilistic search failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.law_violation {
            3
        } else {
            0
        }
    }

    pub fn text(&self) -> String {
        let mut out = format!(
            "{} (bound {}, {}, {} measurements)\n",
            self.name.as_deref().unwrap_or(&self.family),
            self.bound,
            self.provenance,
            self.carrier_sizes.iter().sum::<usize>()
        );
        for s in &self.sections {
            let flag = if s.fragment_relative { " [fragment-relative]" } else { "" };
            out += &format!("{}: {}{flag}\n", s.analysis, s.verdict);
            for line in s.narrative.lines() {
                out += &format!("    {line}\n");
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Overrides the document's list of analyses.
    pub analyses: Option<Vec<Analysis>>,
    pub bound: Option<usize>,
    pub dim_cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            analyses: None,
            bound: None,
            dim_cap: gmtlab::gpt::DEFAULT_DIMENSION_CAP,
        }
    }
}

struct Outcome {
    status: Status,
    verdict: String,
    fragment_relative: bool,
    narrative: String,
    data: Value,
}

impl Outcome {
    fn computed(verdict: impl Into<String>, narrative: impl Into<String>, data: Value) -> Self {
        Outcome {
            status: Status::Computed,
            verdict: verdict.into(),
            fragment_relative: false,
            narrative: narrative.into(),
            data,
        }
    }

    fn refused(reason: impl std::fmt::Display) -> Self {
        Outcome {
            status: Status::Refused,
            verdict: "refused".into(),
            fragment_relative: false,
            narrative: reason.to_string(),
            data: Value::Null,
        }
    }

    fn relative(mut self, flag: bool) -> Self {
        self.fragment_relative |= flag;
        self
    }
}

fn q(r: &Rational) -> Value {
    Value::String(rational::format(r))
}

fn label(frag: &Fragment, id: usize) -> String {
    format!("{} over {}", frag.describe(id), frag.arity(id))
}

/// Measurements to list in tables: the generators if there are any,
/// otherwise the first [`LIST_LIMIT`] measurements over nonempty sets.
fn listed(built: &Built) -> Vec<usize> {
    if !built.generators.is_empty() {
        return built.generators.clone();
    }
    let frag = &built.fragment;
    frag.ids().filter(|&id| frag.arity(id) > 0).take(LIST_LIMIT).collect()
}

fn witness_json(frag: &Fragment, w: &Witness) -> Value {
    let names = |ids: &[usize]| ids.iter().map(|&i| label(frag, i)).collect::<Vec<_>>();
    match w {
        Witness::Indistinguishable { alpha, beta } => json!({"kind": "indistinguishable", "pair": names(&[*alpha, *beta])}),
        Witness::Joint { alphas, beta } => json!({"kind": "joint", "marginals": names(alphas), "joint": label(frag, *beta)}),
        Witness::NoJoint { alphas } => json!({"kind": "no-joint", "marginals": names(alphas)}),
        Witness::ManyJoints { alphas, betas } => {
            json!({"kind": "many-joints", "marginals": names(alphas), "joints": names(betas)})
        }
        Witness::Unsupported { alpha, f, g, subset, sections } => json!({
            "kind": "unsupported",
            "measurement": label(frag, *alpha),
            "f": f.table(),
            "g": g.table(),
            "equalizer": subset,
            "preimages": sections,
        }),
    }
}

fn check_outcome(frag: &Fragment, r: &CheckReport) -> Outcome {
    let status = match r.verdict {
        Verdict::Inconclusive => Status::Inconclusive,
        _ => Status::Computed,
    };
    Outcome {
        status,
        verdict: r.verdict.to_string(),
        fragment_relative: r.fragment_relative,
        narrative: r.trace.join("\n"),
        data: json!({
            "decided": r.checked,
            "beyond_bound": r.inconclusive,
            "witness": r.witness.as_ref().map(|w| witness_json(frag, w)),
        }),
    }
}

pub fn run(doc: &Document, opts: &RunOptions) -> Result<Report, SchemaError> {
    let built = doc.build(opts.bound)?;
    let frag = &built.fragment;
    let analyses = opts.analyses.clone().unwrap_or_else(|| doc.analyses.clone());

    let mut report = Report {
        name: doc.name.clone(),
        family: built.family.name(),
        bound: frag.bound(),
        provenance: match frag.provenance() {
            Provenance::Full => "full".into(),
            Provenance::Generated => "generated".into(),
        },
        materialized: frag.is_materialized(),
        carrier_sizes: (0..=frag.bound()).map(|n| frag.carrier(n).len()).collect(),
        generators: built.generators.iter().map(|&g| label(frag, g)).collect(),
        sections: Vec::new(),
        law_violation: false,
        certificate: None,
    };

    // Everything downstream assumes lawful pushforward tables.
    if frag.is_materialized() {
        let laws = validate(frag);
        if !laws.is_lawful() {
            report.law_violation = true;
            report.sections.push(Section {
                analysis: Analysis::Validate.name().into(),
                status: Status::Computed,
                verdict: "violated".into(),
                fragment_relative: false,
                narrative: laws.violations.iter().take(LIST_LIMIT).map(|v| v.to_string()).collect::<Vec<_>>().join("\n"),
                data: json!({"violations": laws.violations.len()}),
                elapsed_us: 0,
            });
            return Ok(report);
        }
    }

    for analysis in analyses {
        let start = Instant::now();
        let outcome = run_one(doc, &built, analysis, opts, &mut report)?;
        report.sections.push(Section {
            analysis: analysis.name().into(),
            status: outcome.status,
            verdict: outcome.verdict,
            fragment_relative: outcome.fragment_relative,
            narrative: outcome.narrative,
            data: outcome.data,
            elapsed_us: start.elapsed().as_micros() as u64,
        });
    }
    Ok(report)
}

fn run_one(
    doc: &Document,
    built: &Built,
    analysis: Analysis,
    opts: &RunOptions,
    report: &mut Report,
) -> Result<Outcome, SchemaError> {
    let frag = &built.fragment;
    let generated = frag.provenance() == Provenance::Generated;
    Ok(match analysis {
        Analysis::Validate => {
            let laws = validate(frag);
            if laws.complete {
                Outcome::computed(
                    "lawful",
                    "identity and functoriality hold on every table entry",
                    json!({"complete": true}),
                )
            } else {
                Outcome::refused("the pushforward table is not materialized; laws were not checked exhaustively")
            }
        }
        Analysis::DetStates => match enumerate_deterministic_states(frag, None) {
            Ok(states) => {
                let shown: Vec<Value> = states
                    .iter()
                    .take(LIST_LIMIT)
                    .map(|s| {
                        listed(built)
                            .iter()
                            .map(|&id| json!({"measurement": label(frag, id), "outcome": s.outcome[id]}))
                            .collect()
                    })
                    .collect();
                Outcome::computed(
                    format!("{} deterministic states", states.len()),
                    if states.is_empty() {
                        "no natural assignment of outcomes exists".to_string()
                    } else {
                        format!("{} natural assignments of outcomes", states.len())
                    },
                    json!({"count": states.len(), "states": shown}),
                )
                .relative(generated)
            }
            Err(e) => Outcome::refused(e),
        },
        Analysis::ProbStates => match find_probabilistic_state_with_stats(frag) {
            Ok((ProbabilisticOutcome::State(rho), stats)) => {
                let shown: Vec<Value> = listed(built)
                    .iter()
                    .map(|&id| json!({"measurement": label(frag, id), "distribution": rho.dist[id].iter().map(q).collect::<Vec<_>>()}))
                    .collect();
                Outcome::computed(
                    "feasible",
                    "a natural assignment of distributions exists",
                    json!({"state": shown, "working_rows": stats.working_rows, "reduced_variables": stats.reduced_vars}),
                )
            }
            Ok((ProbabilisticOutcome::Infeasible(cert), stats)) => {
                let sys = StateSystem::build(frag).map_err(|e| SchemaError {
                    path: ".".into(),
                    line: None,
                    column: None,
                    message: e.to_string(),
                })?;
                let verified = verify_certificate(frag, &cert).unwrap_or(false);
                let text = cert.to_text(Some(&sys));
                report.certificate = Some(text.clone());
                Outcome::computed(
                    "infeasible",
                    format!(
                        "no probabilistic state; Farkas certificate with {} nonzero multipliers, replay {}",
                        cert.nonzero().count(),
                        if verified { "accepted" } else { "REJECTED" }
                    ),
                    json!({
                        "verified": verified,
                        "nonzero_multipliers": cert.nonzero().count(),
                        "layout_sha256": cert.digest,
                        "certificate": text,
                        "working_rows": stats.working_rows,
                    }),
                )
            }
            Err(e) => Outcome::refused(e),
        },
        Analysis::PossStates => {
            if frag.bound() > POSSIBILISTIC_MAX_BOUND {
                let mut o = Outcome::refused(format!(
                    "possibilistic search supports bounds up to {POSSIBILISTIC_MAX_BOUND}"
                ));
                o.status = Status::Inconclusive;
                o
            } else {
                match enumerate_possibilistic_states(frag, None) {
                    Ok(states) => {
                        let shown: Vec<Value> = states
                            .iter()
                            .take(LIST_LIMIT)
                            .map(|s| {
                                listed(built)
                                    .iter()
                                    .map(|&id| {
                                        let set: Vec<usize> = (0..frag.arity(id)).filter(|x| s.support[id] >> x & 1 == 1).collect();
                                        json!({"measurement": label(frag, id), "possible": set})
                                    })
                                    .collect()
                            })
                            .collect();
                        Outcome::computed(
                            format!("{} possibilistic states", states.len()),
                            format!("{} natural assignments of nonempty outcome sets", states.len()),
                            json!({"count": states.len(), "states": shown}),
                        )
                        .relative(generated)
                    }
                    Err(e) => Outcome::refused(e),
                }
            }
        }
        Analysis::Binarizable => check_outcome(frag, &is_binarizable(frag)),
        Analysis::WeakClassical => {
            let arity = doc.queries.weak_arity.unwrap_or(DEFAULT_WEAK_ARITY);
            check_outcome(frag, &is_weakly_classical(frag, arity))
        }
        Analysis::StrongClassical => check_outcome(frag, &is_strongly_classical(frag)),
        Analysis::Projective => check_outcome(frag, &is_projective(frag)),
        Analysis::Compatible => {
            let mut entries = Vec::new();
            let mut lines = Vec::new();
            let mut relative = false;
            let mut any_inconclusive = false;
            for (i, family) in doc.queries.compatible.iter().enumerate() {
                let ids = family
                    .iter()
                    .enumerate()
                    .map(|(j, m)| {
                        let path = format!("queries.compatible[{i}][{j}]");
                        let meas = doc.measurement(&built.family, m, &path)?;
                        frag.id_of(&meas).map_err(|e| SchemaError {
                            path,
                            line: None,
                            column: None,
                            message: e.to_string(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let weak = weakly_compatible(frag, &ids);
                let strong = strongly_compatible(frag, &ids);
                relative |= weak.fragment_relative || strong.fragment_relative;
                any_inconclusive |= weak.verdict == Verdict::Inconclusive;
                let names: Vec<String> = ids.iter().map(|&id| label(frag, id)).collect();
                lines.push(format!(
                    "{}: weak {}, strong {}",
                    names.join(" / "),
                    weak.verdict,
                    strong.verdict
                ));
                entries.push(json!({
                    "measurements": names,
                    "weak": weak.verdict.to_string(),
                    "strong": strong.verdict.to_string(),
                    "witness": strong.witness.as_ref().map(|w| witness_json(frag, w)),
                    "trace": strong.trace,
                }));
            }
            Outcome {
                status: if any_inconclusive { Status::Inconclusive } else { Status::Computed },
                verdict: format!("{} families checked", entries.len()),
                fragment_relative: relative,
                narrative: lines.join("\n"),
                data: json!({"families": entries}),
            }
        }
        Analysis::EmbedGpt => match build_state_polytope(frag, opts.dim_cap) {
            Err(e @ Error::DimensionCap { .. }) => Outcome::refused(format!("{e} (set GMT_LAB_DIM_CAP to raise the cap)")),
            Err(e) => Outcome::refused(e),
            Ok(poly) => {
                let sep = check_separation(frag, &poly);
                let vertices: Vec<Vec<Value>> = poly.vertices().iter().map(|v| v.iter().map(q).collect()).collect();
                let pairs: Vec<Value> = sep
                    .pairs()
                    .take(LIST_LIMIT)
                    .map(|(a, b)| json!([label(frag, a), label(frag, b)]))
                    .collect();
                let mut data = json!({
                    "ambient_dimension": poly.ambient_dim(),
                    "free_dimension": poly.free_dim(),
                    "vertex_count": vertices.len(),
                    "vertices": vertices,
                    "separated": sep.is_separated(),
                    "unseparated_pairs": sep.pairs().count(),
                    "unseparated_examples": pairs,
                });
                if !sep.is_separated() {
                    let mut o = Outcome::computed(
                        "unseparated",
                        format!(
                            "{} vertices; {} pairs of measurements agree on every state, so no embedding",
                            poly.vertices().len(),
                            sep.pairs().count()
                        ),
                        data,
                    );
                    o.fragment_relative = true;
                    o
                } else {
                    match embed(frag, &poly) {
                        Ok(emb) => {
                            let tables: Vec<Value> = listed(built)
                                .iter()
                                .map(|&id| {
                                    let values: Vec<Vec<Value>> = emb
                                        .values(&poly, id)
                                        .iter()
                                        .map(|row| row.iter().map(q).collect())
                                        .collect();
                                    json!({"measurement": label(frag, id), "effects_at_vertices": values})
                                })
                                .collect();
                            data["embedding"] = json!({"identities_checked": emb.checks, "effects": tables});
                            Outcome::computed(
                                "embedded",
                                format!(
                                    "{} vertices; effect tuples satisfy normalization and pushforward on all of them ({} identities)",
                                    poly.vertices().len(),
                                    emb.checks
                                ),
                                data,
                            )
                            .relative(true)
                        }
                        Err(e) => Outcome::refused(e),
                    }
                }
            }
        },
        Analysis::Reconstruct => match reconstruct(frag) {
            Ok(r) => {
                let ev: Vec<Value> = listed(built)
                    .iter()
                    .map(|&id| json!({"measurement": label(frag, id), "ev": r.ev[id]}))
                    .collect();
                Outcome::computed(
                    if r.is_classical() { "classical" } else { "not classical" },
                    format!(
                        "|W| = {}; evaluation is bijective for outcome sets of size {:?}",
                        r.states.len(),
                        (0..r.bijective.len()).filter(|&n| r.bijective[n]).collect::<Vec<_>>()
                    ),
                    json!({"w": r.states.len(), "bijective": r.bijective, "ev": ev, "naturality_checks": r.naturality_checks}),
                )
                .relative(true)
            }
            Err(e) => Outcome::refused(e),
        },
        Analysis::Reachable => {
            let mut entries = Vec::new();
            let mut lines = Vec::new();
            for (i, query) in doc.queries.reachable.iter().enumerate() {
                let id = |m, field: &str| -> Result<usize, SchemaError> {
                    let path = format!("queries.reachable[{i}].{field}");
                    let meas = doc.measurement(&built.family, m, &path)?;
                    frag.id_of(&meas).map_err(|e| SchemaError {
                        path,
                        line: None,
                        column: None,
                        message: e.to_string(),
                    })
                };
                let (a, b) = (id(&query.from, "from")?, id(&query.to, "to")?);
                let f = reachable(frag, a, b);
                lines.push(match &f {
                    Some(f) => format!("{} reaches {} via {f}", label(frag, a), label(frag, b)),
                    None => format!("{} does not reach {}", label(frag, a), label(frag, b)),
                });
                entries.push(json!({"from": label(frag, a), "to": label(frag, b), "map": f.map(|f| f.table().to_vec())}));
            }
            Outcome::computed(format!("{} queries", entries.len()), lines.join("\n"), json!({"queries": entries}))
        }
    })
}
