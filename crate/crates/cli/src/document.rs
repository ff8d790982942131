//! Fragment documents: JSON descriptions of a family, a bound, how to build
//! the fragment, and which analyses to run.
//!
//! Rationals are strings (`"1/2"`), never JSON numbers. Payloads are read
//! according to the family kind; see `schema/fragment-document.schema.json`.

use std::fmt;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use gmtlab::family::{
    Boolean, Classical, Delta, EffectAlgebra, EffectAlgebraFamily, ProbMeas, Presented, RandomFunctions, Relation,
    UnknownFunctions, Weird,
};
use gmtlab::finset::FinFun;
use gmtlab::fragment::Measurement;
use gmtlab::{rational, FamilyRef, Fragment, Payload};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    #[serde(default)]
    pub name: Option<String>,
    pub family: FamilySpec,
    pub bound: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub generators: Vec<MeasurementSpec>,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub queries: Queries,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every measurement of the family within the bound.
    #[default]
    Full,
    /// The closure of the listed generators.
    Generated,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Classical {
        states: usize,
    },
    Boolean {
        atoms: usize,
    },
    EffectAlgebra {
        labels: Vec<String>,
        zero: String,
        one: String,
        /// Triples `[a, b, c]` meaning `a ⊕ b = c`, each unordered pair once.
        sums: Vec<[String; 3]>,
    },
    Delta,
    ProbMeas {
        states: usize,
    },
    RandomFunctions {
        states: usize,
    },
    UnknownFunctions {
        states: usize,
    },
    Weird,
    Presented {
        generators: Vec<GeneratorDecl>,
        #[serde(default)]
        relations: Vec<RelationSpec>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDecl {
    pub name: String,
    pub arity: usize,
}

/// `left_map_*(left) = right_map_*(right)`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub left: String,
    pub left_map: Vec<usize>,
    pub right: String,
    pub right_map: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSpec {
    pub arity: usize,
    pub payload: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Validate,
    DetStates,
    ProbStates,
    PossStates,
    Binarizable,
    Compatible,
    WeakClassical,
    StrongClassical,
    Projective,
    EmbedGpt,
    Reconstruct,
    Reachable,
}

impl Analysis {
    pub const ALL: [Analysis; 12] = [
        Analysis::Validate,
        Analysis::DetStates,
        Analysis::ProbStates,
        Analysis::PossStates,
        Analysis::Binarizable,
        Analysis::Compatible,
        Analysis::WeakClassical,
        Analysis::StrongClassical,
        Analysis::Projective,
        Analysis::EmbedGpt,
        Analysis::Reconstruct,
        Analysis::Reachable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Validate => "validate",
            Analysis::DetStates => "det-states",
            Analysis::ProbStates => "prob-states",
            Analysis::PossStates => "poss-states",
            Analysis::Binarizable => "binarizable",
            Analysis::Compatible => "compatible",
            Analysis::WeakClassical => "weak-classical",
            Analysis::StrongClassical => "strong-classical",
            Analysis::Projective => "projective",
            Analysis::EmbedGpt => "embed-gpt",
            Analysis::Reconstruct => "reconstruct",
            Analysis::Reachable => "reachable",
        }
    }

    pub fn parse(name: &str) -> Option<Analysis> {
        Analysis::ALL.into_iter().find(|a| a.name() == name)
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Queries {
    /// Families of measurements to test for weak and strong compatibility.
    #[serde(default)]
    pub compatible: Vec<Vec<MeasurementSpec>>,
    #[serde(default)]
    pub reachable: Vec<ReachQuery>,
    /// Largest family size for the weak classicality sweep.
    #[serde(default)]
    pub weak_arity: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachQuery {
    pub from: MeasurementSpec,
    pub to: MeasurementSpec,
}

/// A document that cannot be read, with the offending field and position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}, at `{}`: {}", self.path, self.message),
            _ => write!(f, "at `{}`: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for SchemaError {}

fn field_error(path: impl Into<String>, message: impl fmt::Display) -> SchemaError {
    SchemaError {
        path: path.into(),
        line: None,
        column: None,
        message: message.to_string(),
    }
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            SchemaError {
                path,
                line: Some(inner.line()),
                column: Some(inner.column()),
                message: inner.to_string(),
            }
        })
    }
}

/// A document turned into library objects.
pub struct Built {
    pub family: FamilyRef,
    pub fragment: Fragment,
    pub generators: Vec<usize>,
}

fn parse_rational(path: &str, v: &Value) -> Result<gmtlab::rational::Rational, SchemaError> {
    let s = v
        .as_str()
        .ok_or_else(|| field_error(path, "rationals are strings such as \"1/2\""))?;
    rational::parse(s).map_err(|e| field_error(path, e))
}

fn from_value<T: serde::de::DeserializeOwned>(path: &str, v: &Value) -> Result<T, SchemaError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let full = if inner == "." { path.to_string() } else { format!("{path}.{inner}") };
        field_error(full, e.into_inner())
    })
}

fn make_family(spec: &FamilySpec, bound: usize) -> Result<FamilyRef, SchemaError> {
    Ok(match spec {
        FamilySpec::Classical { states } => Arc::new(Classical::new(*states)),
        FamilySpec::Boolean { atoms } => Arc::new(Boolean::new(*atoms)),
        FamilySpec::EffectAlgebra { labels, zero, one, sums } => {
            let index = |path: String, l: &str| {
                labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| field_error(path, format!("unknown label `{l}`")))
            };
            let z = index("family.zero".into(), zero)?;
            let o = index("family.one".into(), one)?;
            let triples = sums
                .iter()
                .enumerate()
                .map(|(i, [a, b, c])| {
                    let p = format!("family.sums[{i}]");
                    Ok((index(p.clone(), a)?, index(p.clone(), b)?, index(p, c)?))
                })
                .collect::<Result<Vec<_>, SchemaError>>()?;
            let ea = EffectAlgebra::from_sums(labels.clone(), z, o, &triples).map_err(|e| field_error("family", e))?;
            Arc::new(EffectAlgebraFamily::new(ea))
        }
        FamilySpec::Delta => Arc::new(Delta),
        FamilySpec::ProbMeas { states } => Arc::new(ProbMeas::new(*states)),
        FamilySpec::RandomFunctions { states } => Arc::new(RandomFunctions::new(*states)),
        FamilySpec::UnknownFunctions { states } => Arc::new(UnknownFunctions::new(*states)),
        FamilySpec::Weird => Arc::new(Weird),
        FamilySpec::Presented { generators, relations } => {
            let gens: Vec<(String, usize)> = generators.iter().map(|g| (g.name.clone(), g.arity)).collect();
            let rels = relations
                .iter()
                .enumerate()
                .map(|(i, r)| relation(generators, r, &format!("family.relations[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Arc::new(Presented::new(gens, &rels, bound).map_err(|e| field_error("family", e))?)
        }
    })
}

fn generator_index(generators: &[GeneratorDecl], name: &str, path: &str) -> Result<usize, SchemaError> {
    generators
        .iter()
        .position(|g| g.name == name)
        .ok_or_else(|| field_error(path, format!("unknown generator `{name}`")))
}

fn relation(generators: &[GeneratorDecl], r: &RelationSpec, path: &str) -> Result<Relation, SchemaError> {
    let left = generator_index(generators, &r.left, &format!("{path}.left"))?;
    let right = generator_index(generators, &r.right, &format!("{path}.right"))?;
    let map = |g: usize, table: &[usize], field: &str| {
        let cod = table.iter().max().map_or(0, |m| m + 1);
        FinFun::new(generators[g].arity, cod, table.to_vec()).map_err(|e| field_error(format!("{path}.{field}"), e))
    };
    let mut left_map = map(left, &r.left_map, "left_map")?;
    let mut right_map = map(right, &r.right_map, "right_map")?;
    // Both sides must land in the same outcome set.
    let cod = left_map.cod().size().max(right_map.cod().size());
    left_map = FinFun::new(left_map.dom().size(), cod, left_map.table().to_vec()).expect("widened");
    right_map = FinFun::new(right_map.dom().size(), cod, right_map.table().to_vec()).expect("widened");
    Ok(Relation {
        left,
        left_map,
        right,
        right_map,
    })
}

/// Reads a measurement in the encoding of `spec`'s family.
pub fn payload(spec: &FamilySpec, family: &FamilyRef, m: &MeasurementSpec, path: &str) -> Result<Payload, SchemaError> {
    let p = format!("{path}.payload");
    let v = &m.payload;
    let payload = match spec {
        FamilySpec::Classical { .. } => Payload::Classical(from_value(&p, v)?),
        FamilySpec::Boolean { .. } => Payload::Partition(from_value(&p, v)?),
        FamilySpec::EffectAlgebra { labels, .. } => {
            let names: Vec<String> = from_value(&p, v)?;
            let idx = names
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    labels
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| field_error(format!("{p}[{i}]"), format!("unknown label `{l}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Payload::Effects(idx)
        }
        FamilySpec::Delta => {
            let items: Vec<Value> = from_value(&p, v)?;
            Payload::Distribution(
                items
                    .iter()
                    .enumerate()
                    .map(|(i, x)| parse_rational(&format!("{p}[{i}]"), x))
                    .collect::<Result<_, _>>()?,
            )
        }
        FamilySpec::ProbMeas { .. } => {
            let rows: Vec<Vec<Value>> = from_value(&p, v)?;
            Payload::Kernel(
                rows.iter()
                    .enumerate()
                    .map(|(s, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(i, x)| parse_rational(&format!("{p}[{s}][{i}]"), x))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?,
            )
        }
        FamilySpec::RandomFunctions { .. } => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Term {
                table: Vec<usize>,
                weight: Value,
            }
            let terms: Vec<Term> = from_value(&p, v)?;
            let terms = terms
                .into_iter()
                .enumerate()
                .map(|(i, t)| Ok((t.table, parse_rational(&format!("{p}[{i}].weight"), &t.weight)?)))
                .collect::<Result<Vec<_>, SchemaError>>()?;
            RandomFunctions::normalize(terms)
        }
        FamilySpec::UnknownFunctions { .. } => UnknownFunctions::normalize(from_value(&p, v)?),
        FamilySpec::Weird => {
            let triple: Option<[usize; 3]> = from_value(&p, v)?;
            Payload::Weird(triple.map(|mut t| {
                t.sort_unstable();
                t
            }))
        }
        FamilySpec::Presented { generators, .. } => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Class {
                generator: String,
                map: Vec<usize>,
            }
            let c: Class = from_value(&p, v)?;
            let g = generator_index(generators, &c.generator, &format!("{p}.generator"))?;
            let arity = generators[g].arity;
            if c.map.len() != arity || c.map.iter().any(|&y| y >= m.arity) {
                return Err(field_error(
                    format!("{p}.map"),
                    format!("expected a table from {arity} outcomes into {} outcomes", m.arity),
                ));
            }
            // Generator `g` is number g + 1 internally; 0 is the unit.
            let source = Payload::Presented {
                generator: g + 1,
                map: (0..arity).collect(),
            };
            family
                .pushforward(&c.map, m.arity, &source)
                .map_err(|e| field_error(&p, e))?
        }
    };
    family.check(m.arity, &payload).map_err(|e| field_error(&p, e))?;
    Ok(payload)
}

impl Document {
    /// Effective bound: the override if given, else the document's.
    pub fn bound(&self, bound_override: Option<usize>) -> usize {
        bound_override.unwrap_or(self.bound)
    }

    pub fn measurement(&self, family: &FamilyRef, m: &MeasurementSpec, path: &str) -> Result<Measurement, SchemaError> {
        Ok(Measurement::new(m.arity, payload(&self.family, family, m, path)?))
    }

    pub fn build(&self, bound_override: Option<usize>) -> Result<Built, SchemaError> {
        let bound = self.bound(bound_override);
        let family = make_family(&self.family, bound)?;
        let generators = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| self.measurement(&family, g, &format!("generators[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let fragment = match self.mode {
            Mode::Full => Fragment::full(family.clone(), bound),
            Mode::Generated => Fragment::close(family.clone(), &generators, bound),
        }
        .map_err(|e| field_error(if bound_override.is_some() { "--bound" } else { "bound" }, e))?;
        let generators = generators
            .iter()
            .enumerate()
            .map(|(i, g)| {
                fragment
                    .id_of(g)
                    .map_err(|e| field_error(format!("generators[{i}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Built {
            family,
            fragment,
            generators,
        })
    }
}
