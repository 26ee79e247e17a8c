//! Applying a synthesized analysis to traces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical_json;
use crate::lattice::{Element, Poset, QualifierOrder};
use crate::trace::{serialize_corpus, Corpus, Edge, Mode, NodeId, Polarity, Trace};

/// SHA-256 of the canonical corpus serialization, hex encoded.
pub fn corpus_digest(corpus: &Corpus) -> String {
    hex::encode(Sha256::digest(serialize_corpus(corpus).as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub choice: String,
    pub max_exact_candidates: usize,
    pub iterations: usize,
}

/// A constraint path the cut was required to hit, kept so rejections can
/// be traced back to the examples that caused them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    /// Negative trace id, or `refined-k` for the k-th separation witness.
    pub id: String,
    pub pair: (NodeId, NodeId),
    pub path: Vec<NodeId>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecMetadata {
    pub corpus_sha256: String,
    pub optimal: bool,
    pub semantics: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverMetadata>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintRecord>,
}

/// A synthesized analysis: an order over qualifiers (or effects), the node
/// assignment, and the cut that justified it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisSpec {
    pub mode: Mode,
    pub lattice: QualifierOrder,
    pub cut: BTreeSet<Edge>,
    /// Element index used for nodes missing from the assignment.
    pub default_element: usize,
    pub metadata: SpecMetadata,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    mode: Mode,
    elements: Vec<Element>,
    leq: Vec<(String, String)>,
    assignment: BTreeMap<NodeId, String>,
    cut: Vec<Edge>,
    default_element: String,
    metadata: SpecMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid analysis: {0}")]
    Invalid(String),
}

impl AnalysisSpec {
    pub fn element_name(&self, index: usize) -> &str {
        &self.lattice.elements()[index].name
    }

    /// Element index of a node, falling back to the default element.
    pub fn element_index(&self, node: &NodeId) -> usize {
        self.lattice
            .assignment()
            .get(node)
            .copied()
            .unwrap_or(self.default_element)
    }

    pub fn to_json(&self) -> String {
        let names = |i: usize| self.element_name(i).to_string();
        let file = SpecFile {
            mode: self.mode,
            elements: self.lattice.elements().to_vec(),
            leq: self
                .lattice
                .poset()
                .covers()
                .into_iter()
                .map(|(a, b)| (names(a), names(b)))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
            assignment: self
                .lattice
                .assignment()
                .iter()
                .map(|(n, &i)| (n.clone(), names(i)))
                .collect(),
            cut: self.cut.iter().cloned().collect(),
            default_element: names(self.default_element),
            metadata: self.metadata.clone(),
        };
        canonical_json(&file)
    }

    /// Loads an analysis, re-deriving the order from its `leq` pairs and
    /// rejecting anything that is not a partial order (or, in effect mode,
    /// not a join semilattice).
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| SpecError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let invalid = |msg: String| SpecError::Invalid(msg);

        let mut by_name: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, e) in file.elements.iter().enumerate() {
            if by_name.insert(&e.name, i).is_some() {
                return Err(invalid(format!("duplicate element {}", e.name)));
            }
        }
        let lookup = |name: &str| {
            by_name
                .get(name)
                .copied()
                .ok_or_else(|| invalid(format!("unknown element {name}")))
        };

        let pairs = file
            .leq
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>, SpecError>>()?;
        let poset = Poset::from_pairs(file.elements.len(), pairs).map_err(|(a, b)| {
            invalid(format!(
                "leq is not antisymmetric: {} and {} are mutually related",
                file.elements[a].name, file.elements[b].name
            ))
        })?;

        let mut assignment = BTreeMap::new();
        for (node, name) in &file.assignment {
            assignment.insert(node.clone(), lookup(name)?);
        }
        let mut owner: BTreeMap<&NodeId, &str> = BTreeMap::new();
        for e in file.elements.iter().filter(|e| !e.synthetic) {
            if e.members.is_empty() {
                return Err(invalid(format!("element {} has no members", e.name)));
            }
            for m in &e.members {
                if let Some(other) = owner.insert(m, &e.name) {
                    return Err(invalid(format!("node {m} belongs to both {other} and {}", e.name)));
                }
                if file.assignment.get(m) != Some(&e.name) {
                    return Err(invalid(format!("member {m} of {} is assigned elsewhere", e.name)));
                }
            }
        }
        let default_element = lookup(&file.default_element)?;

        if file.mode == Mode::Effect {
            check_joins(&poset, &file.elements)?;
        }

        let elements = file.elements.clone();
        Ok(AnalysisSpec {
            mode: file.mode,
            lattice: QualifierOrder::new(elements, poset, assignment),
            cut: file.cut.into_iter().collect(),
            default_element,
            metadata: file.metadata,
        })
    }
}

fn check_joins(poset: &Poset, elements: &[Element]) -> Result<(), SpecError> {
    let n = poset.len();
    for a in 0..n {
        for b in a + 1..n {
            let upper: Vec<usize> = (0..n).filter(|&c| poset.leq(a, c) && poset.leq(b, c)).collect();
            let least = upper
                .iter()
                .copied()
                .find(|&c| upper.iter().all(|&d| poset.leq(c, d)));
            if least.is_none() {
                return Err(SpecError::Invalid(format!(
                    "{} and {} have no least upper bound",
                    elements[a].name, elements[b].name
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    /// The first edge, in path order, whose flow the analysis forbids.
    Reject { index: usize, edge: Edge },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Accepts iff every consecutive edge `(u, v)` has `element(u) <= element(v)`.
pub fn check_trace(spec: &AnalysisSpec, trace: &Trace) -> Verdict {
    for (index, w) in trace.nodes.windows(2).enumerate() {
        let (u, v) = (spec.element_index(&w[0]), spec.element_index(&w[1]));
        if !spec.lattice.leq(u, v) {
            return Verdict::Reject {
                index,
                edge: Edge::new(w[0].clone(), w[1].clone()),
            };
        }
    }
    Verdict::Accept
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViolationRecord {
    pub index: usize,
    pub edge: Edge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceVerdict {
    pub id: String,
    pub polarity: Polarity,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<ViolationRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub negatives_rejected: usize,
    pub negatives_accepted: usize,
    pub positives_accepted: usize,
    pub positives_rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub corpus_sha256: String,
    /// Whether the checked corpus is the one the analysis was built from.
    pub corpus_matches_analysis: bool,
    pub counts: Counts,
    pub traces: Vec<TraceVerdict>,
}

impl CheckReport {
    /// Negative traces the analysis failed to reject.
    pub fn misses(&self) -> usize {
        self.counts.negatives_accepted
    }

    /// Positive traces the analysis rejected.
    pub fn false_alarms(&self) -> usize {
        self.counts.positives_rejected
    }

    pub fn is_clean(&self) -> bool {
        self.misses() == 0 && self.false_alarms() == 0
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }
}

pub fn check_corpus(spec: &AnalysisSpec, corpus: &Corpus) -> CheckReport {
    let mut counts = Counts::default();
    let traces = corpus
        .traces
        .iter()
        .map(|trace| {
            let verdict = check_trace(spec, trace);
            let accepted = verdict.is_accept();
            match (trace.polarity, accepted) {
                (Polarity::Negative, false) => counts.negatives_rejected += 1,
                (Polarity::Negative, true) => counts.negatives_accepted += 1,
                (Polarity::Positive, true) => counts.positives_accepted += 1,
                (Polarity::Positive, false) => counts.positives_rejected += 1,
            }
            TraceVerdict {
                id: trace.id.clone(),
                polarity: trace.polarity,
                verdict: if accepted { "accept" } else { "reject" },
                violation: match verdict {
                    Verdict::Accept => None,
                    Verdict::Reject { index, edge } => Some(ViolationRecord { index, edge }),
                },
            }
        })
        .collect();
    let digest = corpus_digest(corpus);
    CheckReport {
        corpus_matches_analysis: digest == spec.metadata.corpus_sha256,
        corpus_sha256: digest,
        counts,
        traces,
    }
}

/// A cut edge that, if restored, would let the rejected flow through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cause {
    pub cut_edge: Edge,
    /// Constraint paths through this edge (trace ids or `refined-k`).
    pub constraints: Vec<String>,
    pub pairs: Vec<(NodeId, NodeId)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub trace_id: String,
    pub index: usize,
    pub edge: Edge,
    pub from_element: String,
    pub to_element: String,
    pub causes: Vec<Cause>,
}

impl Explanation {
    pub fn relation(&self) -> String {
        format!("{} not leq {}", self.from_element, self.to_element)
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "trace {} rejected at edge {}: {}",
            self.trace_id, self.index, self.edge
        )?;
        writeln!(f, "  {}", self.relation())?;
        if self.causes.is_empty() {
            writeln!(f, "  no recorded cut edge separates these elements")?;
        }
        for cause in &self.causes {
            write!(f, "  separated by cut edge {}", cause.cut_edge)?;
            if !cause.constraints.is_empty() {
                write!(f, " (forced by {})", cause.constraints.join(", "))?;
            }
            writeln!(f)?;
            for (s, t) in &cause.pairs {
                writeln!(f, "    negative flow {s} -> {t}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("trace {0} is accepted; nothing to explain")]
    NotRejected(String),
}

/// Explains why a trace is rejected: the violating edge, its two elements,
/// and every cut edge `(p, q)` with `element(u) <= element(p)` and
/// `element(q) <= element(v)`, together with the constraint paths that
/// forced it.
pub fn explain_rejection(spec: &AnalysisSpec, trace: &Trace) -> Result<Explanation, ExplainError> {
    let Verdict::Reject { index, edge } = check_trace(spec, trace) else {
        return Err(ExplainError::NotRejected(trace.id.clone()));
    };
    let (u, v) = (spec.element_index(&edge.src), spec.element_index(&edge.dst));
    let causes = spec
        .cut
        .iter()
        .filter(|cut| {
            let (p, q) = (spec.element_index(&cut.src), spec.element_index(&cut.dst));
            spec.lattice.leq(u, p) && spec.lattice.leq(q, v)
        })
        .map(|cut| {
            let records: Vec<&ConstraintRecord> = spec
                .metadata
                .constraints
                .iter()
                .filter(|c| c.edges.contains(cut))
                .collect();
            let pairs: BTreeSet<(NodeId, NodeId)> = records.iter().map(|c| c.pair.clone()).collect();
            Cause {
                cut_edge: cut.clone(),
                constraints: records.iter().map(|c| c.id.clone()).collect(),
                pairs: pairs.into_iter().collect(),
            }
        })
        .collect();
    Ok(Explanation {
        trace_id: trace.id.clone(),
        index,
        edge,
        from_element: spec.element_name(u).to_string(),
        to_element: spec.element_name(v).to_string(),
        causes,
    })
}
