//! Traces, corpora and the corpus file format.
//!
//! A trace is an ordered path of program bindings (or code units, for stack
//! traces) together with a polarity: negative traces are flows that must be
//! broken, positive traces are trusted runs whose flows must be kept.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::canonical_json;
use crate::expand::ExpansionInfo;

/// Identifier of a source-level binding or code unit.
///
/// Non-empty and free of whitespace. Ordering is plain text ordering, which
/// every deterministic tie-break in the crate relies on.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(Arc<str>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid node id {0:?}: must be non-empty and contain no whitespace")]
pub struct InvalidNodeId(pub String);

impl NodeId {
    pub fn new(name: impl AsRef<str>) -> Result<Self, InvalidNodeId> {
        let name = name.as_ref();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(InvalidNodeId(name.to_string()));
        }
        Ok(NodeId(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl FromStr for NodeId {
    type Err = InvalidNodeId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeId::new(s)
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        NodeId::new(s).map_err(serde::de::Error::custom)
    }
}

/// A directed flow edge. Ordered by `(src, dst)` text order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
}

impl Edge {
    pub fn new(src: NodeId, dst: NodeId) -> Self {
        Edge { src, dst }
    }

    /// Convenience constructor for tests and fixtures; panics on invalid names.
    pub fn from_names(src: &str, dst: &str) -> Self {
        Edge::new(
            NodeId::new(src).expect("valid node id"),
            NodeId::new(dst).expect("valid node id"),
        )
    }

    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.src, self.dst)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.src, self.dst)
    }
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (&self.src, &self.dst).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (src, dst) = <(NodeId, NodeId)>::deserialize(deserializer)?;
        Ok(Edge { src, dst })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Polarity::Positive),
            "negative" => Ok(Polarity::Negative),
            other => Err(format!("unknown polarity {other:?}")),
        }
    }
}

/// Whether the corpus describes data flows (qualifiers) or call stacks (effects).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Qualifier,
    Effect,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Qualifier => "qualifier",
            Mode::Effect => "effect",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qualifier" => Ok(Mode::Qualifier),
            "effect" => Ok(Mode::Effect),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace {id}: a trace needs at least 2 nodes, got {len}")]
    TooShort { id: String, len: usize },
}

/// One example path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub id: String,
    pub polarity: Polarity,
    pub nodes: Vec<NodeId>,
    /// Where the trace came from when it was not observed directly,
    /// e.g. `static-expansion`.
    pub origin: Option<String>,
}

impl Trace {
    pub fn new(
        id: impl Into<String>,
        polarity: Polarity,
        nodes: Vec<NodeId>,
    ) -> Result<Self, TraceError> {
        let id = id.into();
        if nodes.len() < 2 {
            return Err(TraceError::TooShort { id, len: nodes.len() });
        }
        Ok(Trace { id, polarity, nodes, origin: None })
    }

    /// Builds a trace from plain names; panics on invalid input. Meant for
    /// fixtures and tests.
    pub fn from_names(id: &str, polarity: Polarity, names: &[&str]) -> Self {
        let nodes = names
            .iter()
            .map(|n| NodeId::new(n).expect("valid node id"))
            .collect();
        Trace::new(id, polarity, nodes).expect("valid trace")
    }

    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = Some(origin.into());
        self
    }

    pub fn source(&self) -> &NodeId {
        &self.nodes[0]
    }

    pub fn sink(&self) -> &NodeId {
        &self.nodes[self.nodes.len() - 1]
    }

    pub fn edges(&self) -> Vec<Edge> {
        trace_edges(self)
    }
}

/// Consecutive pairs of the node path, in path order.
pub fn trace_edges(trace: &Trace) -> Vec<Edge> {
    trace
        .nodes
        .windows(2)
        .map(|w| Edge::new(w[0].clone(), w[1].clone()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub mode: Mode,
    pub traces: Vec<Trace>,
    pub required_edges: BTreeSet<Edge>,
    pub min_positive_support: u32,
    /// Present when the corpus was produced by static path expansion.
    pub expansion: Option<ExpansionInfo>,
}

impl Default for Corpus {
    fn default() -> Self {
        Corpus {
            mode: Mode::Qualifier,
            traces: Vec::new(),
            required_edges: BTreeSet::new(),
            min_positive_support: 1,
            expansion: None,
        }
    }
}

impl Corpus {
    pub fn new(mode: Mode, traces: Vec<Trace>) -> Self {
        Corpus { mode, traces, ..Corpus::default() }
    }

    pub fn trace(&self, id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.id == id)
    }

    /// Appends traces, rejecting ids that are already present.
    pub fn extend_traces(
        &mut self,
        traces: impl IntoIterator<Item = Trace>,
    ) -> Result<(), CorpusError> {
        for trace in traces {
            if self.trace(&trace.id).is_some() {
                return Err(CorpusError::Validation(format!(
                    "duplicate trace id {}",
                    trace.id
                )));
            }
            self.traces.push(trace);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    traces: Vec<RawTrace>,
    #[serde(default)]
    required_edges: Vec<(String, String)>,
    #[serde(default)]
    options: Option<RawOptions>,
    #[serde(default)]
    expansion: Option<ExpansionInfo>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrace {
    id: String,
    polarity: String,
    nodes: Vec<String>,
    #[serde(default)]
    origin: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    #[serde(default = "default_support")]
    min_positive_support: i64,
}

fn default_support() -> i64 {
    1
}

/// Parses a corpus document and applies defaults.
pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let raw: RawCorpus = serde_json::from_str(text).map_err(|e| CorpusError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mode = match raw.mode.as_deref() {
        None => Mode::Qualifier,
        Some(m) => m.parse().map_err(CorpusError::Validation)?,
    };

    let min_positive_support = match raw.options {
        None => 1,
        Some(o) => u32::try_from(o.min_positive_support)
            .ok()
            .filter(|&s| s >= 1)
            .ok_or_else(|| {
                CorpusError::Validation(format!(
                    "min_positive_support must be an integer >= 1, got {}",
                    o.min_positive_support
                ))
            })?,
    };

    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut traces = Vec::with_capacity(raw.traces.len());
    for (index, rt) in raw.traces.into_iter().enumerate() {
        if seen.insert(rt.id.clone(), index).is_some() {
            return Err(CorpusError::Validation(format!("duplicate trace id {}", rt.id)));
        }
        let polarity: Polarity = rt
            .polarity
            .parse()
            .map_err(|e| CorpusError::Validation(format!("trace {}: {e}", rt.id)))?;
        let nodes = rt
            .nodes
            .iter()
            .map(NodeId::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CorpusError::Validation(format!("trace {}: {e}", rt.id)))?;
        let mut trace = Trace::new(rt.id, polarity, nodes)
            .map_err(|e| CorpusError::Validation(e.to_string()))?;
        trace.origin = rt.origin;
        traces.push(trace);
    }

    let required_edges = raw
        .required_edges
        .iter()
        .map(|(s, d)| Ok(Edge::new(NodeId::new(s)?, NodeId::new(d)?)))
        .collect::<Result<BTreeSet<_>, InvalidNodeId>>()
        .map_err(|e| CorpusError::Validation(format!("required_edges: {e}")))?;

    Ok(Corpus {
        mode,
        traces,
        required_edges,
        min_positive_support,
        expansion: raw.expansion,
    })
}

#[derive(Serialize)]
struct CanonicalCorpus<'a> {
    mode: Mode,
    options: CanonicalOptions,
    required_edges: &'a BTreeSet<Edge>,
    traces: Vec<CanonicalTrace<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expansion: Option<&'a ExpansionInfo>,
}

#[derive(Serialize)]
struct CanonicalOptions {
    min_positive_support: u32,
}

#[derive(Serialize)]
struct CanonicalTrace<'a> {
    id: &'a str,
    polarity: Polarity,
    nodes: &'a [NodeId],
    #[serde(skip_serializing_if = "Option::is_none")]
    origin: Option<&'a str>,
}

/// Canonical serialization: key-sorted, pretty-printed, newline-terminated.
/// Trace order is preserved.
pub fn serialize_corpus(corpus: &Corpus) -> String {
    let canonical = CanonicalCorpus {
        mode: corpus.mode,
        options: CanonicalOptions {
            min_positive_support: corpus.min_positive_support,
        },
        required_edges: &corpus.required_edges,
        traces: corpus
            .traces
            .iter()
            .map(|t| CanonicalTrace {
                id: &t.id,
                polarity: t.polarity,
                nodes: &t.nodes,
                origin: t.origin.as_deref(),
            })
            .collect(),
        expansion: corpus.expansion.as_ref(),
    };
    canonical_json(&canonical)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    /// A negative trace starts and ends at the same node; reflexivity makes
    /// it impossible to forbid.
    NegativeEndpointsEqual,
    SelfLoop,
    /// A negative trace repeats the exact path of a positive one.
    PolarityConflict,
    RequiredOnlyNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
    pub trace_ids: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{level}: {}", self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

/// Reports every problem with a parsed corpus. Output order is fixed:
/// per-trace findings in corpus order, then polarity conflicts, then nodes
/// known only from `required_edges`.
pub fn validate_corpus(corpus: &Corpus) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    for trace in &corpus.traces {
        if trace.polarity == Polarity::Negative && trace.source() == trace.sink() {
            out.push(Diagnostic {
                severity: Severity::Error,
                kind: DiagnosticKind::NegativeEndpointsEqual,
                message: format!(
                    "negative endpoints equal: {} (trace {})",
                    trace.source(),
                    trace.id
                ),
                trace_ids: vec![trace.id.clone()],
            });
        }
        for edge in trace.edges().iter().filter(|e| e.is_self_loop()) {
            out.push(Diagnostic {
                severity: Severity::Warning,
                kind: DiagnosticKind::SelfLoop,
                message: format!(
                    "self-loop {edge} in trace {} imposes no constraint",
                    trace.id
                ),
                trace_ids: vec![trace.id.clone()],
            });
        }
    }
    for edge in corpus.required_edges.iter().filter(|e| e.is_self_loop()) {
        out.push(Diagnostic {
            severity: Severity::Warning,
            kind: DiagnosticKind::SelfLoop,
            message: format!("required self-loop {edge} imposes no constraint"),
            trace_ids: Vec::new(),
        });
    }

    let mut positives: BTreeMap<&[NodeId], Vec<&str>> = BTreeMap::new();
    for trace in corpus.traces.iter().filter(|t| t.polarity == Polarity::Positive) {
        positives.entry(&trace.nodes).or_default().push(&trace.id);
    }
    for trace in corpus.traces.iter().filter(|t| t.polarity == Polarity::Negative) {
        if let Some(pos_ids) = positives.get(trace.nodes.as_slice()) {
            for pos in pos_ids {
                out.push(Diagnostic {
                    severity: Severity::Error,
                    kind: DiagnosticKind::PolarityConflict,
                    message: format!(
                        "negative trace {} duplicates positive trace {pos}: the same path cannot be both kept and broken",
                        trace.id
                    ),
                    trace_ids: vec![trace.id.clone(), pos.to_string()],
                });
            }
        }
    }

    let in_traces: BTreeSet<&NodeId> = corpus.traces.iter().flat_map(|t| &t.nodes).collect();
    let required_only: BTreeSet<&NodeId> = corpus
        .required_edges
        .iter()
        .flat_map(|e| [&e.src, &e.dst])
        .filter(|n| !in_traces.contains(n))
        .collect();
    for node in required_only {
        out.push(Diagnostic {
            severity: Severity::Warning,
            kind: DiagnosticKind::RequiredOnlyNode,
            message: format!("node {node} appears only in required_edges"),
            trace_ids: Vec::new(),
        });
    }

    out
}
