//! Expansion of developer-chosen endpoints into candidate negative paths
//! over a static call or flow graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{Corpus, Edge, Mode, NodeId, Polarity, Trace};

pub const STATIC_EXPANSION_ORIGIN: &str = "static-expansion";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("edge {0} references a node missing from the node list")]
    DanglingEdge(Edge),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid endpoint spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticGraph {
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<Edge>,
}

impl StaticGraph {
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, ExpandError> {
        let graph = StaticGraph {
            nodes: nodes.into_iter().collect(),
            edges: edges.into_iter().collect(),
        };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<(), ExpandError> {
        match self
            .edges
            .iter()
            .find(|e| !self.nodes.contains(&e.src) || !self.nodes.contains(&e.dst))
        {
            Some(e) => Err(ExpandError::DanglingEdge(e.clone())),
            None => Ok(()),
        }
    }
}

pub fn parse_static_graph(text: &str) -> Result<StaticGraph, ExpandError> {
    let graph: StaticGraph = serde_json::from_str(text).map_err(|e| ExpandError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    graph.validate()?;
    Ok(graph)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointSpec {
    pub source: NodeId,
    pub sink: NodeId,
    /// Maximum path length in nodes.
    pub max_path_len: usize,
    pub max_paths: usize,
}

impl EndpointSpec {
    pub fn new(source: NodeId, sink: NodeId) -> Self {
        EndpointSpec {
            source,
            sink,
            max_path_len: 12,
            max_paths: 1000,
        }
    }

    fn validate(&self) -> Result<(), ExpandError> {
        if self.source == self.sink {
            return Err(ExpandError::InvalidSpec("source and sink must differ".into()));
        }
        if self.max_path_len < 2 {
            return Err(ExpandError::InvalidSpec("max_path_len must be at least 2".into()));
        }
        if self.max_paths < 1 {
            return Err(ExpandError::InvalidSpec("max_paths must be at least 1".into()));
        }
        Ok(())
    }
}

/// Bounds and outcome of an expansion, kept with the expanded corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionInfo {
    pub source: NodeId,
    pub sink: NodeId,
    pub max_path_len: usize,
    pub max_paths: usize,
    pub paths: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub traces: Vec<Trace>,
    /// Set iff more than `max_paths` paths exist within the length bound.
    pub truncated: bool,
}

struct Dfs<'a> {
    succ: BTreeMap<&'a NodeId, Vec<&'a NodeId>>,
    sink: &'a NodeId,
    max_len: usize,
    limit: usize,
    path: Vec<&'a NodeId>,
    on_path: BTreeSet<&'a NodeId>,
    found: Vec<Vec<NodeId>>,
}

impl<'a> Dfs<'a> {
    /// Returns false once `limit` paths have been found.
    fn walk(&mut self, node: &'a NodeId) -> bool {
        self.path.push(node);
        self.on_path.insert(node);
        let mut more = true;
        if node == self.sink {
            self.found.push(self.path.iter().map(|n| (*n).clone()).collect());
            more = self.found.len() < self.limit;
        } else if self.path.len() < self.max_len {
            let next: Vec<&NodeId> = self.succ.get(node).cloned().unwrap_or_default();
            for w in next {
                if !self.on_path.contains(w) && !self.walk(w) {
                    more = false;
                    break;
                }
            }
        }
        self.on_path.remove(node);
        self.path.pop();
        more
    }
}

/// All simple `source -> sink` paths of at most `max_path_len` nodes, in
/// depth-first order with successors sorted, capped at `max_paths`. Each
/// becomes a negative trace `cand-<source>-<sink>-<k>` (k from 1).
pub fn enumerate_candidate_paths(
    graph: &StaticGraph,
    spec: &EndpointSpec,
) -> Result<Expansion, ExpandError> {
    spec.validate()?;
    for endpoint in [&spec.source, &spec.sink] {
        if !graph.nodes.contains(endpoint) {
            return Err(ExpandError::UnknownNode(endpoint.clone()));
        }
    }
    let mut succ: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for e in &graph.edges {
        succ.entry(&e.src).or_default().push(&e.dst);
    }

    // Search for one path past the cap to learn whether we truncated.
    let mut dfs = Dfs {
        succ,
        sink: &spec.sink,
        max_len: spec.max_path_len,
        limit: spec.max_paths.saturating_add(1),
        path: Vec::new(),
        on_path: BTreeSet::new(),
        found: Vec::new(),
    };
    dfs.walk(&spec.source);
    let mut found = dfs.found;
    let truncated = found.len() > spec.max_paths;
    found.truncate(spec.max_paths);

    let traces = found
        .into_iter()
        .enumerate()
        .map(|(k, nodes)| {
            Trace::new(
                format!("cand-{}-{}-{}", spec.source, spec.sink, k + 1),
                Polarity::Negative,
                nodes,
            )
            .expect("paths between distinct nodes have at least 2 nodes")
            .with_origin(STATIC_EXPANSION_ORIGIN)
        })
        .collect();
    Ok(Expansion { traces, truncated })
}

/// Wraps an expansion as a corpus that records the bounds used.
pub fn expansion_corpus(spec: &EndpointSpec, expansion: Expansion) -> Corpus {
    let info = ExpansionInfo {
        source: spec.source.clone(),
        sink: spec.sink.clone(),
        max_path_len: spec.max_path_len,
        max_paths: spec.max_paths,
        paths: expansion.traces.len(),
        truncated: expansion.truncated,
    };
    Corpus {
        expansion: Some(info),
        ..Corpus::new(Mode::Qualifier, expansion.traces)
    }
}
