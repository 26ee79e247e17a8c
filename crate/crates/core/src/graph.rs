//! The union flow graph and the graph primitives built on it.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::trace::{has_errors, validate_corpus, Corpus, Diagnostic, Edge, NodeId, Polarity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("corpus has {} error diagnostic(s); fix them before building the graph", .0.iter().filter(|d| d.severity == crate::trace::Severity::Error).count())]
    Construction(Vec<Diagnostic>),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("input relation has a cycle through {0}")]
pub struct CycleError(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEdge {
    pub edge: Edge,
    /// Ids of the traces that contain this edge.
    pub witnesses: BTreeSet<String>,
    /// Number of distinct positive traces containing this edge.
    pub positive_support: u32,
    pub protected: bool,
}

impl FlowEdge {
    /// Whether a cut may contain this edge.
    pub fn is_candidate(&self) -> bool {
        !self.protected && !self.edge.is_self_loop()
    }
}

/// A negative trace as recorded in the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativePath {
    pub trace_id: String,
    pub pair: (NodeId, NodeId),
    pub nodes: Vec<NodeId>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowGraph {
    nodes: BTreeSet<NodeId>,
    edges: BTreeMap<Edge, FlowEdge>,
    successors: BTreeMap<NodeId, BTreeSet<NodeId>>,
    negative_pairs: BTreeSet<(NodeId, NodeId)>,
    negative_paths: Vec<NegativePath>,
}

/// Builds the flow graph of a corpus that has no error diagnostics.
pub fn build_graph(corpus: &Corpus) -> Result<FlowGraph, GraphError> {
    let diagnostics = validate_corpus(corpus);
    if has_errors(&diagnostics) {
        return Err(GraphError::Construction(diagnostics));
    }
    Ok(build_graph_unchecked(corpus))
}

/// Builds the flow graph without running corpus validation. Infeasible
/// corpora then surface as solver conflicts instead of construction errors.
pub fn build_graph_unchecked(corpus: &Corpus) -> FlowGraph {
    let mut nodes = BTreeSet::new();
    let mut edges: BTreeMap<Edge, FlowEdge> = BTreeMap::new();
    let mut negative_paths = Vec::new();

    for trace in &corpus.traces {
        nodes.extend(trace.nodes.iter().cloned());
        let trace_edges = trace.edges();
        let distinct: BTreeSet<&Edge> = trace_edges.iter().collect();
        for edge in distinct {
            let entry = edges.entry(edge.clone()).or_insert_with(|| FlowEdge {
                edge: edge.clone(),
                witnesses: BTreeSet::new(),
                positive_support: 0,
                protected: false,
            });
            entry.witnesses.insert(trace.id.clone());
            if trace.polarity == Polarity::Positive {
                entry.positive_support += 1;
            }
        }
        if trace.polarity == Polarity::Negative {
            negative_paths.push(NegativePath {
                trace_id: trace.id.clone(),
                pair: (trace.source().clone(), trace.sink().clone()),
                nodes: trace.nodes.clone(),
                edges: trace_edges,
            });
        }
    }

    for edge in &corpus.required_edges {
        nodes.insert(edge.src.clone());
        nodes.insert(edge.dst.clone());
        edges.entry(edge.clone()).or_insert_with(|| FlowEdge {
            edge: edge.clone(),
            witnesses: BTreeSet::new(),
            positive_support: 0,
            protected: false,
        });
    }

    let threshold = corpus.min_positive_support.max(1);
    for (edge, flow) in edges.iter_mut() {
        flow.protected =
            flow.positive_support >= threshold || corpus.required_edges.contains(edge);
    }

    let mut successors: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for edge in edges.keys() {
        successors
            .entry(edge.src.clone())
            .or_default()
            .insert(edge.dst.clone());
    }

    negative_paths.sort_by(|a, b| a.trace_id.cmp(&b.trace_id));
    let negative_pairs = negative_paths.iter().map(|p| p.pair.clone()).collect();

    FlowGraph {
        nodes,
        edges,
        successors,
        negative_pairs,
        negative_paths,
    }
}

impl FlowGraph {
    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = &FlowEdge> {
        self.edges.values()
    }

    pub fn edge(&self, edge: &Edge) -> Option<&FlowEdge> {
        self.edges.get(edge)
    }

    pub fn contains_node(&self, node: &NodeId) -> bool {
        self.nodes.contains(node)
    }

    pub fn is_protected(&self, edge: &Edge) -> bool {
        self.edges.get(edge).is_some_and(|e| e.protected)
    }

    /// Edges a cut may contain: unprotected and not self-loops.
    pub fn candidate_edges(&self) -> BTreeSet<Edge> {
        self.edges
            .values()
            .filter(|e| e.is_candidate())
            .map(|e| e.edge.clone())
            .collect()
    }

    pub fn protected_edges(&self) -> BTreeSet<Edge> {
        self.edges
            .values()
            .filter(|e| e.protected)
            .map(|e| e.edge.clone())
            .collect()
    }

    /// `(source, sink)` endpoint pairs of all negative traces.
    pub fn negative_pairs(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.negative_pairs
    }

    /// Negative traces, sorted by trace id.
    pub fn negative_paths(&self) -> &[NegativePath] {
        &self.negative_paths
    }

    /// Successors of `node` in text order.
    pub fn successors<'a>(&'a self, node: &NodeId) -> impl Iterator<Item = &'a NodeId> + 'a {
        self.successors.get(node).into_iter().flatten()
    }

    /// Nodes reachable from `start` without using any edge in `excluded`.
    /// Always contains `start`.
    pub fn reachable(
        &self,
        start: &NodeId,
        excluded: &BTreeSet<Edge>,
    ) -> Result<BTreeSet<NodeId>, GraphError> {
        if !self.contains_node(start) {
            return Err(GraphError::UnknownNode(start.clone()));
        }
        let mut seen = BTreeSet::new();
        seen.insert(start.clone());
        let mut stack = vec![start.clone()];
        while let Some(node) = stack.pop() {
            for next in self.successors(&node) {
                if seen.contains(next) || excluded.contains(&Edge::new(node.clone(), next.clone())) {
                    continue;
                }
                seen.insert(next.clone());
                stack.push(next.clone());
            }
        }
        Ok(seen)
    }

    /// Breadth-first shortest path from `from` to `to` avoiding `excluded`,
    /// visiting successors in text order so that the result is unique.
    pub fn shortest_path(
        &self,
        from: &NodeId,
        to: &NodeId,
        excluded: &BTreeSet<Edge>,
    ) -> Option<Vec<NodeId>> {
        if !self.contains_node(from) || !self.contains_node(to) {
            return None;
        }
        let mut parent: BTreeMap<NodeId, Option<NodeId>> = BTreeMap::new();
        parent.insert(from.clone(), None);
        let mut queue = VecDeque::from([from.clone()]);
        while let Some(node) = queue.pop_front() {
            if &node == to {
                let mut path = vec![node.clone()];
                let mut cursor = node;
                while let Some(Some(prev)) = parent.get(&cursor) {
                    path.push(prev.clone());
                    cursor = prev.clone();
                }
                path.reverse();
                return Some(path);
            }
            for next in self.successors(&node) {
                if parent.contains_key(next)
                    || excluded.contains(&Edge::new(node.clone(), next.clone()))
                {
                    continue;
                }
                parent.insert(next.clone(), Some(node.clone()));
                queue.push_back(next.clone());
            }
        }
        None
    }

    /// Condenses the graph with the `removed` edges taken out.
    pub fn condense_retained(&self, removed: &BTreeSet<Edge>) -> Condensation<NodeId> {
        scc_condense(
            self.nodes.iter().cloned(),
            self.edges
                .keys()
                .filter(|e| !removed.contains(*e))
                .map(|e| (e.src.clone(), e.dst.clone())),
        )
    }
}

/// Strongly connected components of a graph plus the acyclic quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation<T: Ord> {
    /// Components with sorted members, ordered by their smallest member.
    pub components: Vec<Vec<T>>,
    pub component_of: BTreeMap<T, usize>,
    /// Edges between distinct components.
    pub quotient: BTreeSet<(usize, usize)>,
}

/// Tarjan's algorithm, iterative. Edge endpoints not listed in `nodes` are
/// added as nodes.
pub fn scc_condense<T: Ord + Clone>(
    nodes: impl IntoIterator<Item = T>,
    edges: impl IntoIterator<Item = (T, T)>,
) -> Condensation<T> {
    let edges: Vec<(T, T)> = edges.into_iter().collect();
    let mut universe: BTreeSet<T> = nodes.into_iter().collect();
    for (a, b) in &edges {
        universe.insert(a.clone());
        universe.insert(b.clone());
    }
    let names: Vec<T> = universe.into_iter().collect();
    let index_of = |t: &T| names.binary_search(t).expect("node present");

    let n = names.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in &edges {
        adj[index_of(a)].push(index_of(b));
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut raw_components: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (node, next child position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    raw_components.push(component);
                }
            }
        }
    }

    raw_components.sort_by_key(|c| c[0]);
    let mut comp_of_index = vec![0usize; n];
    for (ci, comp) in raw_components.iter().enumerate() {
        for &v in comp {
            comp_of_index[v] = ci;
        }
    }
    let mut quotient = BTreeSet::new();
    for (v, succs) in adj.iter().enumerate() {
        for &w in succs {
            let (cv, cw) = (comp_of_index[v], comp_of_index[w]);
            if cv != cw {
                quotient.insert((cv, cw));
            }
        }
    }

    let components: Vec<Vec<T>> = raw_components
        .iter()
        .map(|c| c.iter().map(|&v| names[v].clone()).collect())
        .collect();
    let component_of = names
        .iter()
        .enumerate()
        .map(|(v, name)| (name.clone(), comp_of_index[v]))
        .collect();

    Condensation {
        components,
        component_of,
        quotient,
    }
}

/// Reachability closure (reflexive) of a DAG given as adjacency lists over
/// `0..n`, or the node on a cycle when the input is cyclic.
pub(crate) fn dag_closure(n: usize, adj: &[Vec<usize>]) -> Result<Vec<FixedBitSet>, usize> {
    let mut indegree = vec![0usize; n];
    for succs in adj {
        for &w in succs {
            indegree[w] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        topo.push(v);
        for &w in &adj[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if topo.len() < n {
        let stuck = (0..n).find(|&v| indegree[v] > 0).expect("cycle node");
        return Err(stuck);
    }
    let mut reach = vec![FixedBitSet::with_capacity(n); n];
    for &v in topo.iter().rev() {
        let mut row = FixedBitSet::with_capacity(n);
        row.insert(v);
        for &w in &adj[v] {
            row.union_with(&reach[w]);
        }
        reach[v] = row;
    }
    Ok(reach)
}

/// Transitive reduction of an acyclic relation: the covering pairs.
pub fn hasse_reduce<T: Ord + Clone + std::fmt::Debug>(
    edges: &BTreeSet<(T, T)>,
) -> Result<BTreeSet<(T, T)>, CycleError> {
    let names: Vec<T> = edges
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index_of = |t: &T| names.binary_search(t).expect("node present");
    let n = names.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in edges {
        let (ia, ib) = (index_of(a), index_of(b));
        if ia == ib {
            return Err(CycleError(format!("{a:?}")));
        }
        adj[ia].push(ib);
    }
    let reach = dag_closure(n, &adj).map_err(|v| CycleError(format!("{:?}", names[v])))?;

    let mut covers = BTreeSet::new();
    for (x, succs) in adj.iter().enumerate() {
        let direct: HashSet<usize> = succs.iter().copied().collect();
        for &z in &direct {
            let implied = direct.iter().any(|&y| y != z && reach[y].contains(z));
            if !implied {
                covers.insert((names[x].clone(), names[z].clone()));
            }
        }
    }
    Ok(covers)
}
