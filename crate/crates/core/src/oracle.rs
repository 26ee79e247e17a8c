//! Brute-force reference implementations for tests.
//!
//! Nothing here shares code with the solvers it checks: graphs are
//! re-indexed into bitmasks and every search is plain enumeration.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::cut::Semantics;
use crate::expand::StaticGraph;
use crate::graph::FlowGraph;
use crate::trace::{Edge, NodeId};

fn reach_mask(adj: &[u64], start: usize) -> u64 {
    let mut seen = 1u64 << start;
    loop {
        let mut next = seen;
        for (v, succ) in adj.iter().enumerate() {
            if seen & (1 << v) != 0 {
                next |= succ;
            }
        }
        if next == seen {
            return seen;
        }
        seen = next;
    }
}

/// Minimum cut by enumerating subsets of the cuttable edges, smallest size
/// first and lexicographically within a size, so the first hit is the
/// lexicographically smallest minimum. `None` when no subset works.
///
/// Panics on graphs with more than 64 nodes.
pub fn brute_force_min_cut(graph: &FlowGraph, semantics: Semantics) -> Option<BTreeSet<Edge>> {
    let nodes: Vec<&NodeId> = graph.nodes().iter().collect();
    assert!(nodes.len() <= 64, "oracle supports at most 64 nodes");
    let idx = |n: &NodeId| nodes.binary_search(&n).expect("known node");

    let mut fixed = vec![0u64; nodes.len()];
    let mut candidates: Vec<(usize, usize, Edge)> = Vec::new();
    for fe in graph.edges() {
        let (s, d) = (idx(&fe.edge.src), idx(&fe.edge.dst));
        if fe.protected || s == d {
            fixed[s] |= 1 << d;
        } else {
            candidates.push((s, d, fe.edge.clone()));
        }
    }
    candidates.sort_by(|a, b| a.2.cmp(&b.2));

    let pairs: Vec<(usize, usize)> = graph
        .negative_pairs()
        .iter()
        .map(|(s, t)| (idx(s), idx(t)))
        .collect();
    let paths: Vec<BTreeSet<usize>> = graph
        .negative_paths()
        .iter()
        .map(|p| {
            candidates
                .iter()
                .enumerate()
                .filter(|(_, c)| p.edges.contains(&c.2))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let works = |chosen: &[usize]| -> bool {
        match semantics {
            Semantics::Path => paths.iter().all(|p| chosen.iter().any(|c| p.contains(c))),
            Semantics::Separation => {
                let mut adj = fixed.clone();
                for (i, (s, d, _)) in candidates.iter().enumerate() {
                    if !chosen.contains(&i) {
                        adj[*s] |= 1 << d;
                    }
                }
                pairs
                    .iter()
                    .all(|&(s, t)| reach_mask(&adj, s) & (1 << t) == 0)
            }
        }
    };

    (0..=candidates.len()).find_map(|k| {
        (0..candidates.len())
            .combinations(k)
            .find(|combo| works(combo))
            .map(|combo| combo.into_iter().map(|i| candidates[i].2.clone()).collect())
    })
}

/// All simple paths from `source` to `sink` with at most `max_len` nodes,
/// in lexicographic order of their node sequences. Enumerates every
/// ordering of every subset of intermediate nodes.
pub fn brute_force_simple_paths(
    graph: &StaticGraph,
    source: &NodeId,
    sink: &NodeId,
    max_len: usize,
) -> Vec<Vec<NodeId>> {
    let others: Vec<&NodeId> = graph
        .nodes
        .iter()
        .filter(|n| *n != source && *n != sink)
        .collect();
    let has_edge = |a: &NodeId, b: &NodeId| graph.edges.contains(&Edge::new(a.clone(), b.clone()));
    let mut out = Vec::new();
    let max_mid = max_len.saturating_sub(2).min(others.len());
    for k in 0..=max_mid {
        for mid in others.iter().copied().permutations(k) {
            let mut path = vec![source.clone()];
            path.extend(mid.into_iter().cloned());
            path.push(sink.clone());
            if path.windows(2).all(|w| has_edge(&w[0], &w[1])) {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

/// Checks reflexivity, antisymmetry and transitivity over all pairs and
/// triples. Returns a description of each failure.
pub fn order_law_violations(n: usize, leq: impl Fn(usize, usize) -> bool) -> Vec<String> {
    let mut out = Vec::new();
    for a in 0..n {
        if !leq(a, a) {
            out.push(format!("not reflexive at {a}"));
        }
        for b in 0..n {
            if a != b && leq(a, b) && leq(b, a) {
                out.push(format!("not antisymmetric at ({a}, {b})"));
            }
            for c in 0..n {
                if leq(a, b) && leq(b, c) && !leq(a, c) {
                    out.push(format!("not transitive at ({a}, {b}, {c})"));
                }
            }
        }
    }
    out
}

/// Checks that `join` is commutative, associative, idempotent, has `bottom`
/// as unit, and is the least upper bound under `leq`.
pub fn join_law_violations(
    n: usize,
    leq: impl Fn(usize, usize) -> bool,
    join: impl Fn(usize, usize) -> usize,
    bottom: usize,
) -> Vec<String> {
    let mut out = Vec::new();
    for a in 0..n {
        if join(a, a) != a {
            out.push(format!("not idempotent at {a}"));
        }
        if join(a, bottom) != a {
            out.push(format!("bottom is not a unit at {a}"));
        }
        for b in 0..n {
            let j = join(a, b);
            if j != join(b, a) {
                out.push(format!("not commutative at ({a}, {b})"));
            }
            if !leq(a, j) || !leq(b, j) {
                out.push(format!("join({a}, {b}) is not an upper bound"));
            }
            for c in 0..n {
                if join(join(a, b), c) != join(a, join(b, c)) {
                    out.push(format!("not associative at ({a}, {b}, {c})"));
                }
                if leq(a, c) && leq(b, c) && !leq(j, c) {
                    out.push(format!("join({a}, {b}) is not least below {c}"));
                }
            }
        }
    }
    out
}
