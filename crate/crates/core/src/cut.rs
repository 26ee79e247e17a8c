//! Minimum cut synthesis.
//!
//! A cut is a set of unprotected flow edges whose removal breaks every
//! negative flow. Under path semantics each observed negative path must be
//! hit. Under separation semantics (the default) the sink of every negative
//! trace must become unreachable from its source: the solver first hits the
//! observed paths, then repeatedly adds the shortest surviving source-to-sink
//! path as a new constraint and re-solves until every pair is separated.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::FlowGraph;
use crate::hitting::{min_hitting_set_exact, min_hitting_set_greedy, HittingSetError};
use crate::trace::{Edge, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Semantics {
    /// Hit every observed negative path.
    Path,
    /// Make every negative sink unreachable from its source.
    #[default]
    Separation,
}

impl Semantics {
    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::Path => "path",
            Semantics::Separation => "separation",
        }
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "path" => Ok(Semantics::Path),
            "separation" => Ok(Semantics::Separation),
            other => Err(format!("unknown semantics {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SolverChoice {
    Exact,
    Greedy,
    /// Exact up to `max_exact_candidates` candidate edges, greedy beyond.
    #[default]
    Auto,
}

impl SolverChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverChoice::Exact => "exact",
            SolverChoice::Greedy => "greedy",
            SolverChoice::Auto => "auto",
        }
    }
}

impl FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SolverChoice::Exact),
            "greedy" => Ok(SolverChoice::Greedy),
            "auto" => Ok(SolverChoice::Auto),
            other => Err(format!("unknown solver {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub solver: SolverChoice,
    pub max_exact_candidates: usize,
    /// Ceiling on refinement rounds; exceeding it is an error.
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            solver: SolverChoice::Auto,
            max_exact_candidates: 24,
            max_iterations: 10_000,
        }
    }
}

/// Where a constraint path came from: a negative trace, or the k-th
/// separation witness added during refinement (`refined-k`, from 1).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintOrigin {
    Trace(String),
    Refined(usize),
}

impl fmt::Display for ConstraintOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintOrigin::Trace(id) => f.write_str(id),
            ConstraintOrigin::Refined(k) => write!(f, "refined-{k}"),
        }
    }
}

/// One path the cut has to hit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub origin: ConstraintOrigin,
    pub pair: (NodeId, NodeId),
    pub path: Vec<NodeId>,
    /// The path's cuttable edges (no self-loops, nothing protected).
    pub edges: BTreeSet<Edge>,
}

#[derive(Debug, Clone)]
pub struct CutProblem<'g> {
    graph: &'g FlowGraph,
    constraints: Vec<Constraint>,
    forbidden: BTreeSet<Edge>,
    semantics: Semantics,
}

impl<'g> CutProblem<'g> {
    /// Seeds the constraint paths with the graph's negative traces.
    pub fn new(graph: &'g FlowGraph, semantics: Semantics) -> Self {
        let constraints = graph
            .negative_paths()
            .iter()
            .map(|neg| Constraint {
                origin: ConstraintOrigin::Trace(neg.trace_id.clone()),
                pair: neg.pair.clone(),
                path: neg.nodes.clone(),
                edges: cuttable(graph, &neg.edges),
            })
            .collect();
        CutProblem {
            graph,
            constraints,
            forbidden: graph.protected_edges(),
            semantics,
        }
    }

    pub fn graph(&self) -> &FlowGraph {
        self.graph
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn forbidden(&self) -> &BTreeSet<Edge> {
        &self.forbidden
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    fn conflict(&self, pair: (NodeId, NodeId), witness: Vec<NodeId>) -> Conflict {
        let trace_ids = self
            .graph
            .negative_paths()
            .iter()
            .filter(|p| p.pair == pair)
            .map(|p| p.trace_id.clone())
            .collect();
        Conflict {
            pair,
            witness,
            trace_ids,
        }
    }
}

fn cuttable<'a>(graph: &FlowGraph, edges: impl IntoIterator<Item = &'a Edge>) -> BTreeSet<Edge> {
    edges
        .into_iter()
        .filter(|e| graph.edge(e).is_some_and(|f| f.is_candidate()))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSet {
    pub edges: BTreeSet<Edge>,
    /// Number of hitting-set solves performed.
    pub iterations: usize,
    /// True iff the final solve used the exact solver.
    pub optimal: bool,
    /// Every constraint path the final cut hits, seeds first.
    pub constraints: Vec<Constraint>,
}

/// A negative flow that no cut can break: its witness path uses only
/// protected edges and self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub pair: (NodeId, NodeId),
    pub witness: Vec<NodeId>,
    /// Negative traces with this endpoint pair.
    pub trace_ids: Vec<String>,
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<&str> = self.witness.iter().map(NodeId::as_str).collect();
        write!(
            f,
            "cannot separate {} from {} (negative trace(s): {}); every edge of the path [{}] is protected",
            self.pair.0,
            self.pair.1,
            self.trace_ids.join(", "),
            path.join(" -> ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CutError {
    #[error("{0}")]
    Conflict(Conflict),
    #[error("refinement did not converge within {0} iterations")]
    IterationLimit(usize),
    #[error("{count} candidate edges exceed the exact solver limit of {limit}")]
    TooManyCandidates { count: usize, limit: usize },
}

/// For every pair still connected after removing `cut`, the BFS-shortest
/// witness path (successors visited in text order). Empty means separated.
pub fn verify_separation<'a>(
    graph: &FlowGraph,
    cut: &BTreeSet<Edge>,
    pairs: impl IntoIterator<Item = &'a (NodeId, NodeId)>,
) -> Vec<((NodeId, NodeId), Vec<NodeId>)> {
    pairs
        .into_iter()
        .filter_map(|(s, t)| {
            graph
                .shortest_path(s, t, cut)
                .map(|path| ((s.clone(), t.clone()), path))
        })
        .collect()
}

fn solve_once(
    sets: &[BTreeSet<Edge>],
    forbidden: &BTreeSet<Edge>,
    config: &SolverConfig,
) -> Result<(BTreeSet<Edge>, bool), CutError> {
    let candidates = sets.iter().flatten().collect::<BTreeSet<_>>().len();
    let use_exact = match config.solver {
        SolverChoice::Exact if candidates > config.max_exact_candidates => {
            return Err(CutError::TooManyCandidates {
                count: candidates,
                limit: config.max_exact_candidates,
            })
        }
        SolverChoice::Exact => true,
        SolverChoice::Greedy => false,
        SolverChoice::Auto => candidates <= config.max_exact_candidates,
    };
    let result = if use_exact {
        min_hitting_set_exact(sets, forbidden)
    } else {
        min_hitting_set_greedy(sets, forbidden)
    };
    match result {
        Ok(cut) => Ok((cut, use_exact)),
        Err(HittingSetError::InfeasibleSet(i)) => {
            unreachable!("constraint {i} has no cuttable edge but passed the emptiness check")
        }
    }
}

/// Computes the cut. Among minimum cuts the exact solver returns the one
/// whose sorted edge list is lexicographically smallest.
pub fn solve_synthesis_cut(
    problem: CutProblem<'_>,
    config: &SolverConfig,
) -> Result<CutSet, CutError> {
    let mut problem = problem;
    if let Some(c) = problem.constraints.iter().find(|c| c.edges.is_empty()) {
        return Err(CutError::Conflict(problem.conflict(c.pair.clone(), c.path.clone())));
    }

    let mut refined = 0usize;
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        if iterations > config.max_iterations {
            return Err(CutError::IterationLimit(config.max_iterations));
        }
        let sets: Vec<BTreeSet<Edge>> =
            problem.constraints.iter().map(|c| c.edges.clone()).collect();
        let (cut, optimal) = solve_once(&sets, &problem.forbidden, config)?;

        if problem.semantics == Semantics::Path {
            return Ok(CutSet {
                edges: cut,
                iterations,
                optimal,
                constraints: problem.constraints,
            });
        }

        let witnesses = verify_separation(problem.graph, &cut, problem.graph.negative_pairs());
        if witnesses.is_empty() {
            return Ok(CutSet {
                edges: cut,
                iterations,
                optimal,
                constraints: problem.constraints,
            });
        }

        let mut added: BTreeSet<BTreeSet<Edge>> = BTreeSet::new();
        for (pair, path) in witnesses {
            let path_edges: Vec<Edge> = path
                .windows(2)
                .map(|w| Edge::new(w[0].clone(), w[1].clone()))
                .collect();
            let edges = cuttable(problem.graph, &path_edges);
            if edges.is_empty() {
                return Err(CutError::Conflict(problem.conflict(pair, path)));
            }
            // The witness avoids the current cut, so it differs from every
            // existing constraint; only same-round duplicates need skipping.
            if !added.insert(edges.clone()) {
                continue;
            }
            refined += 1;
            problem.constraints.push(Constraint {
                origin: ConstraintOrigin::Refined(refined),
                pair,
                path,
                edges,
            });
        }
    }
}
