//! End-to-end synthesis: corpus in, analysis out.

use thiserror::Error;

use crate::checker::{corpus_digest, AnalysisSpec, ConstraintRecord, SolverMetadata, SpecMetadata};
use crate::cut::{solve_synthesis_cut, Conflict, CutError, CutProblem, CutSet, Semantics, SolverConfig};
use crate::graph::{build_graph_unchecked, FlowGraph};
use crate::lattice::{
    build_order, check_consistency, complete_join_semilattice, EffectSemilattice, Element,
    QualifierOrder, Violation,
};
use crate::trace::{validate_corpus, Corpus, Diagnostic, Mode, Severity};
use crate::TOOL_VERSION;

pub const UNKNOWN_ELEMENT_NAME: &str = "Q_unknown";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SynthConfig {
    pub semantics: Semantics,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    /// Warnings from corpus validation.
    pub warnings: Vec<Diagnostic>,
    pub graph: FlowGraph,
    pub cut: CutSet,
    pub order: QualifierOrder,
    /// Present in effect mode.
    pub semilattice: Option<EffectSemilattice>,
    pub spec: AnalysisSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    /// Validation found errors; every error kind marks a negative flow that
    /// can never be forbidden.
    #[error("corpus is infeasible: {}", .0.iter().filter(|d| d.severity == Severity::Error).map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
    Infeasible(Vec<Diagnostic>),
    #[error("{0}")]
    Conflict(Conflict),
    #[error("{0}")]
    Solver(CutError),
    #[error("synthesized order is inconsistent with the cut: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Inconsistent {
        violations: Vec<Violation>,
        cut: CutSet,
    },
}

pub fn synthesize(corpus: &Corpus, config: &SynthConfig) -> Result<Synthesis, SynthError> {
    let diagnostics = validate_corpus(corpus);
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(SynthError::Infeasible(diagnostics));
    }

    let graph = build_graph_unchecked(corpus);
    let problem = CutProblem::new(&graph, config.semantics);
    let cut = solve_synthesis_cut(problem, &config.solver).map_err(|e| match e {
        CutError::Conflict(c) => SynthError::Conflict(c),
        other => SynthError::Solver(other),
    })?;

    let order = build_order(&graph, &cut.edges);
    // Under path semantics only the observed paths must break, so endpoint
    // pairs may stay ordered.
    let pairs = match config.semantics {
        Semantics::Separation => graph.negative_pairs().iter().collect(),
        Semantics::Path => Vec::new(),
    };
    let violations = check_consistency(&order, &cut.edges, pairs);
    if !violations.is_empty() {
        return Err(SynthError::Inconsistent { violations, cut });
    }

    let semilattice = (corpus.mode == Mode::Effect).then(|| complete_join_semilattice(&order));
    let (lattice, default_element) = match &semilattice {
        Some(lat) => (lat.order().clone(), lat.bottom_index()),
        None => with_unknown_element(&order),
    };

    let metadata = SpecMetadata {
        corpus_sha256: corpus_digest(corpus),
        optimal: cut.optimal,
        semantics: config.semantics.as_str().to_string(),
        tool_version: TOOL_VERSION.to_string(),
        solver: Some(SolverMetadata {
            choice: config.solver.solver.as_str().to_string(),
            max_exact_candidates: config.solver.max_exact_candidates,
            iterations: cut.iterations,
        }),
        constraints: cut
            .constraints
            .iter()
            .map(|c| ConstraintRecord {
                id: c.origin.to_string(),
                pair: c.pair.clone(),
                path: c.path.clone(),
                edges: c.edges.iter().cloned().collect(),
            })
            .collect(),
    };
    let spec = AnalysisSpec {
        mode: corpus.mode,
        lattice,
        cut: cut.edges.clone(),
        default_element,
        metadata,
    };

    Ok(Synthesis {
        warnings: diagnostics,
        graph,
        cut,
        order,
        semilattice,
        spec,
    })
}

/// Appends an isolated element for nodes the analysis has never seen.
fn with_unknown_element(order: &QualifierOrder) -> (QualifierOrder, usize) {
    let mut name = UNKNOWN_ELEMENT_NAME.to_string();
    while order.index_of(&name).is_ok() {
        name.push('\'');
    }
    let mut elements = order.elements().to_vec();
    let index = elements.len();
    elements.push(Element {
        name,
        members: Default::default(),
        synthetic: true,
    });
    let poset = order.poset().with_isolated(1);
    (
        QualifierOrder::new(elements, poset, order.assignment().clone()),
        index,
    )
}
