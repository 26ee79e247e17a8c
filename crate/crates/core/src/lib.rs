//! Example-driven synthesis of program-specific static analyses.
//!
//! Given positive and negative traces (data-flow paths or stack traces),
//! flowsynth computes a minimum set of flow edges to prohibit, clusters the
//! remaining flow into a qualifier partial order (or an effect join
//! semilattice), and checks new traces against the result.

pub mod checker;
pub mod cut;
pub mod expand;
pub mod graph;
pub mod hitting;
pub mod lattice;
pub mod pipeline;
pub mod stacktrace;
pub mod trace;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use checker::{AnalysisSpec, CheckReport, Verdict};
pub use cut::{solve_synthesis_cut, CutProblem, CutSet, Semantics, SolverChoice, SolverConfig};
pub use graph::{build_graph, FlowGraph};
pub use lattice::{EffectSemilattice, Element, OrderRelation, QualifierOrder};
pub use pipeline::{synthesize, SynthConfig, SynthError, Synthesis};
pub use trace::{parse_corpus, serialize_corpus, Corpus, Edge, Mode, NodeId, Polarity, Trace};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Key-sorted, pretty-printed, newline-terminated JSON. Every artifact the
/// tool writes goes through here so identical inputs give identical bytes.
pub fn canonical_json<T: serde::Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("artifact types serialize to JSON");
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    text.push('\n');
    text
}
