//! Command implementations for the `flowsynth` binary.
//!
//! Each `run_*` function writes human-readable output to the given streams
//! and returns the process exit code.

pub mod dot;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use flowsynth::checker::{check_corpus, corpus_digest, explain_rejection, CheckReport, SpecError};
use flowsynth::cut::{CutError, Semantics, SolverChoice, SolverConfig};
use flowsynth::expand::{enumerate_candidate_paths, expansion_corpus, parse_static_graph, EndpointSpec};
use flowsynth::stacktrace::read_stack_trace_dir;
use flowsynth::{
    parse_corpus, serialize_corpus, synthesize, AnalysisSpec, Corpus, Mode, NodeId, SynthConfig,
    SynthError,
};
use thiserror::Error;

pub use dot::lattice_dot;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFLICT: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INVALID_ANALYSIS: u8 = 3;
pub const EXIT_CHECK_MISMATCH: u8 = 4;

pub const ANALYSIS_FILE: &str = "analysis.json";
pub const LATTICE_FILE: &str = "lattice.dot";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize an analysis from a trace corpus.
    Synth(SynthArgs),
    /// Check a corpus against a synthesized analysis.
    Check(CheckArgs),
    /// Expand source/sink endpoints into candidate negative traces.
    Expand(ExpandArgs),
    /// Explain why a trace is rejected.
    Explain(ExplainArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Corpus JSON file.
    #[arg(long, required_unless_present = "stack_traces")]
    pub corpus: Option<PathBuf>,
    /// Directory of `*.pos.txt` / `*.neg.txt` stack traces.
    #[arg(long)]
    pub stack_traces: Option<PathBuf>,
    /// Override the corpus mode [qualifier, effect].
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Cut semantics [separation, path].
    #[arg(long, default_value = "separation")]
    pub semantics: Semantics,
    /// Hitting-set solver [auto, exact, greedy].
    #[arg(long, default_value = "auto")]
    pub solver: SolverChoice,
    /// Candidate-edge limit for the exact solver.
    #[arg(long, default_value_t = 24)]
    pub max_exact_candidates: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub analysis: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExpandArgs {
    /// Static graph JSON file.
    #[arg(long)]
    pub static_graph: PathBuf,
    #[arg(long)]
    pub source: String,
    #[arg(long)]
    pub sink: String,
    /// Maximum path length in nodes.
    #[arg(long, default_value_t = 12)]
    pub max_path_len: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_paths: usize,
    /// Output corpus file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub analysis: PathBuf,
    #[arg(long)]
    pub trace_id: String,
    #[arg(long)]
    pub corpus: PathBuf,
}

/// A failure that ends a command with a specific exit code.
#[derive(Debug, Error)]
#[error("{message}")]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure::new(EXIT_INPUT, message)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

pub fn run(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match command {
        Command::Synth(args) => synth(args, out, err),
        Command::Check(args) => check(args, out, err),
        Command::Expand(args) => expand(args, out, err),
        Command::Explain(args) => explain(args, out, err),
    };
    finish(result, err)
}

pub fn run_synth(args: &SynthArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    finish(synth(args, out, err), err)
}

pub fn run_check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    finish(check(args, out, err), err)
}

pub fn run_expand(args: &ExpandArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    finish(expand(args, out, err), err)
}

pub fn run_explain(args: &ExplainArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    finish(explain(args, out, err), err)
}

fn finish(result: Outcome, err: &mut dyn Write) -> u8 {
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("reading {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::input(format!("writing {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("creating {}: {e}", dir.display())))
}

fn load_corpus(path: &Path) -> Result<Corpus, Failure> {
    parse_corpus(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_analysis(path: &Path) -> Result<AnalysisSpec, Failure> {
    AnalysisSpec::from_json(&read(path)?).map_err(|e| {
        let code = match e {
            SpecError::Parse { .. } => EXIT_INPUT,
            SpecError::Invalid(_) => EXIT_INVALID_ANALYSIS,
        };
        Failure::new(code, format!("{}: {e}", path.display()))
    })
}

/// Corpus from `--corpus` and/or `--stack-traces`. A stack-trace-only run
/// defaults to effect mode.
fn assemble_corpus(args: &SynthArgs) -> Result<Corpus, Failure> {
    let mut corpus = match &args.corpus {
        Some(path) => load_corpus(path)?,
        None if args.stack_traces.is_some() => Corpus {
            mode: Mode::Effect,
            ..Corpus::default()
        },
        None => return Err(Failure::input("one of --corpus or --stack-traces is required")),
    };
    if let Some(dir) = &args.stack_traces {
        let traces = read_stack_trace_dir(dir).map_err(|e| Failure::input(e.to_string()))?;
        corpus
            .extend_traces(traces)
            .map_err(|e| Failure::input(e.to_string()))?;
    }
    if let Some(mode) = args.mode {
        corpus.mode = mode;
    }
    Ok(corpus)
}

fn write_report_summary(out: &mut dyn Write, report: &CheckReport) -> io::Result<()> {
    let c = &report.counts;
    writeln!(
        out,
        "negatives rejected: {}/{}",
        c.negatives_rejected,
        c.negatives_rejected + c.negatives_accepted
    )?;
    writeln!(
        out,
        "positives accepted: {}/{}",
        c.positives_accepted,
        c.positives_accepted + c.positives_rejected
    )
}

fn synth(args: &SynthArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let corpus = assemble_corpus(args)?;
    let config = SynthConfig {
        semantics: args.semantics,
        solver: SolverConfig {
            solver: args.solver,
            max_exact_candidates: args.max_exact_candidates,
            ..SolverConfig::default()
        },
    };

    let synthesis = match synthesize(&corpus, &config) {
        Ok(s) => s,
        Err(SynthError::Infeasible(diagnostics)) => {
            for d in &diagnostics {
                writeln!(err, "{}: {}", d.severity.as_str(), d.message)?;
            }
            return Err(Failure::new(EXIT_CONFLICT, "corpus is infeasible"));
        }
        Err(SynthError::Conflict(conflict)) => {
            writeln!(err, "conflict: {conflict}")?;
            writeln!(err, "  negative traces: {}", conflict.trace_ids.join(", "))?;
            let path: Vec<&str> = conflict.witness.iter().map(NodeId::as_str).collect();
            writeln!(err, "  protected witness path: {}", path.join(" -> "))?;
            return Err(Failure::new(EXIT_CONFLICT, "no cut separates the negative flows"));
        }
        Err(SynthError::Solver(e @ CutError::TooManyCandidates { .. })) => {
            return Err(Failure::input(format!("{e}; use --solver greedy or raise --max-exact-candidates")));
        }
        Err(SynthError::Solver(e)) => return Err(Failure::new(EXIT_INVALID_ANALYSIS, e.to_string())),
        Err(e @ SynthError::Inconsistent { .. }) => {
            return Err(Failure::new(EXIT_INVALID_ANALYSIS, e.to_string()))
        }
    };

    for w in &synthesis.warnings {
        writeln!(err, "{}: {}", w.severity.as_str(), w.message)?;
    }
    if !synthesis.cut.optimal {
        writeln!(err, "warning: greedy solver used; the cut may not be minimum")?;
    }

    let spec = &synthesis.spec;
    let report = check_corpus(spec, &corpus);
    create_dir(&args.out)?;
    write_file(&args.out.join(ANALYSIS_FILE), &spec.to_json())?;
    write_file(&args.out.join(LATTICE_FILE), &lattice_dot(spec))?;
    write_file(&args.out.join(REPORT_FILE), &report.to_json())?;

    writeln!(out, "mode: {}", corpus.mode.as_str())?;
    writeln!(
        out,
        "graph: {} nodes, {} edges, {} negative traces",
        synthesis.graph.nodes().len(),
        synthesis.graph.edges().count(),
        synthesis.graph.negative_paths().len()
    )?;
    writeln!(
        out,
        "cut: {} edge(s), {} solve(s), {}",
        synthesis.cut.edges.len(),
        synthesis.cut.iterations,
        if synthesis.cut.optimal { "optimal" } else { "greedy" }
    )?;
    for edge in &synthesis.cut.edges {
        writeln!(out, "  {edge}")?;
    }
    writeln!(out, "elements: {}", spec.lattice.len())?;
    write_report_summary(out, &report)?;
    if !report.is_clean() {
        writeln!(err, "warning: the synthesized analysis misclassifies some corpus traces")?;
    }
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(EXIT_OK)
}

fn check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let spec = load_analysis(&args.analysis)?;
    let corpus = load_corpus(&args.corpus)?;
    let report = check_corpus(&spec, &corpus);
    if !report.corpus_matches_analysis {
        writeln!(
            err,
            "warning: corpus digest {} differs from the analysis corpus {}",
            corpus_digest(&corpus),
            spec.metadata.corpus_sha256
        )?;
    }
    create_dir(&args.out)?;
    write_file(&args.out.join(REPORT_FILE), &report.to_json())?;

    for verdict in &report.traces {
        writeln!(out, "{} ({}): {}", verdict.id, verdict.polarity.as_str(), verdict.verdict)?;
    }
    write_report_summary(out, &report)?;
    writeln!(
        out,
        "misses: {}, false alarms: {}",
        report.misses(),
        report.false_alarms()
    )?;
    Ok(if report.is_clean() {
        EXIT_OK
    } else {
        EXIT_CHECK_MISMATCH
    })
}

fn expand(args: &ExpandArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let graph = parse_static_graph(&read(&args.static_graph)?)
        .map_err(|e| Failure::input(format!("{}: {e}", args.static_graph.display())))?;
    let node = |name: &str| NodeId::new(name).map_err(|e| Failure::input(e.to_string()));
    let spec = EndpointSpec {
        max_path_len: args.max_path_len,
        max_paths: args.max_paths,
        ..EndpointSpec::new(node(&args.source)?, node(&args.sink)?)
    };
    let expansion = enumerate_candidate_paths(&graph, &spec).map_err(|e| Failure::input(e.to_string()))?;
    let truncated = expansion.truncated;
    let corpus = expansion_corpus(&spec, expansion);
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_file(&args.out, &serialize_corpus(&corpus))?;

    writeln!(
        out,
        "{} candidate path(s) from {} to {} (max {} nodes, max {} paths)",
        corpus.traces.len(),
        spec.source,
        spec.sink,
        spec.max_path_len,
        spec.max_paths
    )?;
    if truncated {
        writeln!(err, "warning: path enumeration truncated at {} paths", spec.max_paths)?;
    }
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(EXIT_OK)
}

fn explain(args: &ExplainArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Outcome {
    let spec = load_analysis(&args.analysis)?;
    let corpus = load_corpus(&args.corpus)?;
    let trace = corpus
        .trace(&args.trace_id)
        .ok_or_else(|| Failure::input(format!("no trace with id {}", args.trace_id)))?;
    let explanation = explain_rejection(&spec, trace).map_err(|e| Failure::input(e.to_string()))?;
    write!(out, "{explanation}")?;
    Ok(EXIT_OK)
}
