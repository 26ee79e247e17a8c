//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use flowsynth::cut::{Semantics, SolverChoice, SolverConfig};
use flowsynth::expand::{enumerate_candidate_paths, EndpointSpec, StaticGraph};
use flowsynth::graph::build_graph_unchecked;
use flowsynth::oracle::{
    brute_force_min_cut, brute_force_simple_paths, join_law_violations, order_law_violations,
};
use flowsynth::checker::check_corpus;
use flowsynth::{
    parse_corpus, synthesize, AnalysisSpec, Corpus, Edge, Mode, NodeId,
    OrderRelation, Polarity, SynthConfig, SynthError, Synthesis, Trace,
};
use flowsynth_cli::{run_synth, SynthArgs, ANALYSIS_FILE, LATTICE_FILE, REPORT_FILE};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const SEED: u64 = 0x5eed_f10e;
const CORPORA: usize = 240;
const MONOTONICITY_PAIRS: usize = 120;
const EXPANDER_GRAPHS: usize = 150;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn node(i: usize) -> NodeId {
    NodeId::new(format!("n{i}")).unwrap()
}

fn exact() -> SynthConfig {
    SynthConfig {
        semantics: Semantics::Separation,
        solver: SolverConfig {
            solver: SolverChoice::Exact,
            max_exact_candidates: 64,
            ..SolverConfig::default()
        },
    }
}

/// Random walk of 2 to 5 nodes along `edges`, or `None` if it gets stuck
/// before its second node.
fn walk(rng: &mut ChaCha8Rng, nodes: usize, edges: &[(usize, usize)]) -> Option<Vec<NodeId>> {
    let mut at = rng.gen_range(0..nodes);
    let len = rng.gen_range(2..=5);
    let mut path = vec![node(at)];
    while path.len() < len {
        let out: Vec<usize> = edges.iter().filter(|e| e.0 == at).map(|e| e.1).collect();
        match out.choose(rng) {
            Some(&next) => {
                at = next;
                path.push(node(at));
            }
            None => break,
        }
    }
    (path.len() >= 2).then_some(path)
}

/// A corpus over at most 8 nodes whose traces walk a digraph of at most
/// 16 edges, with at most 6 traces of mixed polarity.
fn random_corpus(rng: &mut ChaCha8Rng) -> Corpus {
    let nodes = rng.gen_range(2..=8);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for _ in 0..rng.gen_range(1..=16) {
        edges.insert((rng.gen_range(0..nodes), rng.gen_range(0..nodes)));
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    let mode = if rng.gen_bool(0.5) { Mode::Effect } else { Mode::Qualifier };
    let mut traces = Vec::new();
    for i in 0..rng.gen_range(1..=6) {
        let polarity = if rng.gen_bool(0.4) { Polarity::Positive } else { Polarity::Negative };
        if let Some(path) = walk(rng, nodes, &edges) {
            traces.push(Trace::new(format!("t{i}"), polarity, path).unwrap());
        }
    }
    Corpus::new(mode, traces)
}

struct Sample {
    corpus: Corpus,
    synthesis: Result<Synthesis, SynthError>,
}

fn is_infeasible(result: &Result<Synthesis, SynthError>) -> bool {
    matches!(result, Err(SynthError::Conflict(_)) | Err(SynthError::Infeasible(_)))
}

fn criterion_1(samples: &mut Vec<Sample>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = Instant::now();
    let (mut feasible, mut infeasible) = (0, 0);
    let mut failures = Vec::new();
    for k in 0..CORPORA {
        let corpus = random_corpus(&mut rng);
        let oracle = brute_force_min_cut(&build_graph_unchecked(&corpus), Semantics::Separation);
        let synthesis = synthesize(&corpus, &exact());
        match (&synthesis, &oracle) {
            (Ok(s), Some(min)) if s.cut.edges.len() == min.len() && s.cut.optimal => feasible += 1,
            (r, None) if is_infeasible(r) => infeasible += 1,
            (Ok(s), _) => failures.push(format!(
                "corpus {k}: solver cut {} vs oracle {:?}",
                s.cut.edges.len(),
                oracle.as_ref().map(BTreeSet::len)
            )),
            (Err(e), _) => failures.push(format!(
                "corpus {k}: solver error {e} vs oracle {:?}",
                oracle.as_ref().map(BTreeSet::len)
            )),
        }
        samples.push(Sample { corpus, synthesis });
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{CORPORA} corpora, {feasible} feasible, {infeasible} infeasible, {:.2}s",
        elapsed.as_secs_f64()
    );
    if !failures.is_empty() {
        return Err(format!("{detail}; {}", failures.join("; ")));
    }
    if elapsed >= Duration::from_secs(30) {
        return Err(format!("{detail}; over the 30 s budget"));
    }
    Ok(detail)
}

fn criterion_2(samples: &[Sample]) -> Outcome {
    let (mut negatives, mut positives, mut checked) = (0, 0, 0);
    for (k, sample) in samples.iter().enumerate() {
        let Ok(s) = &sample.synthesis else { continue };
        let report = check_corpus(&s.spec, &sample.corpus);
        if !report.is_clean() {
            return Err(format!(
                "corpus {k}: {} misses, {} false alarms",
                report.misses(),
                report.false_alarms()
            ));
        }
        checked += 1;
        negatives += report.counts.negatives_rejected;
        positives += report.counts.positives_accepted;
    }
    if checked == 0 {
        return Err("no feasible corpora".into());
    }
    Ok(format!(
        "{checked} analyses: {negatives}/{negatives} negatives rejected, {positives}/{positives} positives accepted"
    ))
}

fn criterion_3(samples: &[Sample]) -> Outcome {
    let (mut orders, mut semilattices, mut max_elements) = (0, 0, 0);
    for (k, sample) in samples.iter().enumerate() {
        let Ok(s) = &sample.synthesis else { continue };
        for lattice in [&s.order, &s.spec.lattice] {
            let violations = order_law_violations(lattice.len(), |a, b| lattice.leq(a, b));
            if let Some(v) = violations.first() {
                return Err(format!("corpus {k}: {v}"));
            }
            orders += 1;
        }
        if let Some(semi) = &s.semilattice {
            let order = semi.order();
            let violations = join_law_violations(
                order.len(),
                |a, b| order.leq(a, b),
                |a, b| semi.join_index(a, b),
                semi.bottom_index(),
            );
            if let Some(v) = violations.first() {
                return Err(format!("corpus {k}: {v}"));
            }
            semilattices += 1;
            max_elements = max_elements.max(order.len());
        }
    }
    Ok(format!(
        "{orders} orders and {semilattices} semilattices (up to {max_elements} elements), zero violations"
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let (mut pairs, mut attempts, mut grew) = (0, 0, 0);
    while pairs < MONOTONICITY_PAIRS {
        attempts += 1;
        if attempts > 50 * MONOTONICITY_PAIRS {
            return Err(format!("only {pairs} feasible pairs in {attempts} attempts"));
        }
        let base = random_corpus(&mut rng);
        let Ok(before) = synthesize(&base, &exact()) else { continue };
        let nodes: Vec<NodeId> = before.graph.nodes().iter().cloned().collect();
        if nodes.len() < 2 {
            continue;
        }
        let extra: Vec<NodeId> = (0..rng.gen_range(2..=4))
            .map(|_| nodes.choose(&mut rng).unwrap().clone())
            .collect();
        let mut bigger = base.clone();
        bigger.traces.push(Trace::new("extra", Polarity::Negative, extra).unwrap());
        pairs += 1;
        match synthesize(&bigger, &exact()) {
            Ok(after) if after.cut.edges.len() < before.cut.edges.len() => {
                return Err(format!(
                    "pair {pairs}: cut shrank from {} to {}",
                    before.cut.edges.len(),
                    after.cut.edges.len()
                ));
            }
            Ok(after) if after.cut.edges.len() > before.cut.edges.len() => grew += 1,
            Ok(_) => {}
            Err(SynthError::Conflict(_) | SynthError::Infeasible(_)) => grew += 1,
            Err(e) => return Err(format!("pair {pairs}: {e}")),
        }
    }
    Ok(format!("{pairs} pairs, cut grew or became infeasible in {grew}, never shrank"))
}

fn synth_args(corpus: Option<PathBuf>, stack_traces: Option<PathBuf>, out: &Path) -> SynthArgs {
    SynthArgs {
        corpus,
        stack_traces,
        mode: None,
        semantics: Semantics::Separation,
        solver: SolverChoice::Auto,
        max_exact_candidates: 24,
        out: out.to_path_buf(),
    }
}

fn synth_cli(args: &SynthArgs) -> Result<AnalysisSpec, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_synth(args, &mut out, &mut err);
    if code != 0 {
        return Err(format!("synth exited {code}: {}", String::from_utf8_lossy(&err)));
    }
    let text = fs::read_to_string(args.out.join(ANALYSIS_FILE)).map_err(|e| e.to_string())?;
    AnalysisSpec::from_json(&text).map_err(|e| e.to_string())
}

fn report_counts(dir: &Path) -> Result<serde_json::Value, String> {
    let text = fs::read_to_string(dir.join(REPORT_FILE)).map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(report["counts"].clone())
}

fn criterion_5() -> Outcome {
    let tmp = TempDir::new().map_err(|e| e.to_string())?;

    let start = Instant::now();
    let out = tmp.path().join("taint");
    let spec = synth_cli(&synth_args(Some(fixture("taint.json")), None, &out))?;
    let taint_time = start.elapsed();
    let relation = spec.lattice.order_query("Q_untainted", "Q_tainted").map_err(|e| e.to_string())?;
    if relation != OrderRelation::Less {
        return Err(format!("taint: Q_untainted vs Q_tainted is {relation:?}"));
    }
    if !spec.cut.contains(&Edge::from_names("tainted", "untainted")) {
        return Err("taint: reverse flow not cut".into());
    }

    let start = Instant::now();
    let out = tmp.path().join("ui");
    let spec = synth_cli(&synth_args(None, Some(fixture("ui")), &out))?;
    let ui_time = start.elapsed();
    if spec.mode != Mode::Effect {
        return Err("ui: not an effect analysis".into());
    }
    let counts = report_counts(&out)?;
    let expected = serde_json::json!({
        "negatives_accepted": 0, "negatives_rejected": 1,
        "positives_accepted": 1, "positives_rejected": 0
    });
    if counts != expected {
        return Err(format!("ui: report counts {counts}"));
    }
    let relation = spec
        .lattice
        .order_query("Q_android.view.View.requestLayout", "Q_com.example.app.Worker.run")
        .map_err(|e| e.to_string())?;
    if relation != OrderRelation::Incomparable {
        return Err(format!("ui: requestLayout vs Worker.run is {relation:?}"));
    }

    let limit = Duration::from_secs(1);
    if taint_time >= limit || ui_time >= limit {
        return Err(format!("too slow: taint {taint_time:?}, ui {ui_time:?}"));
    }
    Ok(format!(
        "taint Q_untainted < Q_tainted in {:.1} ms; ui negative rejected, positive accepted in {:.1} ms",
        taint_time.as_secs_f64() * 1e3,
        ui_time.as_secs_f64() * 1e3
    ))
}

fn criterion_6() -> Outcome {
    let corpus = parse_corpus(&fs::read_to_string(fixture("triangle.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let graph = build_graph_unchecked(&corpus);
    let edges: BTreeSet<Edge> = graph.edges().map(|e| e.edge.clone()).collect();
    let expected: BTreeSet<Edge> = [("a", "b"), ("a", "c"), ("b", "c")]
        .iter()
        .map(|(s, t)| Edge::from_names(s, t))
        .collect();
    if edges != expected || graph.negative_pairs().len() != 1 {
        return Err("fixture is not the 3-node instance".into());
    }
    let s = synthesize(&corpus, &SynthConfig::default()).map_err(|e| e.to_string())?;
    let oracle = brute_force_min_cut(&graph, Semantics::Separation).ok_or("oracle found no cut")?;
    let cut: Vec<String> = s.cut.edges.iter().map(ToString::to_string).collect();
    if s.cut.iterations != 2 || s.cut.edges.len() != 2 || s.cut.edges != oracle {
        return Err(format!("{} iterations, cut [{}]", s.cut.iterations, cut.join(", ")));
    }
    Ok(format!("2 iterations, cut [{}] equals the oracle", cut.join(", ")))
}

fn criterion_7() -> Outcome {
    let tmp = TempDir::new().map_err(|e| e.to_string())?;
    let cases: Vec<(&str, SynthArgs)> = vec![
        ("taint", synth_args(Some(fixture("taint.json")), None, Path::new(""))),
        ("triangle", synth_args(Some(fixture("triangle.json")), None, Path::new(""))),
        ("ui", synth_args(None, Some(fixture("ui")), Path::new(""))),
        (
            "sql-path",
            SynthArgs {
                semantics: Semantics::Path,
                ..synth_args(Some(fixture("sql_taint.json")), None, Path::new(""))
            },
        ),
        (
            "ui-qualifier-merged",
            SynthArgs {
                mode: Some(Mode::Qualifier),
                ..synth_args(Some(fixture("taint.json")), Some(fixture("ui")), Path::new(""))
            },
        ),
    ];
    for (name, args) in &cases {
        let mut runs = Vec::new();
        for round in 0..2 {
            let out = tmp.path().join(format!("{name}-{round}"));
            synth_cli(&SynthArgs { out: out.clone(), ..args.clone() })
                .map_err(|e| format!("{name}: {e}"))?;
            runs.push(out);
        }
        for file in [ANALYSIS_FILE, LATTICE_FILE, REPORT_FILE] {
            let a = fs::read(runs[0].join(file)).map_err(|e| e.to_string())?;
            let b = fs::read(runs[1].join(file)).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{name}/{file} differs between runs"));
            }
        }
    }
    Ok(format!("{} fixtures x 3 artifacts byte-identical", cases.len()))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut total_paths = 0;
    let mut truncated = 0;
    for k in 0..EXPANDER_GRAPHS {
        let n = rng.gen_range(2..=6);
        let density = rng.gen_range(0.1..0.7);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(density) {
                    edges.push(Edge::new(node(a), node(b)));
                }
            }
        }
        let graph = StaticGraph::new((0..n).map(node), edges).map_err(|e| e.to_string())?;
        let source = rng.gen_range(0..n);
        let sink = (source + rng.gen_range(1..n)) % n;
        let spec = EndpointSpec {
            max_path_len: rng.gen_range(2..=6),
            max_paths: rng.gen_range(1..=8),
            ..EndpointSpec::new(node(source), node(sink))
        };
        let expansion = enumerate_candidate_paths(&graph, &spec).map_err(|e| e.to_string())?;
        let all = brute_force_simple_paths(&graph, &spec.source, &spec.sink, spec.max_path_len);
        let got: Vec<Vec<NodeId>> = expansion.traces.iter().map(|t| t.nodes.clone()).collect();
        let expected: Vec<Vec<NodeId>> = all.iter().take(spec.max_paths).cloned().collect();
        if got != expected || expansion.truncated != (all.len() > spec.max_paths) {
            return Err(format!("graph {k}: {} paths vs oracle {}", got.len(), expected.len()));
        }
        total_paths += got.len();
        truncated += usize::from(expansion.truncated);
    }
    Ok(format!(
        "{EXPANDER_GRAPHS} graphs, {total_paths} paths, {truncated} truncated enumerations match"
    ))
}

fn main() -> ExitCode {
    let mut samples = Vec::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 oracle equivalence", criterion_1(&mut samples)),
        ("2 round trip", criterion_2(&samples)),
        ("3 order and semilattice laws", criterion_3(&samples)),
        ("4 monotonicity", criterion_4()),
        ("5 scenario fixtures", criterion_5()),
        ("6 lazy refinement", criterion_6()),
        ("7 determinism", criterion_7()),
        ("8 expander oracle", criterion_8()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
