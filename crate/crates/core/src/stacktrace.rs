//! Stack-trace frontend.
//!
//! Converts a JVM-style exception dump into a trace whose path starts at the
//! innermost frame (the offending operation) and walks outward through its
//! callers. Only the root-cause section (the last `Caused by:` block) is used;
//! a trailing `... N more` line is expanded with the last `N` frames of the
//! enclosing section.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::trace::{InvalidNodeId, NodeId, Polarity, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StackTraceError {
    #[error("no stack frames found")]
    NoFrames,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: elision references {requested} frames but the enclosing section has {available}")]
    ElisionOverflow {
        line: usize,
        requested: usize,
        available: usize,
    },
    #[error("root-cause section has {0} frame(s); a trace needs at least 2")]
    TooFewFrames(usize),
}

#[derive(Debug, Default)]
struct Section {
    frames: Vec<NodeId>,
    elided: Option<(usize, usize)>,
    start_line: usize,
}

fn elision_count(line: &str) -> Option<usize> {
    line.strip_prefix("... ")?
        .strip_suffix(" more")?
        .trim()
        .parse()
        .ok()
}

fn frame_name(rest: &str, line: usize) -> Result<NodeId, StackTraceError> {
    let fqn = rest.split('(').next().unwrap_or_default().trim();
    NodeId::new(fqn).map_err(|InvalidNodeId(name)| StackTraceError::Malformed {
        line,
        message: format!("invalid frame name {name:?}"),
    })
}

fn split_sections(text: &str) -> Result<Vec<Section>, StackTraceError> {
    let mut sections: Vec<Section> = Vec::new();
    let mut current: Option<Section> = None;

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }

        if let Some(rest) = line.strip_prefix("at ") {
            let section = current.get_or_insert_with(|| Section {
                start_line: line_no,
                ..Section::default()
            });
            if section.elided.is_some() {
                return Err(StackTraceError::Malformed {
                    line: line_no,
                    message: "frame after elision line".into(),
                });
            }
            section.frames.push(frame_name(rest, line_no)?);
        } else if line.starts_with("Caused by:") {
            if let Some(done) = current.take() {
                sections.push(done);
            }
            current = Some(Section {
                start_line: line_no,
                ..Section::default()
            });
        } else if let Some(n) = elision_count(line) {
            match current.as_mut() {
                Some(section) if !section.frames.is_empty() && section.elided.is_none() => {
                    section.elided = Some((n, line_no));
                }
                _ => {
                    return Err(StackTraceError::Malformed {
                        line: line_no,
                        message: "elision line without preceding frames".into(),
                    })
                }
            }
        } else {
            match current.as_ref() {
                // Multi-line exception messages stay part of the header.
                Some(section) if section.frames.is_empty() => {}
                Some(_) => {
                    return Err(StackTraceError::Malformed {
                        line: line_no,
                        message: format!("unexpected line after frames: {line:?}"),
                    })
                }
                None => {
                    current = Some(Section {
                        start_line: line_no,
                        ..Section::default()
                    })
                }
            }
        }
    }
    if let Some(done) = current.take() {
        sections.push(done);
    }
    Ok(sections)
}

/// Parses one stack-trace document into a trace, innermost frame first.
pub fn parse_stack_trace(
    text: &str,
    polarity: Polarity,
    id: &str,
) -> Result<Trace, StackTraceError> {
    let sections = split_sections(text)?;
    if sections.iter().all(|s| s.frames.is_empty()) {
        return Err(StackTraceError::NoFrames);
    }
    if let Some(empty) = sections.iter().find(|s| s.frames.is_empty()) {
        return Err(StackTraceError::Malformed {
            line: empty.start_line,
            message: "section has no frames".into(),
        });
    }

    // Expand every section in order so that nested elisions resolve against
    // the fully expanded enclosing section.
    let mut enclosing: Vec<NodeId> = Vec::new();
    for (i, section) in sections.iter().enumerate() {
        let mut full = section.frames.clone();
        if let Some((n, line)) = section.elided {
            if i == 0 || n > enclosing.len() {
                return Err(StackTraceError::ElisionOverflow {
                    line,
                    requested: n,
                    available: if i == 0 { 0 } else { enclosing.len() },
                });
            }
            full.extend_from_slice(&enclosing[enclosing.len() - n..]);
        }
        enclosing = full;
    }

    let frames = enclosing;
    if frames.len() < 2 {
        return Err(StackTraceError::TooFewFrames(frames.len()));
    }
    Ok(Trace::new(id, polarity, frames).expect("length checked"))
}

/// Splits a raw stack-trace filename into `(trace id, polarity)`:
/// `foo.neg.txt` is negative, `foo.pos.txt` positive, anything else `None`.
pub fn classify_filename(name: &str) -> Option<(String, Polarity)> {
    if let Some(stem) = name.strip_suffix(".neg.txt") {
        Some((stem.to_string(), Polarity::Negative))
    } else {
        name.strip_suffix(".pos.txt")
            .map(|stem| (stem.to_string(), Polarity::Positive))
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: StackTraceError,
    },
}

/// Reads every `*.neg.txt` / `*.pos.txt` file in `dir`, sorted by filename.
pub fn read_stack_trace_dir(dir: &Path) -> Result<Vec<Trace>, IngestError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| IngestError::Io { path, source }
    };
    let mut entries: Vec<(String, PathBuf)> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.path().is_file())
        .filter_map(|entry| Some((entry.file_name().into_string().ok()?, entry.path())))
        .collect();
    entries.sort();

    let mut traces = Vec::new();
    for (name, path) in entries {
        let Some((id, polarity)) = classify_filename(&name) else {
            continue;
        };
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let trace = parse_stack_trace(&text, polarity, &id)
            .map_err(|source| IngestError::Parse { path, source })?;
        traces.push(trace);
    }
    Ok(traces)
}
