//! Per-iteration records, full run traces, and their CSV serialization.
//!
//! Trace files have the fixed header
//! `k,E,dist_to_anchor,m_k,theta_k,linesearch_lhs,num_cuts,wall_ms`
//! and print floating-point fields with 17 significant digits so re-parsing
//! reproduces them bit-exactly.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use nalgebra::DVector;
use thiserror::Error;

use crate::linesearch::LinesearchMode;

/// Snapshot of one outer iteration.
///
/// A record with `m == 0` marks an iteration that stopped at the subproblem
/// (`y = x` within tolerance): no linesearch ran, `z` is set to `y`, and
/// `theta_k` to 1 so the segment identity `z = (1 - theta_k) x + theta_k y`
/// still holds.
#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub k: usize,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    /// Linesearch exponent `m_k` (0 for a diagonal stop).
    pub m: u32,
    /// `theta^{m_k}`, stored exactly as the linesearch computed it.
    pub theta_k: f64,
    /// The cut normal: a diagonal subgradient (EP mode) or operator value
    /// (VI mode) at `z`.
    pub g: DVector<f64>,
    /// Termination functional value for this iteration.
    pub e_value: f64,
    /// `||x^k - x^0||`.
    pub dist_to_anchor: f64,
    /// Left-hand side achieved by the accepted linesearch step.
    pub linesearch_lhs: f64,
    /// Cuts accumulated after this iteration's cut construction.
    pub num_cuts: usize,
    pub wall_time: Duration,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// The subproblem returned the current iterate: it solves the problem.
    SolvedByYEqualsX,
    /// The cut normal vanished at `z`: `z` solves the problem.
    SolvedByZeroSubgradient,
    /// The projection returned the current iterate: it solves the problem.
    SolvedByFixedIterate,
    /// The termination functional dropped below its threshold.
    ToleranceMet,
    IterationLimit,
    /// The intersection projection failed to converge.
    ProjectionFailure,
}

impl RunStatus {
    /// Whether the run ended at a solution (exact rule or tolerance).
    pub fn converged(self) -> bool {
        matches!(
            self,
            RunStatus::SolvedByYEqualsX
                | RunStatus::SolvedByZeroSubgradient
                | RunStatus::SolvedByFixedIterate
                | RunStatus::ToleranceMet
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::SolvedByYEqualsX => "SolvedByYEqualsX",
            RunStatus::SolvedByZeroSubgradient => "SolvedByZeroSubgradient",
            RunStatus::SolvedByFixedIterate => "SolvedByFixedIterate",
            RunStatus::ToleranceMet => "ToleranceMet",
            RunStatus::IterationLimit => "IterationLimit",
            RunStatus::ProjectionFailure => "ProjectionFailure",
        }
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Complete history of one solver run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<IterateRecord>,
    pub status: RunStatus,
    pub final_point: DVector<f64>,
    /// Which sufficient-decrease inequality the run's linesearch enforced;
    /// verification re-checks against the same one.
    pub mode: LinesearchMode,
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_e(&self) -> f64 {
        self.records.last().map(|r| r.e_value).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

pub const TRACE_HEADER: &str = "k,E,dist_to_anchor,m_k,theta_k,linesearch_lhs,num_cuts,wall_ms";

/// Formats a float with 17 significant digits, enough for an exact
/// round-trip through decimal.
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a trace as CSV.
pub fn write_trace_csv<W: Write>(trace: &RunTrace, mut out: W) -> std::io::Result<()> {
    let mut buf = String::new();
    writeln!(buf, "{TRACE_HEADER}").unwrap();
    for r in &trace.records {
        writeln!(
            buf,
            "{},{},{},{},{},{},{},{}",
            r.k,
            fmt_full(r.e_value),
            fmt_full(r.dist_to_anchor),
            r.m,
            fmt_full(r.theta_k),
            fmt_full(r.linesearch_lhs),
            r.num_cuts,
            fmt_full(r.wall_time.as_secs_f64() * 1e3),
        )
        .unwrap();
    }
    out.write_all(buf.as_bytes())
}

pub fn write_trace_csv_file(trace: &RunTrace, path: impl AsRef<Path>) -> Result<(), TraceError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_trace_csv(trace, std::io::BufWriter::new(file)).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// One parsed row of a trace file (scalar columns only; iterate vectors are
/// not serialized).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub e_value: f64,
    pub dist_to_anchor: f64,
    pub m: u32,
    pub theta_k: f64,
    pub linesearch_lhs: f64,
    pub num_cuts: usize,
    pub wall_ms: f64,
}

impl TraceRow {
    pub fn from_record(r: &IterateRecord) -> Self {
        TraceRow {
            k: r.k,
            e_value: r.e_value,
            dist_to_anchor: r.dist_to_anchor,
            m: r.m,
            theta_k: r.theta_k,
            linesearch_lhs: r.linesearch_lhs,
            num_cuts: r.num_cuts,
            wall_ms: r.wall_time.as_secs_f64() * 1e3,
        }
    }
}

/// Reads a trace CSV produced by [`write_trace_csv`].
pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRow>, TraceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let err = |line: usize, message: String| TraceError::Parse {
        path: path.display().to_string(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TRACE_HEADER => {}
        Some((_, header)) => {
            return Err(err(1, format!("unexpected header `{header}`")));
        }
        None => return Err(err(1, "empty file".into())),
    }

    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 8 {
            return Err(err(line, format!("expected 8 fields, found {}", fields.len())));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64, TraceError> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| err(line, format!("bad {what} `{s}`")))
        };
        let parse_u = |s: &str, what: &str| -> Result<usize, TraceError> {
            s.trim()
                .parse::<usize>()
                .map_err(|_| err(line, format!("bad {what} `{s}`")))
        };
        rows.push(TraceRow {
            k: parse_u(fields[0], "iteration index")?,
            e_value: parse_f(fields[1], "E value")?,
            dist_to_anchor: parse_f(fields[2], "anchor distance")?,
            m: parse_u(fields[3], "linesearch exponent")? as u32,
            theta_k: parse_f(fields[4], "theta_k")?,
            linesearch_lhs: parse_f(fields[5], "linesearch lhs")?,
            num_cuts: parse_u(fields[6], "cut count")?,
            wall_ms: parse_f(fields[7], "wall time")?,
        });
    }
    Ok(rows)
}
