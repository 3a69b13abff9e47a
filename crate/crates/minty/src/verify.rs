//! Post-hoc verification of a recorded run against the properties the
//! method guarantees: anchor-distance monotonicity, feasibility of each
//! iterate in every accumulated cut, retention of a known Minty point in
//! every cut, bit-exact reconstruction of the linesearch geometry, and
//! containment in the theoretical bounding ball.
//!
//! Slack constants are pinned here; they are derived from the default
//! projection tolerance (1e-10) and the iterate magnitudes of the shipped
//! problems, not tuned per run.

use thiserror::Error;

use crate::linesearch::{linesearch_rhs, segment_point};
use crate::model::ProblemInstance;
use crate::solver::{build_cut, build_w_cut, termination_value, SolverConfig};
use crate::subproblem::subproblem_residual;
use crate::trace::{RunStatus, RunTrace};

/// Allowed slack in the squared-distance telescoping inequality and the
/// anchored-cut inner products.
pub const ANCHOR_SLACK: f64 = 1e-8;
/// Allowed geometric violation of accumulated cuts by later iterates.
pub const FEASIBILITY_SLACK: f64 = 1e-8;
/// Allowed violation of `<g, minty - z> <= 0` per cut.
pub const MINTY_SLACK: f64 = 1e-9;
/// Allowed excess over the bounding-ball radius.
pub const BALL_SLACK: f64 = 1e-6;
/// Allowed positive value of the subproblem residual certificate.
pub const RESIDUAL_SLACK: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("trace/instance mismatch: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Worst observed slack (positive means violation of that size).
    pub worst_slack: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub checks: Vec<InvariantCheck>,
}

impl InvariantReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

impl std::fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::NotApplicable => "n/a ",
            };
            writeln!(f, "{status}  {:<28} worst slack {:>12.3e}  {}", c.name, c.worst_slack, c.detail)?;
        }
        Ok(())
    }
}

/// Re-checks every recorded invariant of `trace` against the instance and
/// configuration that produced it. The linesearch inequality is re-checked
/// in the mode the trace records.
pub fn verify_invariants(
    trace: &RunTrace,
    instance: &ProblemInstance,
    config: &SolverConfig,
) -> Result<InvariantReport, VerifyError> {
    let mode = trace.mode;
    if trace.records.is_empty() {
        return Err(VerifyError::Mismatch("trace has no records".into()));
    }
    let dim = instance.dim();
    for r in &trace.records {
        if r.x.len() != dim || r.y.len() != dim || r.z.len() != dim || r.g.len() != dim {
            return Err(VerifyError::Mismatch(format!(
                "record {} dimension differs from instance dimension {dim}",
                r.k
            )));
        }
    }
    if config.x0.len() != dim {
        return Err(VerifyError::Mismatch("config x0 dimension differs".into()));
    }

    let oracle = instance.ep_oracle();
    let x0 = &config.x0;
    let mut checks = Vec::new();

    // theta_k and z reconstruction, exact.
    {
        let mut worst = 0.0f64;
        let mut fail = String::new();
        for r in &trace.records {
            let ok = if r.m >= 1 {
                r.theta_k == config.theta.powi(r.m as i32)
                    && segment_point(&r.x, &r.y, r.theta_k) == r.z
            } else {
                r.theta_k == 1.0 && r.z == r.y
            };
            if !ok {
                worst = f64::INFINITY;
                fail = format!("record {} does not reconstruct", r.k);
                break;
            }
        }
        checks.push(check("theta-reconstruction", worst, 0.0, fail));
    }

    // E column consistency, exact.
    {
        let mut worst = 0.0f64;
        let mut fail = String::new();
        for r in &trace.records {
            let e = termination_value(&config.termination, &r.x, &r.y, &r.z);
            if e.to_bits() != r.e_value.to_bits() {
                worst = (e - r.e_value).abs();
                fail = format!("record {} stores E {} instead of {}", r.k, r.e_value, e);
                break;
            }
        }
        checks.push(check("termination-value", worst, 0.0, fail));
    }

    // Linesearch certificate: the recorded z satisfies the inequality, and
    // the previous exponent fails it (minimality).
    {
        let mut worst = f64::NEG_INFINITY;
        let mut fail = String::new();
        for r in &trace.records {
            if r.m == 0 {
                continue;
            }
            let beta = config.beta.value(r.k);
            let dist2 = (&r.x - &r.y).norm_squared();
            let rhs = linesearch_rhs(mode, beta, config.delta, dist2);
            let lhs = oracle.eval(&r.z, &r.y);
            worst = worst.max(lhs - rhs);
            if lhs > rhs {
                fail = format!("record {} violates the sufficient decrease", r.k);
                break;
            }
            if r.m >= 2 {
                let z_prev = segment_point(&r.x, &r.y, config.theta.powi(r.m as i32 - 1));
                if oracle.eval(&z_prev, &r.y) <= rhs {
                    fail = format!("record {} exponent is not minimal", r.k);
                    worst = f64::INFINITY;
                    break;
                }
            }
        }
        let worst = if worst == f64::NEG_INFINITY { 0.0 } else { worst };
        checks.push(check("linesearch-certificate", worst, 0.0, fail));
    }

    // Subproblem residual certificate f(x, y) + beta ||x - y||^2 <= slack.
    {
        let mut worst = f64::NEG_INFINITY;
        let mut at = 0usize;
        for r in &trace.records {
            let beta = config.beta.value(r.k);
            let res = subproblem_residual(instance, &r.x, &r.y, beta);
            if res > worst {
                worst = res;
                at = r.k;
            }
        }
        checks.push(check(
            "subproblem-residual",
            worst,
            RESIDUAL_SLACK,
            format!("worst at record {at}"),
        ));
    }

    // Anchor-distance monotonicity with the squared telescoping bound.
    {
        let mut worst = f64::NEG_INFINITY;
        let mut at = 0usize;
        for pair in trace.records.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let d_prev = (&a.x - x0).norm_squared();
            let d_next = (&b.x - x0).norm_squared();
            let step = (&b.x - &a.x).norm_squared();
            // d_next >= d_prev + step - slack.
            let violation = d_prev + step - d_next;
            if violation > worst {
                worst = violation;
                at = a.k;
            }
        }
        let worst = if worst == f64::NEG_INFINITY { 0.0 } else { worst };
        checks.push(check(
            "anchor-monotonicity",
            worst,
            ANCHOR_SLACK,
            format!("worst between records {at} and {}", at + 1),
        ));
    }

    // Anchored-cut geometry: <x_{k+1} - x_k, x0 - x_k> <= slack.
    {
        let mut worst = f64::NEG_INFINITY;
        let mut at = 0usize;
        for pair in trace.records.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let ip = (&b.x - &a.x).dot(&(x0 - &a.x));
            if ip > worst {
                worst = ip;
                at = a.k;
            }
        }
        let worst = if worst == f64::NEG_INFINITY { 0.0 } else { worst };
        checks.push(check(
            "anchored-cut-geometry",
            worst,
            ANCHOR_SLACK,
            format!("worst at record {at}"),
        ));
    }

    let rebuilt = rebuild_cuts(trace, config);

    // Cut-count bookkeeping: the recorded counters must match the
    // reconstruction (they are what the CSV round-trip preserves).
    {
        let mut worst = 0.0f64;
        let mut fail = String::new();
        for (i, r) in trace.records.iter().enumerate() {
            let expected = rebuilt.windows[i].len();
            if r.num_cuts != expected {
                worst = f64::INFINITY;
                fail = format!("record {} reports {} cuts, reconstruction has {expected}", r.k, r.num_cuts);
                break;
            }
        }
        checks.push(check("cut-count", worst, 0.0, fail));
    }

    // Feasibility of successor iterates in the box and all cuts the solver
    // held when it produced them.
    {
        let mut worst = f64::NEG_INFINITY;
        let mut at = 0usize;
        for (idx, pair) in trace.records.windows(2).enumerate() {
            let next_x = &pair[1].x;
            let mut v = instance.feasible.violation(next_x);
            for cut in &rebuilt.cuts[rebuilt.windows[idx].clone()] {
                v = v.max(cut.violation(next_x));
            }
            v = v.max(build_w_cut(x0, &pair[0].x).violation(next_x));
            if v > worst {
                worst = v;
                at = idx;
            }
        }
        let worst = if worst == f64::NEG_INFINITY { 0.0 } else { worst };
        checks.push(check(
            "iterate-feasibility",
            worst,
            FEASIBILITY_SLACK,
            format!("worst successor of record {at}"),
        ));
    }

    // Minty retention: a known Minty point belongs to every constructed
    // cut, including any a cap later dropped.
    {
        let cuts = &rebuilt.cuts;
        match &instance.known_minty_point {
            None => checks.push(na("minty-retention", "no known Minty point")),
            Some(point) => {
                let mut worst = f64::NEG_INFINITY;
                for cut in cuts {
                    worst = worst.max(cut.excess(point));
                }
                let worst = if worst == f64::NEG_INFINITY { 0.0 } else { worst };
                checks.push(check(
                    "minty-retention",
                    worst,
                    MINTY_SLACK,
                    format!("{} cuts checked", cuts.len()),
                ));
            }
        }
    }

    // Bounding ball around the segment from the anchor to the projection of
    // the anchor onto the Minty set; applicable when the known Minty point
    // is that projection (unique Minty solution).
    {
        match &instance.known_minty_point {
            Some(point) if instance.minty_point_is_unique => {
                let center = (x0 + point) * 0.5;
                let radius = (x0 - point).norm() * 0.5;
                let mut worst = f64::NEG_INFINITY;
                let mut at = 0usize;
                for r in &trace.records {
                    let excess = (&r.x - &center).norm() - radius;
                    if excess > worst {
                        worst = excess;
                        at = r.k;
                    }
                }
                let worst = if worst == f64::NEG_INFINITY { 0.0 } else { worst };
                checks.push(check(
                    "boundedness-ball",
                    worst,
                    BALL_SLACK,
                    format!("worst at record {at}"),
                ));
            }
            _ => checks.push(na(
                "boundedness-ball",
                "needs a known, unique Minty point",
            )),
        }
    }

    Ok(InvariantReport { checks })
}

fn check(name: &'static str, worst: f64, slack: f64, fail_detail: String) -> InvariantCheck {
    let pass = worst <= slack;
    InvariantCheck {
        name,
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        worst_slack: worst,
        detail: if pass { String::new() } else { fail_detail },
    }
}

fn na(name: &'static str, why: &str) -> InvariantCheck {
    InvariantCheck {
        name,
        status: CheckStatus::NotApplicable,
        worst_slack: 0.0,
        detail: why.into(),
    }
}

/// All cuts the run constructed, in order, plus for each record the window
/// of that list the solver actually held after the record's cut step (the
/// full prefix without a cap, the trailing `cap` entries with one).
///
/// A record constructed a cut exactly when the run proceeded past its cut
/// step: every record with a successor did, and the last record did
/// precisely when the run ended at or after the projection.
struct RebuiltCuts {
    cuts: Vec<crate::model::HalfSpace>,
    windows: Vec<std::ops::Range<usize>>,
}

fn rebuild_cuts(trace: &RunTrace, config: &SolverConfig) -> RebuiltCuts {
    let last_added = matches!(
        trace.status,
        RunStatus::SolvedByFixedIterate | RunStatus::IterationLimit | RunStatus::ProjectionFailure
    );
    let mut cuts = Vec::new();
    let mut windows = Vec::with_capacity(trace.records.len());
    for (i, r) in trace.records.iter().enumerate() {
        let added = i + 1 < trace.records.len() || last_added;
        if added {
            cuts.push(build_cut(&r.g, &r.z));
        }
        let lo = match config.cut_cap {
            Some(cap) => cuts.len().saturating_sub(cap),
            None => 0,
        };
        windows.push(lo..cuts.len());
    }
    RebuiltCuts { cuts, windows }
}
