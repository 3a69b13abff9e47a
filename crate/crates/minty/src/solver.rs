//! The outer projection loops.
//!
//! Each iteration solves the proximal subproblem, runs the linesearch, cuts
//! the space with the half-space through the linesearch point, and projects
//! the *anchor* `x^0` (not the current iterate) onto the box intersected
//! with every accumulated cut and the anchored half-space `W(x^k)`. The
//! next iterate is that projection. Projecting the fixed anchor is what
//! gives strong convergence without Fejér-monotonicity arguments.

use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use thiserror::Error;

use crate::linesearch::{armijo_linesearch, LinesearchFailure, LinesearchMode};
use crate::model::{HalfSpace, ProblemInstance};
use crate::projection::project_intersection;
use crate::subproblem::{solve_subproblem, SubproblemError, DEFAULT_INNER_CAP};
use crate::trace::{IterateRecord, RunStatus, RunTrace};

/// Step-size sequence `beta_k` for the proximal subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    Constant(f64),
    /// `beta_k = (k + 1) / (a k + b)`; requires `a > 0` and `b > 0` so the
    /// sequence stays within a bounded positive interval.
    Rational { a: f64, b: f64 },
}

impl BetaSchedule {
    pub fn value(&self, k: usize) -> f64 {
        match *self {
            BetaSchedule::Constant(c) => c,
            BetaSchedule::Rational { a, b } => (k as f64 + 1.0) / (a * k as f64 + b),
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let ok = match *self {
            BetaSchedule::Constant(c) => c > 0.0 && c.is_finite(),
            // a = 0 would make the sequence unbounded above.
            BetaSchedule::Rational { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(SolveError::InvalidConfig(format!(
                "beta schedule {self} is not positive and bounded"
            )))
        }
    }
}

impl std::fmt::Display for BetaSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            BetaSchedule::Constant(c) => write!(f, "const:{c}"),
            BetaSchedule::Rational { a, b } => write!(f, "rational:{a},{b}"),
        }
    }
}

impl FromStr for BetaSchedule {
    type Err = String;

    /// Parses `const:<c>` or `rational:<a>,<b>`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `const:<c>` or `rational:<a>,<b>`, got `{s}`"))?;
        match kind {
            "const" => {
                let c: f64 = rest.parse().map_err(|_| format!("bad constant `{rest}`"))?;
                Ok(BetaSchedule::Constant(c))
            }
            "rational" => {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| format!("expected `rational:<a>,<b>`, got `{s}`"))?;
                let a: f64 = a.parse().map_err(|_| format!("bad coefficient `{a}`"))?;
                let b: f64 = b.parse().map_err(|_| format!("bad coefficient `{b}`"))?;
                Ok(BetaSchedule::Rational { a, b })
            }
            other => Err(format!("unknown beta schedule `{other}`")),
        }
    }
}

/// Which squared distance the termination criterion watches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationVariant {
    /// `E = ||x^k - z^k||^2`.
    XZ,
    /// `E = ||x^k - y^k||^2`.
    XY,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminationRule {
    pub variant: TerminationVariant,
    pub threshold: f64,
}

impl TerminationRule {
    pub fn xz(threshold: f64) -> Self {
        TerminationRule {
            variant: TerminationVariant::XZ,
            threshold,
        }
    }

    pub fn xy(threshold: f64) -> Self {
        TerminationRule {
            variant: TerminationVariant::XY,
            threshold,
        }
    }
}

impl std::fmt::Display for TerminationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.variant {
            TerminationVariant::XZ => write!(f, "xz:{}", self.threshold),
            TerminationVariant::XY => write!(f, "xy:{}", self.threshold),
        }
    }
}

impl FromStr for TerminationRule {
    type Err = String;

    /// Parses `xz:<eps>` or `xy:<eps>`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, eps) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `xz:<eps>` or `xy:<eps>`, got `{s}`"))?;
        let threshold: f64 = eps.parse().map_err(|_| format!("bad threshold `{eps}`"))?;
        match kind {
            "xz" => Ok(TerminationRule::xz(threshold)),
            "xy" => Ok(TerminationRule::xy(threshold)),
            other => Err(format!("unknown termination rule `{other}`")),
        }
    }
}

/// The termination functional for one iteration's `x`, `y`, `z`.
pub fn termination_value(
    rule: &TerminationRule,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> f64 {
    match rule.variant {
        TerminationVariant::XZ => (x - z).norm_squared(),
        TerminationVariant::XY => (x - y).norm_squared(),
    }
}

/// All knobs of one solver run.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Backtracking ratio, in (0, 1).
    pub theta: f64,
    /// Sufficient-decrease factor, in (0, 1).
    pub delta: f64,
    pub beta: BetaSchedule,
    pub x0: DVector<f64>,
    pub termination: TerminationRule,
    /// Norm threshold below which a cut normal counts as zero.
    pub eps_subgrad: f64,
    /// Norm threshold for the exact-equality stops `y = x`. Kept far below
    /// any practical termination threshold so the `E` criterion dominates.
    pub eq_tol: f64,
    /// Norm threshold for the exact-equality stop `x_{k+1} = x_k`.
    pub fixed_point_tol: f64,
    /// Certified suboptimality required of the inner subproblem solve.
    pub inner_tol: f64,
    pub max_inner: usize,
    pub projection_tol: f64,
    pub max_outer: usize,
    pub max_linesearch: u32,
    /// When set, only this many most recent cuts are kept. Off by default:
    /// the method accumulates every cut.
    pub cut_cap: Option<usize>,
}

impl SolverConfig {
    pub fn new(x0: DVector<f64>, termination: TerminationRule) -> Self {
        SolverConfig {
            theta: 0.5,
            delta: 0.01,
            beta: BetaSchedule::Constant(0.5),
            x0,
            termination,
            eps_subgrad: 1e-12,
            eq_tol: 1e-12,
            fixed_point_tol: 1e-14,
            inner_tol: 1e-10,
            max_inner: DEFAULT_INNER_CAP,
            projection_tol: 1e-10,
            max_outer: 1000,
            max_linesearch: 100,
            cut_cap: None,
        }
    }

    pub fn validate(&self, instance: &ProblemInstance) -> Result<(), SolveError> {
        let bad = |msg: String| Err(SolveError::InvalidConfig(msg));
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        self.beta.validate()?;
        for (name, v) in [
            ("termination threshold", self.termination.threshold),
            ("eps_subgrad", self.eps_subgrad),
            ("eq_tol", self.eq_tol),
            ("fixed_point_tol", self.fixed_point_tol),
            ("inner_tol", self.inner_tol),
            ("projection_tol", self.projection_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.max_outer == 0 || self.max_linesearch == 0 || self.max_inner == 0 {
            return bad("iteration caps must be positive".into());
        }
        if self.x0.len() != instance.dim() {
            return bad(format!(
                "x0 has dimension {}, instance needs {}",
                self.x0.len(),
                instance.dim()
            ));
        }
        if instance.feasible.violation(&self.x0) > 0.0 {
            return bad("x0 lies outside the feasible box".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("outer iteration {k}: {source}")]
    Linesearch {
        k: usize,
        #[source]
        source: LinesearchFailure,
    },
    #[error("outer iteration {k}: {source}")]
    Inner {
        k: usize,
        #[source]
        source: SubproblemError,
    },
}

/// Half-space cut `{x : <g, x - z> <= 0}` through the linesearch point.
///
/// Panics when `g = 0`: the caller must have stopped with a zero
/// subgradient instead of cutting.
pub fn build_cut(g: &DVector<f64>, z: &DVector<f64>) -> HalfSpace {
    assert!(
        g.iter().any(|&e| e != 0.0),
        "cut normal must be nonzero; a zero subgradient is a stopping condition"
    );
    HalfSpace::new(g.clone(), z.clone())
}

/// Anchored half-space `W(x^k) = {x : <x - x^k, x^0 - x^k> <= 0}`; the whole
/// space when `x^k = x^0`.
pub fn build_w_cut(x0: &DVector<f64>, xk: &DVector<f64>) -> HalfSpace {
    HalfSpace::new(x0 - xk, xk.clone())
}

/// Runs the equilibrium-problem loop (subproblem + linesearch form of the
/// sufficient decrease). VI instances are admitted through their induced
/// bifunction.
pub fn solve_ep(instance: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace, SolveError> {
    run_loop(instance, config, LinesearchMode::Ep)
}

/// Runs the VI specialization: the subproblem is the exact projection
/// `P_C(x - F(x)/beta)`, the linesearch uses the VI scaling, and the cut
/// normal is the operator value at the linesearch point.
pub fn solve_vi(instance: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace, SolveError> {
    if instance.vi_oracle().is_none() {
        return Err(SolveError::OracleMismatch(format!(
            "instance `{}` does not provide a VI operator",
            instance.name
        )));
    }
    run_loop(instance, config, LinesearchMode::Vi)
}

fn run_loop(
    instance: &ProblemInstance,
    config: &SolverConfig,
    mode: LinesearchMode,
) -> Result<RunTrace, SolveError> {
    config.validate(instance)?;
    let oracle = instance.ep_oracle();
    let dim = instance.dim();
    let x0 = config.x0.clone();

    let mut cuts: Vec<HalfSpace> = Vec::new();
    let mut x = x0.clone();
    let mut records: Vec<IterateRecord> = Vec::new();

    let finish = |records: Vec<IterateRecord>, status: RunStatus, point: DVector<f64>| {
        Ok(RunTrace {
            records,
            status,
            final_point: point,
            mode,
        })
    };

    for k in 0..config.max_outer {
        let iter_start = Instant::now();
        let beta = config.beta.value(k);
        let dist_to_anchor = (&x - &x0).norm();

        // Subproblem: y^k minimizes f(x^k, .) + (beta/2)||. - x^k||^2 over the box.
        let sub = solve_subproblem(instance, &x, beta, config.inner_tol, config.max_inner)
            .map_err(|source| SolveError::Inner { k, source })?;
        let y = sub.minimizer;

        if (&x - &y).norm() <= config.eq_tol {
            // Diagonal stop: the record keeps z = y with exponent 0 so the
            // segment identity still holds.
            let e_value = termination_value(&config.termination, &x, &y, &y);
            records.push(IterateRecord {
                k,
                x: x.clone(),
                y: y.clone(),
                z: y.clone(),
                m: 0,
                theta_k: 1.0,
                g: DVector::zeros(dim),
                e_value,
                dist_to_anchor,
                linesearch_lhs: 0.0,
                num_cuts: cuts.len(),
                wall_time: iter_start.elapsed(),
            });
            return finish(records, RunStatus::SolvedByYEqualsX, x);
        }

        let hit = armijo_linesearch(
            oracle.as_ref(),
            &x,
            &y,
            beta,
            config.theta,
            config.delta,
            mode,
            config.max_linesearch,
        )
        .map_err(|source| SolveError::Linesearch { k, source })?;

        // The cut normal: diagonal subgradient at z. For a wrapped VI oracle
        // this is exactly the operator value F(z).
        let g = oracle.subgrad2(&hit.z, &hit.z);
        let e_value = termination_value(&config.termination, &x, &y, &hit.z);

        let mut record = IterateRecord {
            k,
            x: x.clone(),
            y,
            z: hit.z.clone(),
            m: hit.m,
            theta_k: hit.theta_k,
            g: g.clone(),
            e_value,
            dist_to_anchor,
            linesearch_lhs: hit.lhs,
            num_cuts: cuts.len(),
            wall_time: iter_start.elapsed(),
        };

        if g.norm() <= config.eps_subgrad {
            record.wall_time = iter_start.elapsed();
            records.push(record);
            return finish(records, RunStatus::SolvedByZeroSubgradient, hit.z);
        }
        if e_value <= config.termination.threshold {
            record.wall_time = iter_start.elapsed();
            records.push(record);
            return finish(records, RunStatus::ToleranceMet, x);
        }

        // Cut construction and the anchored projection.
        cuts.push(build_cut(&g, &hit.z));
        if let Some(cap) = config.cut_cap {
            while cuts.len() > cap {
                cuts.remove(0);
            }
        }
        record.num_cuts = cuts.len();

        let mut targets = cuts.clone();
        targets.push(build_w_cut(&x0, &x));
        let max_cycles = 50 * (targets.len() + 1) * dim;
        let projection =
            project_intersection(&instance.feasible, &targets, &x0, config.projection_tol, max_cycles);

        record.wall_time = iter_start.elapsed();
        records.push(record);

        match projection {
            Err(_) => return finish(records, RunStatus::ProjectionFailure, x),
            Ok(result) => {
                let x_next = result.point;
                if (&x_next - &x).norm() <= config.fixed_point_tol {
                    return finish(records, RunStatus::SolvedByFixedIterate, x_next);
                }
                x = x_next;
            }
        }
    }
    finish(records, RunStatus::IterationLimit, x)
}
