//! Experiment specification, parameter grids, and CSV summaries.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DVector;
use rayon::prelude::*;

use minty::solver::SolveError;
use minty::trace::fmt_full;
use minty::{
    solve_ep, solve_vi, BetaSchedule, ProblemInstance, RunTrace, SolverConfig, TerminationRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// The equilibrium-problem loop.
    Alg1,
    /// The VI specialization.
    Alg2,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "alg1" => Ok(Algorithm::Alg1),
            "alg2" => Ok(Algorithm::Alg2),
            other => bail!("unknown algorithm `{other}` (expected alg1 or alg2)"),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
        }
    }

    pub fn run(self, instance: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace, SolveError> {
        match self {
            Algorithm::Alg1 => solve_ep(instance, config),
            Algorithm::Alg2 => solve_vi(instance, config),
        }
    }
}

/// A parameter grid over solver runs; the grid order is
/// theta-major, then delta, beta, x0.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub problem: String,
    pub algorithm: Algorithm,
    pub thetas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub betas: Vec<BetaSchedule>,
    pub starts: Vec<DVector<f64>>,
    pub termination: TerminationRule,
    pub max_outer: usize,
    pub inner_tol: f64,
    pub projection_tol: f64,
    /// Timing repeats per grid point; iteration counts must agree across
    /// repeats and the reported wall time is the median.
    pub repeat: usize,
    pub out_dir: Option<PathBuf>,
    pub write_traces: bool,
}

impl ExperimentSpec {
    pub fn grid_len(&self) -> usize {
        self.thetas.len() * self.deltas.len() * self.betas.len() * self.starts.len()
    }

    pub fn validate(&self, instance: &ProblemInstance) -> Result<()> {
        if self.grid_len() == 0 {
            bail!("empty parameter grid");
        }
        if self.repeat == 0 {
            bail!("repeat count must be positive");
        }
        // Every grid point must yield a valid configuration.
        for (idx, point) in self.grid_points().enumerate() {
            let config = self.config_at(&point);
            config
                .validate(instance)
                .map_err(|e| anyhow!("grid point {idx}: {e}"))?;
        }
        Ok(())
    }

    pub fn grid_points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        self.thetas.iter().flat_map(move |&theta| {
            self.deltas.iter().flat_map(move |&delta| {
                self.betas.iter().flat_map(move |&beta| {
                    self.starts.iter().map(move |x0| GridPoint {
                        theta,
                        delta,
                        beta,
                        x0: x0.clone(),
                    })
                })
            })
        })
    }

    pub fn config_at(&self, point: &GridPoint) -> SolverConfig {
        let mut config = SolverConfig::new(point.x0.clone(), self.termination);
        config.theta = point.theta;
        config.delta = point.delta;
        config.beta = point.beta;
        config.max_outer = self.max_outer;
        config.inner_tol = self.inner_tol;
        config.projection_tol = self.projection_tol;
        config
    }
}

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub theta: f64,
    pub delta: f64,
    pub beta: BetaSchedule,
    pub x0: DVector<f64>,
}

/// One line of the sweep summary.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub index: usize,
    pub problem: String,
    pub algorithm: Algorithm,
    pub point: GridPoint,
    pub termination: TerminationRule,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub final_e: f64,
    pub status: String,
    pub final_point: Option<DVector<f64>>,
}

impl SummaryRow {
    pub fn succeeded(&self) -> bool {
        matches!(
            self.status.as_str(),
            "SolvedByYEqualsX"
                | "SolvedByZeroSubgradient"
                | "SolvedByFixedIterate"
                | "ToleranceMet"
        )
    }
}

pub const SUMMARY_HEADER: &str =
    "idx,problem,algorithm,theta,delta,beta,x0,term,iterations,wall_time_s,final_E,status,final_point";

/// Vectors inside CSV fields use `;` so the file needs no quoting.
pub fn fmt_vector(v: &DVector<f64>) -> String {
    v.iter()
        .map(|&e| e.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{},{},{}\n",
            r.index,
            r.problem,
            r.algorithm.as_str(),
            r.point.theta,
            r.point.delta,
            r.point.beta,
            fmt_vector(&r.point.x0),
            r.termination,
            r.iterations,
            r.wall_time_s,
            fmt_full(r.final_e),
            r.status,
            r.final_point.as_ref().map(fmt_vector).unwrap_or_default(),
        ));
    }
    out
}

/// Runs every grid point (in a worker pool), collects rows in grid order,
/// and writes the summary plus optional per-run traces.
pub fn run_experiment(spec: &ExperimentSpec, instance: &ProblemInstance) -> Result<Vec<SummaryRow>> {
    spec.validate(instance)?;
    if let Some(dir) = &spec.out_dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        if spec.write_traces {
            std::fs::create_dir_all(dir.join("traces"))
                .with_context(|| format!("cannot create {}/traces", dir.display()))?;
        }
    }

    let points: Vec<GridPoint> = spec.grid_points().collect();
    let rows: Vec<SummaryRow> = points
        .par_iter()
        .enumerate()
        .map(|(index, point)| run_grid_point(spec, instance, index, point))
        .collect();

    if let Some(dir) = &spec.out_dir {
        let path = dir.join("summary.csv");
        std::fs::write(&path, summary_csv(&rows))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(rows)
}

fn run_grid_point(
    spec: &ExperimentSpec,
    instance: &ProblemInstance,
    index: usize,
    point: &GridPoint,
) -> SummaryRow {
    let config = spec.config_at(point);
    let mut timings = Vec::with_capacity(spec.repeat);
    let mut outcome: Option<RunTrace> = None;
    let mut error: Option<String> = None;

    for rep in 0..spec.repeat {
        let started = Instant::now();
        match spec.algorithm.run(instance, &config) {
            Ok(trace) => {
                timings.push(started.elapsed().as_secs_f64());
                if let Some(previous) = &outcome {
                    if previous.iterations() != trace.iterations() {
                        error = Some(format!(
                            "nondeterministic: repeat {rep} took {} iterations, first took {}",
                            trace.iterations(),
                            previous.iterations()
                        ));
                        break;
                    }
                }
                outcome = Some(trace);
            }
            Err(e) => {
                error = Some(format!("error: {e}"));
                break;
            }
        }
    }

    timings.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if timings.is_empty() {
        f64::NAN
    } else {
        timings[timings.len() / 2]
    };

    match (outcome, error) {
        (Some(trace), None) => {
            if spec.write_traces {
                if let Some(dir) = &spec.out_dir {
                    let path = dir.join("traces").join(format!("run_{index:04}.csv"));
                    if let Err(e) = minty::trace::write_trace_csv_file(&trace, &path) {
                        eprintln!("warning: {e}");
                    }
                }
            }
            SummaryRow {
                index,
                problem: spec.problem.clone(),
                algorithm: spec.algorithm,
                point: point.clone(),
                termination: spec.termination,
                iterations: trace.iterations(),
                wall_time_s: median,
                final_e: trace.final_e(),
                status: trace.status.to_string(),
                final_point: Some(trace.final_point),
            }
        }
        (_, err) => SummaryRow {
            index,
            problem: spec.problem.clone(),
            algorithm: spec.algorithm,
            point: point.clone(),
            termination: spec.termination,
            iterations: 0,
            wall_time_s: median,
            final_e: f64::NAN,
            status: err.unwrap_or_else(|| "error: no outcome".into()),
            final_point: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use minty::problems::quasimonotone_vi;
    use nalgebra::dvector;

    fn spec(starts: Vec<DVector<f64>>) -> ExperimentSpec {
        ExperimentSpec {
            problem: "quasimonotone-vi".into(),
            algorithm: Algorithm::Alg2,
            thetas: vec![0.95],
            deltas: vec![0.01],
            betas: vec![BetaSchedule::Constant(0.5)],
            starts,
            termination: TerminationRule::xy(1e-8),
            max_outer: 500,
            inner_tol: 1e-10,
            projection_tol: 1e-10,
            repeat: 1,
            out_dir: None,
            write_traces: false,
        }
    }

    #[test]
    fn grid_enumerates_in_order() {
        let mut s = spec(vec![dvector![0.0, 0.0], dvector![1.0, 1.0]]);
        s.thetas = vec![0.5, 0.95];
        let points: Vec<_> = s.grid_points().collect();
        assert_eq!(points.len(), 4);
        assert_eq!(points[0].theta, 0.5);
        assert_eq!(points[0].x0, dvector![0.0, 0.0]);
        assert_eq!(points[1].x0, dvector![1.0, 1.0]);
        assert_eq!(points[2].theta, 0.95);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let s = spec(vec![]);
        let err = s.validate(&quasimonotone_vi()).unwrap_err();
        assert!(err.to_string().contains("empty"));
    }

    #[test]
    fn invalid_grid_point_is_rejected() {
        let mut s = spec(vec![dvector![2.0, 0.0]]);
        s.thetas = vec![0.5];
        assert!(s.validate(&quasimonotone_vi()).is_err());
    }

    #[test]
    fn summary_rows_are_deterministic_and_ordered() {
        let instance = quasimonotone_vi();
        let s = spec(vec![dvector![0.0, 0.0], dvector![1.0, 1.0]]);
        let rows = run_experiment(&s, &instance).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].index, 0);
        assert_eq!(rows[1].iterations, 1);
        assert!(rows.iter().all(|r| r.succeeded()));

        let again = run_experiment(&s, &instance).unwrap();
        let counts: Vec<_> = rows.iter().map(|r| r.iterations).collect();
        let counts_again: Vec<_> = again.iter().map(|r| r.iterations).collect();
        assert_eq!(counts, counts_again);
    }

    #[test]
    fn csv_has_no_commas_inside_fields() {
        let instance = quasimonotone_vi();
        let s = spec(vec![dvector![0.3, 0.5]]);
        let rows = run_experiment(&s, &instance).unwrap();
        let csv = summary_csv(&rows);
        for line in csv.lines() {
            assert_eq!(line.split(',').count(), SUMMARY_HEADER.split(',').count());
        }
    }
}
