//! Benchmark and experiment harness for the `minty` solvers.
//!
//! Three subcommands: `solve` runs one configuration and optionally writes
//! its trace, `sweep` runs a parameter grid into a summary CSV, and
//! `verify` replays a saved trace and re-checks the method's invariants.
//!
//! Exit codes: 0 on success, 1 when any run fails or a verification check
//! fails, 2 on specification/flag validation errors.

mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};

use experiment::{run_experiment, summary_csv, Algorithm, ExperimentSpec};
use minty::problems::{build_nash_cournot, quasimonotone_vi, synthetic_affine_vi, NashCournotParams};
use minty::trace::{read_trace_csv, write_trace_csv_file, TraceRow};
use minty::verify::verify_invariants;
use minty::{BetaSchedule, FeasibleBox, ProblemInstance, SolverConfig, TerminationRule};

#[derive(Parser)]
#[command(name = "minty", version, about = "Linesearch projection solvers: benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration and print its summary line.
    Solve(SolveArgs),
    /// Run a parameter grid and write summary.csv (plus optional traces).
    Sweep(SweepArgs),
    /// Replay a saved trace and re-check the method's invariants.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Problem instance: nash-cournot, quasimonotone-vi, or synthetic.
    #[arg(long)]
    problem: String,
    /// Optional parameter table for nash-cournot (plain-text key-value file).
    #[arg(long)]
    params: Option<PathBuf>,
    /// alg1 (equilibrium loop) or alg2 (VI specialization). Defaults to
    /// alg1 for nash-cournot and alg2 for the VI problems.
    #[arg(long)]
    algorithm: Option<String>,
    /// Termination rule: xz:<eps> or xy:<eps>. Defaults to xz:1e-4 under
    /// alg1 and xy:1e-8 under alg2.
    #[arg(long)]
    term: Option<String>,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    inner_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    proj_tol: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Step schedule: const:<c> or rational:<a>,<b> for (k+1)/(a k + b).
    #[arg(long, default_value = "const:0.5")]
    beta: String,
    /// Start point as a comma list; defaults to the problem's standard start.
    #[arg(long)]
    x0: Option<String>,
    /// Directory for trace.csv; no trace is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Grid values; repeat the flag for each value.
    #[arg(long = "theta")]
    thetas: Vec<f64>,
    #[arg(long = "delta")]
    deltas: Vec<f64>,
    #[arg(long = "beta")]
    betas: Vec<String>,
    /// Start points, each a comma list; repeat the flag for each.
    #[arg(long = "x0")]
    x0s: Vec<String>,
    /// Timing repeats per grid point (median reported).
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    #[arg(long, default_value = "sweep-out")]
    out: PathBuf,
    /// Also write one trace CSV per grid point under <out>/traces/.
    #[arg(long)]
    traces: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value = "const:0.5")]
    beta: String,
    #[arg(long)]
    x0: Option<String>,
    /// The trace file to verify.
    #[arg(long)]
    trace: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Specification problems (bad flags, unreadable inputs).
            ExitCode::from(2)
        }
    }
}

fn parse_vector(s: &str) -> Result<DVector<f64>> {
    let entries: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad coordinate `{p}`")))
        .collect::<Result<_>>()?;
    if entries.is_empty() {
        bail!("empty vector");
    }
    Ok(DVector::from_vec(entries))
}

struct Setup {
    instance: ProblemInstance,
    algorithm: Algorithm,
    termination: TerminationRule,
    default_x0: DVector<f64>,
}

fn setup(common: &CommonArgs) -> Result<Setup> {
    let instance = match common.problem.as_str() {
        "nash-cournot" => {
            let params = match &common.params {
                Some(path) => NashCournotParams::from_file(path)?,
                None => NashCournotParams::default(),
            };
            build_nash_cournot(params)?
        }
        "quasimonotone-vi" => quasimonotone_vi(),
        "synthetic" => synthetic_affine_vi(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![-0.3, -0.7]),
            FeasibleBox::unit(2),
            true,
        )?,
        other => bail!("unknown problem `{other}` (expected nash-cournot, quasimonotone-vi, or synthetic)"),
    };
    if common.params.is_some() && common.problem != "nash-cournot" {
        bail!("--params only applies to nash-cournot");
    }

    let algorithm = match &common.algorithm {
        Some(s) => Algorithm::parse(s)?,
        None => {
            if common.problem == "nash-cournot" {
                Algorithm::Alg1
            } else {
                Algorithm::Alg2
            }
        }
    };
    if algorithm == Algorithm::Alg2 && instance.vi_oracle().is_none() {
        bail!("alg2 needs a VI problem; `{}` only provides a bifunction", common.problem);
    }

    let termination = match &common.term {
        Some(s) => s.parse::<TerminationRule>().map_err(|e| anyhow::anyhow!(e))?,
        None => match algorithm {
            Algorithm::Alg1 => TerminationRule::xz(1e-4),
            Algorithm::Alg2 => TerminationRule::xy(1e-8),
        },
    };

    let default_x0 = match common.problem.as_str() {
        "nash-cournot" => DVector::from_vec(vec![20.0, 50.0, 40.0, 45.0, 30.0, 30.0]),
        _ => DVector::zeros(2),
    };

    Ok(Setup {
        instance,
        algorithm,
        termination,
        default_x0,
    })
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let setup = setup(&args.common)?;
    let x0 = match &args.x0 {
        Some(s) => parse_vector(s)?,
        None => setup.default_x0.clone(),
    };
    let beta: BetaSchedule = args.beta.parse().map_err(|e: String| anyhow::anyhow!(e))?;

    let mut config = SolverConfig::new(x0, setup.termination);
    config.theta = args.theta;
    config.delta = args.delta;
    config.beta = beta;
    config.max_outer = args.common.max_iters;
    config.inner_tol = args.common.inner_tol;
    config.projection_tol = args.common.proj_tol;
    config
        .validate(&setup.instance)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let started = std::time::Instant::now();
    let trace = match setup.algorithm.run(&setup.instance, &config) {
        Ok(trace) => trace,
        Err(e) => {
            eprintln!("run failed: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let elapsed = started.elapsed().as_secs_f64();

    println!(
        "problem={} algorithm={} status={} iterations={} final_E={:.6e} wall_s={:.6} final_point={}",
        setup.instance.name,
        setup.algorithm.as_str(),
        trace.status,
        trace.iterations(),
        trace.final_e(),
        elapsed,
        experiment::fmt_vector(&trace.final_point),
    );

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let path = dir.join("trace.csv");
        write_trace_csv_file(&trace, &path)?;
        println!("trace written to {}", path.display());
    }

    Ok(if trace.status.converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let setup = setup(&args.common)?;
    let betas = if args.betas.is_empty() {
        vec![BetaSchedule::Constant(0.5)]
    } else {
        args.betas
            .iter()
            .map(|s| s.parse::<BetaSchedule>().map_err(|e| anyhow::anyhow!(e)))
            .collect::<Result<_>>()?
    };
    let starts = if args.x0s.is_empty() {
        vec![setup.default_x0.clone()]
    } else {
        args.x0s.iter().map(|s| parse_vector(s)).collect::<Result<_>>()?
    };

    let spec = ExperimentSpec {
        problem: args.common.problem.clone(),
        algorithm: setup.algorithm,
        thetas: if args.thetas.is_empty() { vec![0.5] } else { args.thetas.clone() },
        deltas: if args.deltas.is_empty() { vec![0.01] } else { args.deltas.clone() },
        betas,
        starts,
        termination: setup.termination,
        max_outer: args.common.max_iters,
        inner_tol: args.common.inner_tol,
        projection_tol: args.common.proj_tol,
        repeat: args.repeat,
        out_dir: Some(args.out.clone()),
        write_traces: args.traces,
    };

    let rows = run_experiment(&spec, &setup.instance)?;
    print!("{}", summary_csv(&rows));
    let failures = rows.iter().filter(|r| !r.succeeded()).count();
    if failures > 0 {
        eprintln!("{failures} of {} runs failed", rows.len());
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let setup = setup(&args.common)?;
    let x0 = match &args.x0 {
        Some(s) => parse_vector(s)?,
        None => setup.default_x0.clone(),
    };
    let beta: BetaSchedule = args.beta.parse().map_err(|e: String| anyhow::anyhow!(e))?;

    let mut config = SolverConfig::new(x0, setup.termination);
    config.theta = args.theta;
    config.delta = args.delta;
    config.beta = beta;
    config.max_outer = args.common.max_iters;
    config.inner_tol = args.common.inner_tol;
    config.projection_tol = args.common.proj_tol;

    let saved = read_trace_csv(&args.trace)?;

    // Runs are deterministic, so replaying the configuration must reproduce
    // the stored scalar columns bit-for-bit (wall times aside).
    let trace = setup
        .algorithm
        .run(&setup.instance, &config)
        .map_err(|e| anyhow::anyhow!("replay failed: {e}"))?;
    let mut mismatches = 0usize;
    if saved.len() != trace.records.len() {
        println!(
            "replay mismatch: trace file has {} rows, replay produced {}",
            saved.len(),
            trace.records.len()
        );
        mismatches += 1;
    }
    for (row, rec) in saved.iter().zip(&trace.records) {
        let expect = TraceRow::from_record(rec);
        let same = row.k == expect.k
            && row.m == expect.m
            && row.num_cuts == expect.num_cuts
            && row.e_value.to_bits() == expect.e_value.to_bits()
            && row.theta_k.to_bits() == expect.theta_k.to_bits()
            && row.linesearch_lhs.to_bits() == expect.linesearch_lhs.to_bits()
            && row.dist_to_anchor.to_bits() == expect.dist_to_anchor.to_bits();
        if !same {
            println!("replay mismatch at k={}", row.k);
            mismatches += 1;
        }
    }
    if mismatches == 0 {
        println!("replay: trace matches the recomputed run bit-exactly ({} rows)", saved.len());
    }

    let report = verify_invariants(&trace, &setup.instance, &config)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    print!("{report}");

    Ok(if mismatches == 0 && report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
