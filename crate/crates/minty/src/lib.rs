//! Linesearch projection solvers for equilibrium problems and variational
//! inequalities that need no monotonicity — only a nonempty solution set of
//! the associated Minty (dual) problem.
//!
//! An equilibrium problem asks for `x*` in a closed convex set `C` with
//! `f(x*, y) >= 0` for every `y` in `C`, where the bifunction `f` vanishes
//! on the diagonal. The solver iterates four steps: solve a strongly convex
//! proximal subproblem, backtrack along the segment to its solution until a
//! sufficient-decrease inequality holds, cut the space with a half-space
//! through the accepted point, and project the *fixed anchor* `x^0` onto the
//! box intersected with all accumulated cuts. A specialization for
//! variational inequalities (`f(x, y) = <F(x), y - x>`) replaces the
//! subproblem with a single projection.
//!
//! ```
//! use minty::{solve_vi, SolverConfig, TerminationRule, problems};
//! use nalgebra::dvector;
//!
//! // A quasimonotone VI on the unit square whose unique solution is (1, 1).
//! let instance = problems::quasimonotone_vi();
//! let mut config = SolverConfig::new(dvector![0.0, 0.0], TerminationRule::xy(1e-8));
//! config.theta = 0.95;
//! config.delta = 0.01;
//!
//! let trace = solve_vi(&instance, &config).unwrap();
//! assert!(trace.status.converged());
//! assert!((trace.final_point - dvector![1.0, 1.0]).norm() < 1e-3);
//! ```
//!
//! The [`problems`] module ships the benchmark instances (an oligopolistic
//! electricity-market model and the quasimonotone VI above), [`verify`]
//! re-checks recorded runs against the method's invariants, and the `minty`
//! command-line tool drives parameter sweeps over all of it.

pub mod linesearch;
pub mod model;
pub mod problems;
pub mod projection;
pub mod solver;
pub mod subproblem;
pub mod trace;
pub mod verify;

pub use linesearch::{armijo_linesearch, segment_point, LinesearchHit, LinesearchMode};
pub use model::{
    vi_as_ep, EpOracle, FeasibleBox, HalfSpace, ModelError, Oracle, ProblemInstance, ProxSplit,
    ViOracle,
};
pub use projection::{
    brute_force_projection, project_box, project_halfspace, project_intersection,
    ProjectionError, ProjectionResult,
};
pub use solver::{
    build_cut, build_w_cut, solve_ep, solve_vi, termination_value, BetaSchedule, SolveError,
    SolverConfig, TerminationRule, TerminationVariant,
};
pub use subproblem::{
    prox_separable_1d, solve_subproblem, subproblem_residual, QuadraticBranch, SubproblemError,
    SubproblemResult,
};
pub use trace::{IterateRecord, RunStatus, RunTrace};
pub use verify::{verify_invariants, CheckStatus, InvariantReport};

// The guide chapters double as doctests so their snippets stay compilable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/equilibrium-problems.md")]
    mod equilibrium_problems {}
    #[doc = include_str!("../../../book/src/projections.md")]
    mod projections {}
    #[doc = include_str!("../../../book/src/subproblem.md")]
    mod subproblem {}
    #[doc = include_str!("../../../book/src/outer-loop.md")]
    mod outer_loop {}
    #[doc = include_str!("../../../book/src/benchmark-problems.md")]
    mod benchmark_problems {}
    #[doc = include_str!("../../../book/src/traces-and-verification.md")]
    mod traces_and_verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
