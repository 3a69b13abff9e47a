//! Backtracking linesearch along the segment from `x` to the subproblem
//! solution `y`: find the smallest positive integer `m` such that
//! `z = (1 - theta^m) x + theta^m y` satisfies a sufficient-decrease
//! inequality on the bifunction.

use nalgebra::DVector;
use thiserror::Error;

use crate::model::EpOracle;

/// Which sufficient-decrease inequality the search enforces. The two modes
/// differ only in the right-hand side: the equilibrium form uses
/// `-(delta * beta / 2) ||x - y||^2`, the VI form `-(delta / (2 beta)) ||x - y||^2`.
/// They are implemented exactly as stated, not unified, because the scaling
/// genuinely differs between the two outer algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinesearchMode {
    Ep,
    Vi,
}

/// A step accepted by the linesearch.
#[derive(Debug, Clone)]
pub struct LinesearchHit {
    /// Smallest exponent satisfying the inequality (`m >= 1`).
    pub m: u32,
    /// `theta^m` exactly as used to form `z`.
    pub theta_k: f64,
    pub z: DVector<f64>,
    /// Achieved left-hand side `f(z, y)`.
    pub lhs: f64,
    /// Right-hand side the step had to beat.
    pub rhs: f64,
}

/// Exceeding the exponent cap signals numerical breakdown (or `x ~ y`);
/// a finite `m` always exists in exact arithmetic.
#[derive(Debug, Error)]
#[error("no linesearch exponent m <= {max_m} satisfied the inequality (||x - y|| = {dist:.3e})")]
pub struct LinesearchFailure {
    pub max_m: u32,
    pub dist: f64,
}

/// The convex combination `(1 - t) x + t y`, evaluated coordinatewise.
/// Trace verification recomputes `z` through this same function, so the
/// reconstruction is bit-exact.
pub fn segment_point(x: &DVector<f64>, y: &DVector<f64>, t: f64) -> DVector<f64> {
    x.zip_map(y, |a, b| (1.0 - t) * a + t * b)
}

/// Right-hand side of the sufficient-decrease inequality.
pub fn linesearch_rhs(mode: LinesearchMode, beta: f64, delta: f64, dist_squared: f64) -> f64 {
    match mode {
        LinesearchMode::Ep => -(delta * beta / 2.0) * dist_squared,
        LinesearchMode::Vi => -(delta / (2.0 * beta)) * dist_squared,
    }
}

/// Finds the smallest `m >= 1` with `f(z_m, y) <= rhs` where
/// `z_m = (1 - theta^m) x + theta^m y`.
///
/// In VI mode the oracle is the wrapped operator bifunction, for which
/// `f(z, y) = <F(z), y - z>`, so a single evaluation path serves both modes.
#[allow(clippy::too_many_arguments)]
pub fn armijo_linesearch(
    oracle: &dyn EpOracle,
    x: &DVector<f64>,
    y: &DVector<f64>,
    beta: f64,
    theta: f64,
    delta: f64,
    mode: LinesearchMode,
    max_m: u32,
) -> Result<LinesearchHit, LinesearchFailure> {
    debug_assert!(theta > 0.0 && theta < 1.0);
    debug_assert!(delta > 0.0 && delta < 1.0);
    let dist_squared = (x - y).norm_squared();
    let rhs = linesearch_rhs(mode, beta, delta, dist_squared);
    for m in 1..=max_m {
        let theta_k = theta.powi(m as i32);
        let z = segment_point(x, y, theta_k);
        let lhs = oracle.eval(&z, y);
        if lhs <= rhs {
            return Ok(LinesearchHit {
                m,
                theta_k,
                z,
                lhs,
                rhs,
            });
        }
    }
    Err(LinesearchFailure {
        max_m,
        dist: dist_squared.sqrt(),
    })
}
