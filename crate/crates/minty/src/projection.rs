//! Metric projections onto boxes, half-spaces, and intersections
//! `box ∩ H_0 ∩ ... ∩ H_k ∩ W(x^k)`.
//!
//! The intersection projection is a least-distance problem over a
//! polyhedron: box faces and cuts become rows of one constraint system. A
//! dense primal-dual interior-point solve handles the system — it never
//! branches on which constraints bind, so the hundreds of near-parallel
//! cuts the outer algorithms accumulate as they converge (the regime where
//! cyclic and active-set schemes stall or cycle) cost it nothing — and an
//! exact equality re-solve on the identified active rows then lands on the
//! Karush–Kuhn–Tucker point, certifying global optimality of the returned
//! projection.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{FeasibleBox, HalfSpace};

#[derive(Debug, Error)]
pub enum ProjectionError {
    /// The solve exhausted its iteration budget (or stalled) before
    /// reaching a feasible KKT point; carries the best point found and its
    /// worst constraint violation. Usually means the intersection is
    /// numerically empty or the tolerance is too tight.
    #[error(
        "intersection projection did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    NonConvergence {
        best: DVector<f64>,
        residual: f64,
        iterations: usize,
    },
    /// No feasible point exists.
    #[error("the box/half-space intersection is empty")]
    Infeasible,
}

/// Outcome of an intersection projection.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub point: DVector<f64>,
    /// Barrier iterations spent.
    pub iterations: usize,
    /// Worst constraint violation of `point` over the box and all cuts.
    pub residual: f64,
}

/// Projects onto a box: coordinatewise clamp.
pub fn project_box(bounds: &FeasibleBox, x: &DVector<f64>) -> DVector<f64> {
    assert_eq!(bounds.dim(), x.len(), "projection dimension mismatch");
    bounds.clamp(x)
}

/// Projects onto a half-space: `x - max(0, <g, x - z>) / ||g||^2 * g`.
///
/// A whole-space cut (zero normal) projects to `x` itself.
pub fn project_halfspace(h: &HalfSpace, x: &DVector<f64>) -> DVector<f64> {
    assert_eq!(h.dim(), x.len(), "projection dimension mismatch");
    if h.is_whole_space() {
        return x.clone();
    }
    let excess = h.excess(x);
    if excess <= 0.0 {
        return x.clone();
    }
    x - &h.normal * (excess / h.normal.norm_squared())
}

/// Projects `x` onto `bounds ∩ cuts[0] ∩ ... ∩ cuts[m-1]`.
///
/// The returned point is feasible within `tol` (geometric distance) for
/// every constraint and carries a KKT certificate of optimality. `max_iter`
/// caps the barrier iterations.
pub fn project_intersection(
    bounds: &FeasibleBox,
    cuts: &[HalfSpace],
    x: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<ProjectionResult, ProjectionError> {
    assert!(tol > 0.0, "projection tolerance must be positive");
    assert_eq!(bounds.dim(), x.len(), "projection dimension mismatch");
    let n = bounds.dim();

    // Unit-normal constraint rows <row, p> <= rhs: box faces first, cuts after.
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(2 * n + cuts.len());
    let mut rhs: Vec<f64> = Vec::with_capacity(2 * n + cuts.len());
    for j in 0..n {
        let mut up = DVector::zeros(n);
        up[j] = 1.0;
        rows.push(up);
        rhs.push(bounds.upper()[j]);
        let mut down = DVector::zeros(n);
        down[j] = -1.0;
        rows.push(down);
        rhs.push(-bounds.lower()[j]);
    }
    for cut in cuts {
        if cut.is_whole_space() {
            continue;
        }
        let scale = cut.normal.norm();
        rows.push(&cut.normal / scale);
        rhs.push(cut.normal.dot(&cut.anchor) / scale);
    }

    // Shift to u = p - x: minimize ||u|| subject to <row, u> <= rhs - <row, x>.
    let slack: Vec<f64> = rows
        .iter()
        .zip(&rhs)
        .map(|(row, &b)| b - row.dot(x))
        .collect();
    if slack.iter().all(|&s| s >= 0.0) {
        // Already feasible: the projection is the identity.
        return Ok(ProjectionResult {
            point: x.clone(),
            iterations: 0,
            residual: 0.0,
        });
    }

    // Rescale so the displacement is O(1); slack magnitudes bound it.
    let scale = slack.iter().fold(1.0f64, |acc, s| acc.max(s.abs()));
    let m = rows.len();
    let scaled_slack: Vec<f64> = slack.iter().map(|s| s / scale).collect();

    let ipm = interior_point_least_distance(&rows, &scaled_slack, tol / scale, max_iter);
    let worst = |p: &DVector<f64>| -> f64 {
        cuts.iter()
            .map(|c| c.violation(p))
            .fold(bounds.violation(p), f64::max)
    };
    let raw_point = x + &ipm.displacement * scale;

    // Polish: re-solve the projection as an equality-constrained problem on
    // the near-active rows. Activity is judged geometrically at the barrier
    // solve's primal point (its multipliers can stay degenerate when many
    // cuts are near-parallel, but the point itself is reliable); the
    // multiplier sign loop inside the polish prunes over-included rows.
    // The polished point is accepted on its own evidence, so a barrier
    // solve that stalled close to the solution still yields an exact,
    // KKT-certified projection.
    let activity_band = 1e-7 * scale;
    let mut active: Vec<usize> = (0..m)
        .filter(|&i| rows[i].dot(&raw_point) - rhs[i] >= -activity_band)
        .collect();
    for i in 0..m {
        if ipm.slacks[i] < ipm.multipliers[i] && !active.contains(&i) {
            active.push(i);
        }
    }
    let polished = polish_on_active(&rows, &rhs, x, &active);
    if let Some(p) = polished {
        let residual = worst(&p);
        if residual <= tol {
            return Ok(ProjectionResult {
                point: p,
                iterations: ipm.iterations,
                residual,
            });
        }
    }
    let residual = worst(&raw_point);
    if ipm.converged && residual <= tol {
        return Ok(ProjectionResult {
            point: raw_point,
            iterations: ipm.iterations,
            residual,
        });
    }
    Err(ProjectionError::NonConvergence {
        best: raw_point,
        residual,
        iterations: ipm.iterations,
    })
}

/// Equality-constrained least-distance solve on a candidate active set,
/// with the Karush-Kuhn-Tucker sign condition enforced: drops rows whose
/// multiplier comes out negative and re-solves, returning the point once
/// all multipliers are nonnegative.
fn polish_on_active(
    rows: &[DVector<f64>],
    rhs: &[f64],
    x: &DVector<f64>,
    active: &[usize],
) -> Option<DVector<f64>> {
    let n = x.len();
    let mut working: Vec<usize> = active.to_vec();
    for _ in 0..=active.len() {
        if working.is_empty() {
            return Some(x.clone());
        }
        let k = working.len();
        let n_a = DMatrix::from_fn(k, n, |r, c| rows[working[r]][c]);
        let c_a = DVector::from_fn(k, |r, _| rhs[working[r]]);
        let gram = &n_a * n_a.transpose();
        let resid = &n_a * x - c_a;
        let multipliers = gram.svd(true, true).solve(&resid, 1e-13).ok()?;
        // Tolerate slightly negative multipliers from near-dependent rows.
        let floor = -1e-9 * multipliers.amax().max(1.0);
        match (0..k).find(|&r| multipliers[r] < floor) {
            None => return Some(x - n_a.transpose() * multipliers),
            Some(drop) => {
                working.remove(drop);
            }
        }
    }
    None
}

struct IpmOutcome {
    /// Scaled displacement from the anchor.
    displacement: DVector<f64>,
    slacks: Vec<f64>,
    multipliers: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Dense primal-dual interior-point solve of the least-distance problem
/// `min 1/2 ||v||^2  s.t.  <row_i, v> <= c_i` (unit-normal rows, data O(1)).
///
/// A Mehrotra predictor-corrector with a single combined step length; each
/// iteration factors the tiny n-by-n normal-equations matrix. Unlike
/// active-set schemes, nothing here branches on which of the many
/// near-parallel constraints bind, so accumulating nearly identical cuts
/// cannot stall the solve.
fn interior_point_least_distance(
    rows: &[DVector<f64>],
    c: &[f64],
    feas_tol: f64,
    max_iter: usize,
) -> IpmOutcome {
    let n = rows[0].len();
    let m = rows.len();
    let nmat = DMatrix::from_fn(m, n, |r, j| rows[r][j]);
    let c = DVector::from_vec(c.to_vec());

    let mut v = DVector::<f64>::zeros(n);
    let mut s = DVector::from_fn(m, |i, _| c[i].abs().max(1.0));
    let mut lambda = DVector::from_element(m, 1.0);

    let feas_tol = feas_tol.max(1e-13);
    let max_iter = max_iter.min(200);
    let target = |lambda_max: f64| {
        (
            feas_tol,
            1e-10 * (1.0 + lambda_max),
            1e-12 * (1.0 + lambda_max),
        )
    };

    let mut iterations = 0usize;
    while iterations < max_iter {
        iterations += 1;
        let r_d = &v + nmat.transpose() * &lambda;
        let r_p = &nmat * &v + &s - &c;
        let mu = s.dot(&lambda) / m as f64;
        let (tp, td, tg) = target(lambda.amax());
        if r_p.amax() <= tp && r_d.amax() <= td && mu <= tg {
            break;
        }

        // Normal-equations matrix I + N^T diag(lambda/s) N, SPD.
        let d = DVector::from_fn(m, |i, _| lambda[i] / s[i]);
        let mut normal = DMatrix::<f64>::identity(n, n);
        for i in 0..m {
            let li = d[i];
            for a in 0..n {
                let na = nmat[(i, a)];
                if na == 0.0 {
                    continue;
                }
                for b in 0..n {
                    normal[(a, b)] += li * na * nmat[(i, b)];
                }
            }
        }
        let chol = match normal.clone().cholesky().or_else(|| {
            // Extreme barrier weights can push rounding past positive
            // definiteness; a relative diagonal bump restores it.
            let bump = 1e-12 * (0..n).map(|j| normal[(j, j)]).fold(0.0f64, f64::max);
            let mut regularized = normal.clone();
            for j in 0..n {
                regularized[(j, j)] += bump;
            }
            regularized.cholesky()
        }) {
            Some(c) => c,
            None => break,
        };
        let solve_step = |s_inv_rc: &DVector<f64>| -> (DVector<f64>, DVector<f64>, DVector<f64>) {
            let mut rhs = -&r_d;
            for i in 0..m {
                let w = s_inv_rc[i] + d[i] * r_p[i];
                for a in 0..n {
                    rhs[a] -= nmat[(i, a)] * w;
                }
            }
            let dv = chol.solve(&rhs);
            let ds = -&r_p - &nmat * &dv;
            let dl = DVector::from_fn(m, |i, _| s_inv_rc[i] - d[i] * ds[i]);
            (dv, ds, dl)
        };
        let max_step = |z: &DVector<f64>, dz: &DVector<f64>| -> f64 {
            let mut alpha = 1.0f64;
            for i in 0..m {
                if dz[i] < 0.0 {
                    alpha = alpha.min(-z[i] / dz[i]);
                }
            }
            alpha
        };

        // Predictor (affine scaling).
        let s_inv_rc_aff = DVector::from_fn(m, |i, _| -lambda[i]);
        let (_dv_aff, ds_aff, dl_aff) = solve_step(&s_inv_rc_aff);
        let alpha_aff = max_step(&s, &ds_aff).min(max_step(&lambda, &dl_aff));
        let mu_aff = (0..m)
            .map(|i| (s[i] + alpha_aff * ds_aff[i]) * (lambda[i] + alpha_aff * dl_aff[i]))
            .sum::<f64>()
            / m as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 1.0);

        // Corrector.
        let s_inv_rc = DVector::from_fn(m, |i, _| {
            (sigma * mu - ds_aff[i] * dl_aff[i]) / s[i] - lambda[i]
        });
        let (dv, ds, dl) = solve_step(&s_inv_rc);
        let alpha = 0.995 * max_step(&s, &ds).min(max_step(&lambda, &dl));
        let alpha = alpha.min(1.0);
        if alpha <= 1e-12 {
            break;
        }
        v += &dv * alpha;
        s += &ds * alpha;
        lambda += &dl * alpha;
    }

    // Grade the endpoint: the caller treats a converged raw point as an
    // acceptable projection, so the dual residual and gap must be small
    // relative to the multiplier scale.
    let r_d = &v + nmat.transpose() * &lambda;
    let r_p = &nmat * &v + &s - &c;
    let mu = s.dot(&lambda) / m as f64;
    let (tp, td, tg) = target(lambda.amax());
    let converged = r_p.amax() <= tp && r_d.amax() <= td && mu <= tg;

    IpmOutcome {
        displacement: v,
        slacks: s.iter().cloned().collect(),
        multipliers: lambda.iter().cloned().collect(),
        iterations,
        converged,
    }
}

/// Exact projection onto `bounds ∩ cuts` by active-set enumeration.
///
/// Independent test oracle for [`project_intersection`]: every combination
/// of box faces and cut boundaries is tried as an equality-constrained
/// least-squares problem, infeasible candidates are discarded, and the
/// nearest survivor is returned. Cost grows as `3^n * 2^m`, hence the
/// dimension limits.
///
/// Panics if `bounds.dim() > 3` or `cuts.len() > 3` (contract violation).
pub fn brute_force_projection(
    bounds: &FeasibleBox,
    cuts: &[HalfSpace],
    x: &DVector<f64>,
) -> Result<DVector<f64>, ProjectionError> {
    let n = bounds.dim();
    assert!(n <= 3, "enumeration oracle supports dimension <= 3");
    assert!(cuts.len() <= 3, "enumeration oracle supports at most 3 cuts");
    assert_eq!(n, x.len(), "projection dimension mismatch");

    const FEAS_TOL: f64 = 1e-9;
    let m = cuts.len();
    let mut best: Option<(f64, DVector<f64>)> = None;

    // Coordinate states: 0 free, 1 at lower face, 2 at upper face.
    let mut face_state = vec![0u8; n];
    loop {
        for active_mask in 0..(1usize << m) {
            let mut rows: Vec<DVector<f64>> = Vec::new();
            let mut rhs: Vec<f64> = Vec::new();
            for (j, &state) in face_state.iter().enumerate() {
                if state != 0 {
                    let mut row = DVector::zeros(n);
                    row[j] = 1.0;
                    rows.push(row);
                    rhs.push(if state == 1 {
                        bounds.lower()[j]
                    } else {
                        bounds.upper()[j]
                    });
                }
            }
            for (i, cut) in cuts.iter().enumerate() {
                if active_mask & (1 << i) != 0 {
                    if cut.is_whole_space() {
                        continue;
                    }
                    rows.push(cut.normal.clone());
                    rhs.push(cut.normal.dot(&cut.anchor));
                }
            }

            let candidate = if rows.is_empty() {
                x.clone()
            } else {
                // min ||p - x||^2 s.t. A p = b  =>  p = x - A^T (A A^T)^+ (A x - b).
                let k = rows.len();
                let a = DMatrix::from_fn(k, n, |r, c| rows[r][c]);
                let b = DVector::from_vec(rhs);
                let gram = &a * a.transpose();
                let resid = &a * x - b;
                match gram.svd(true, true).solve(&resid, 1e-12) {
                    Ok(multipliers) => x - a.transpose() * multipliers,
                    Err(_) => continue,
                }
            };

            let feasible = bounds.violation(&candidate) <= FEAS_TOL
                && cuts.iter().all(|c| c.violation(&candidate) <= FEAS_TOL);
            if feasible {
                let dist = (&candidate - x).norm_squared();
                if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                    best = Some((dist, candidate));
                }
            }
        }

        // Advance the mixed-radix face counter.
        let mut j = 0;
        loop {
            if j == n {
                return best.map(|(_, p)| p).ok_or(ProjectionError::Infeasible);
            }
            face_state[j] += 1;
            if face_state[j] < 3 {
                break;
            }
            face_state[j] = 0;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use proptest::prelude::*;

    fn unit2() -> FeasibleBox {
        FeasibleBox::unit(2)
    }

    #[test]
    fn halfspace_projection_cases() {
        let h = HalfSpace::new(dvector![1.0, 0.0], dvector![0.0, 0.0]);
        assert_eq!(project_halfspace(&h, &dvector![1.0, 1.0]), dvector![0.0, 1.0]);
        assert_eq!(project_halfspace(&h, &dvector![-1.0, 1.0]), dvector![-1.0, 1.0]);

        let diag = HalfSpace::new(dvector![1.0, 1.0], dvector![0.0, 0.0]);
        let p = project_halfspace(&diag, &dvector![1.0, 1.0]);
        assert_abs_diff_eq!(p, dvector![0.0, 0.0], epsilon = 1e-15);
    }

    #[test]
    fn intersection_without_cuts_is_box_projection() {
        let r = project_intersection(&unit2(), &[], &dvector![2.0, -1.0], 1e-10, 1000).unwrap();
        assert_abs_diff_eq!(r.point, dvector![1.0, 0.0], epsilon = 1e-14);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn intersection_is_identity_inside_all_sets() {
        let cut = HalfSpace::new(dvector![1.0, 1.0], dvector![0.5, 0.5]);
        let x = dvector![0.2, 0.3];
        let r = project_intersection(&unit2(), &[cut], &x, 1e-10, 1000).unwrap();
        assert_eq!(r.point, x);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn corner_projects_onto_diagonal_cut() {
        // box [0,1]^2, cut x1 + x2 <= 1, projecting (1,1) -> (0.5, 0.5).
        let cut = HalfSpace::new(dvector![1.0, 1.0], dvector![0.5, 0.5]);
        let r = project_intersection(&unit2(), &[cut], &dvector![1.0, 1.0], 1e-10, 10_000).unwrap();
        assert_abs_diff_eq!(r.point, dvector![0.5, 0.5], epsilon = 1e-6);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn whole_space_cuts_are_inert() {
        let cuts = vec![HalfSpace::whole_space(2)];
        let r = project_intersection(&unit2(), &cuts, &dvector![2.0, 0.5], 1e-10, 1000).unwrap();
        assert_abs_diff_eq!(r.point, dvector![1.0, 0.5], epsilon = 1e-14);
    }

    #[test]
    fn near_parallel_cuts_are_handled() {
        // The regime that breaks cyclic projection schemes: two cuts whose
        // boundaries are almost tangent near (1, 1).
        let g1 = dvector![-0.4936, -0.5064];
        let g2 = dvector![-0.4999, -0.5001];
        let cuts = vec![
            HalfSpace::new(g1, dvector![0.9999, 0.99985]),
            HalfSpace::new(g2, dvector![0.99995, 0.99992]),
        ];
        let r = project_intersection(&unit2(), &cuts, &dvector![0.0, 0.0], 1e-10, 10_000).unwrap();
        assert!(r.residual <= 1e-10);
        // KKT certificate: the point is a projection, so moving toward the
        // anchor violates some constraint.
        assert!((r.point[0] - 1.0).abs() < 2e-4 || (r.point[1] - 1.0).abs() < 2e-4);
    }

    #[test]
    fn brute_force_single_active_face() {
        let cut = HalfSpace::new(dvector![1.0, 0.0], dvector![0.25, 0.0]);
        let p = brute_force_projection(&unit2(), &[cut], &dvector![1.0, 0.5]).unwrap();
        assert_abs_diff_eq!(p, dvector![0.25, 0.5], epsilon = 1e-12);
    }

    #[test]
    fn brute_force_matches_clamp_without_cuts() {
        let p = brute_force_projection(&unit2(), &[], &dvector![-3.0, 0.7]).unwrap();
        assert_eq!(p, dvector![0.0, 0.7]);
    }

    #[test]
    fn brute_force_reports_empty_intersection() {
        // x1 <= -1 cannot meet the unit box.
        let cut = HalfSpace::new(dvector![1.0, 0.0], dvector![-1.0, 0.0]);
        let err = brute_force_projection(&unit2(), &[cut], &dvector![0.5, 0.5]).unwrap_err();
        assert!(matches!(err, ProjectionError::Infeasible));
    }

    #[test]
    fn nonconvergence_carries_best_point_and_residual() {
        // Contradictory cuts leave nothing to converge to; the error reports
        // the best point reached and how badly it violates the system.
        let cuts = vec![
            HalfSpace::new(dvector![1.0, 0.0], dvector![-1.0, 0.0]),
            HalfSpace::new(dvector![-1.0, 0.0], dvector![2.0, 0.0]),
        ];
        let err =
            project_intersection(&unit2(), &cuts, &dvector![0.5, 0.5], 1e-10, 50).unwrap_err();
        match err {
            ProjectionError::NonConvergence { best, residual, iterations } => {
                assert_eq!(best.len(), 2);
                assert!(residual > 1.0);
                assert!(iterations >= 1);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn infeasible_intersection_is_nonconvergence() {
        // Contradictory cuts: x1 <= -1 and x1 >= 2 (normal -1, anchor 2).
        let cuts = vec![
            HalfSpace::new(dvector![1.0, 0.0], dvector![-1.0, 0.0]),
            HalfSpace::new(dvector![-1.0, 0.0], dvector![2.0, 0.0]),
        ];
        let err = project_intersection(&unit2(), &cuts, &dvector![0.5, 0.5], 1e-10, 10_000)
            .unwrap_err();
        assert!(matches!(err, ProjectionError::NonConvergence { .. }));
    }

    prop_compose! {
        fn arb_point()(a in -2.0f64..3.0, b in -2.0f64..3.0) -> DVector<f64> {
            dvector![a, b]
        }
    }

    fn sample_projectors() -> (FeasibleBox, HalfSpace) {
        (
            unit2(),
            HalfSpace::new(dvector![1.0, 1.0], dvector![0.5, 0.5]),
        )
    }

    proptest! {
        // Variational characterization: <x - p, y - p> <= 0 for all feasible
        // y, for each closed-form projector.
        #[test]
        fn projection_variational_inequality(x in arb_point(), y in arb_point()) {
            let (bounds, cut) = sample_projectors();
            let yb = bounds.clamp(&y);
            let pb = project_box(&bounds, &x);
            prop_assert!((&x - &pb).dot(&(&yb - &pb)) <= 1e-12);

            let ph = project_halfspace(&cut, &x);
            let yh = project_halfspace(&cut, &y);
            prop_assert!((&x - &ph).dot(&(&yh - &ph)) <= 1e-12);
        }

        #[test]
        fn projection_nonexpansive_and_idempotent(x in arb_point(), y in arb_point()) {
            let (bounds, cut) = sample_projectors();
            let px = project_box(&bounds, &x);
            let py = project_box(&bounds, &y);
            prop_assert!((&px - &py).norm() <= (&x - &y).norm() + 1e-12);
            prop_assert_eq!(project_box(&bounds, &px.clone()), px);

            let hx = project_halfspace(&cut, &x);
            let hy = project_halfspace(&cut, &y);
            prop_assert!((&hx - &hy).norm() <= (&x - &y).norm() + 1e-12);
            prop_assert!((project_halfspace(&cut, &hx.clone()) - &hx).norm() <= 1e-12);
        }

        // The intersection projector agrees with the enumeration oracle and
        // behaves like a metric projection: variational inequality against
        // feasible probes, nonexpansive, idempotent.
        #[test]
        fn intersection_matches_enumeration(x in arb_point(), y in arb_point()) {
            let (bounds, cut) = sample_projectors();
            let cuts = vec![cut];
            let exact = brute_force_projection(&bounds, &cuts, &x).unwrap();
            let iter = project_intersection(&bounds, &cuts, &x, 1e-10, 100_000).unwrap();
            prop_assert!((&exact - &iter.point).norm() <= 1e-6);

            let probe = project_intersection(&bounds, &cuts, &y, 1e-10, 100_000).unwrap();
            prop_assert!((&x - &iter.point).dot(&(&probe.point - &iter.point)) <= 1e-6);
            prop_assert!(
                (&iter.point - &probe.point).norm() <= (&x - &y).norm() + 2e-10
            );

            let again = project_intersection(&bounds, &cuts, &iter.point, 1e-10, 100_000).unwrap();
            prop_assert!((&again.point - &iter.point).norm() <= 1e-10);
        }
    }
}
