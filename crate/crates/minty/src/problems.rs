//! Benchmark problem instances: an oligopolistic electricity-market
//! equilibrium model, a quasimonotone variational inequality on the unit
//! square, and synthetic affine VIs with independently known solutions.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::model::{
    check_finite, EpOracle, FeasibleBox, ModelError, Oracle, ProblemInstance, ProxSplit, ViFn,
    ViOracle,
};
use crate::subproblem::{prox_separable_1d, QuadraticBranch};

/// Number of generating units in the market model.
pub const UNITS: usize = 6;
/// Number of companies.
pub const COMPANIES: usize = 3;

/// Price intercept used in the profit report, as printed in the model
/// description: `p(sigma) = 378.4 - 2 sigma`.
pub const PROFIT_PRICE_INTERCEPT: f64 = 378.4;

/// Cost parameters of one generating unit. The unit's cost is the maximum
/// of two convex branches,
/// `c0(t) = (alpha0/2) t^2 + beta0 t + gamma0` and
/// `c1(t) = alpha1 t + (beta1/(beta1+1)) gamma1^(-1/beta1) t^((beta1+1)/beta1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostRow {
    pub alpha0: f64,
    pub beta0: f64,
    pub gamma0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub gamma1: f64,
}

/// Full parameter set of the market equilibrium model. The defaults carry
/// the standard six-unit, three-company data set.
#[derive(Debug, Clone, PartialEq)]
pub struct NashCournotParams {
    pub cost: [CostRow; UNITS],
    /// Generator output bounds; these define the feasible box.
    pub unit_lower: [f64; UNITS],
    pub unit_upper: [f64; UNITS],
    /// Aggregate company bounds. Stored for reporting; the feasible set of
    /// the model uses only the generator bounds.
    pub company_lower: [f64; COMPANIES],
    pub company_upper: [f64; COMPANIES],
    /// Zero-based company index of each unit.
    pub company_of_unit: [usize; UNITS],
    /// Intercept of the linear model term: the linear coefficient vector is
    /// `-price_intercept` in every coordinate. Note this is 387.4 while the
    /// profit report's price function is printed with 378.4; both values are
    /// kept exactly as given, and this one is a field so the other
    /// convention is one assignment away.
    pub price_intercept: f64,
}

impl Default for NashCournotParams {
    fn default() -> Self {
        let r = |alpha0, beta0, gamma0, alpha1, beta1, gamma1| CostRow {
            alpha0,
            beta0,
            gamma0,
            alpha1,
            beta1,
            gamma1,
        };
        NashCournotParams {
            cost: [
                r(0.0400, 2.00, 0.00, 2.00, 1.00, 25.0000),
                r(0.0350, 1.75, 0.00, 1.75, 1.00, 28.5714),
                r(0.1250, 1.00, 0.00, 1.00, 1.00, 8.0000),
                r(0.0116, 3.25, 0.00, 3.25, 1.00, 86.2069),
                r(0.0500, 3.00, 0.00, 3.00, 1.00, 20.0000),
                r(0.0500, 3.00, 0.00, 3.00, 1.00, 20.0000),
            ],
            unit_lower: [0.0; UNITS],
            unit_upper: [80.0, 80.0, 50.0, 55.0, 30.0, 40.0],
            company_lower: [0.0; COMPANIES],
            company_upper: [80.0, 130.0, 125.0],
            company_of_unit: [0, 1, 1, 2, 2, 2],
            price_intercept: 387.4,
        }
    }
}

impl NashCournotParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (j, row) in self.cost.iter().enumerate() {
            if row.alpha0 < 0.0 || row.gamma1 <= 0.0 || row.beta1 <= 0.0 {
                return Err(ModelError::InvalidParams(format!(
                    "unit {} cost row is not convex",
                    j + 1
                )));
            }
        }
        for j in 0..UNITS {
            if self.unit_lower[j] > self.unit_upper[j] {
                return Err(ModelError::InvalidParams(format!(
                    "unit {} bounds are crossed",
                    j + 1
                )));
            }
            if self.company_of_unit[j] >= COMPANIES {
                return Err(ModelError::InvalidParams(format!(
                    "unit {} assigned to unknown company",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Generation cost of unit `j` (zero-based) at output `t`: the larger of
    /// the two branches.
    pub fn unit_cost(&self, j: usize, t: f64) -> f64 {
        let (c0, c1) = self.branch_values(j, t);
        c0.max(c1)
    }

    /// Derivative of the active cost branch; branch 0 wins exact ties so
    /// repeated calls are identical.
    pub fn unit_cost_derivative(&self, j: usize, t: f64) -> f64 {
        let row = &self.cost[j];
        let (c0, c1) = self.branch_values(j, t);
        if c0 >= c1 {
            row.alpha0 * t + row.beta0
        } else if row.beta1 == 1.0 {
            row.alpha1 + t / row.gamma1
        } else {
            row.alpha1 + row.gamma1.powf(-1.0 / row.beta1) * t.powf(1.0 / row.beta1)
        }
    }

    fn branch_values(&self, j: usize, t: f64) -> (f64, f64) {
        let row = &self.cost[j];
        let c0 = (0.5 * row.alpha0 * t + row.beta0) * t + row.gamma0;
        let c1 = if row.beta1 == 1.0 {
            (0.5 / row.gamma1 * t + row.alpha1) * t
        } else {
            let expo = (row.beta1 + 1.0) / row.beta1;
            row.alpha1 * t + row.beta1 / (row.beta1 + 1.0) * row.gamma1.powf(-1.0 / row.beta1) * t.powf(expo)
        };
        (c0, c1)
    }

    /// Both cost branches as quadratics; only valid when `beta1 == 1`.
    fn quadratic_branches(&self, j: usize) -> Option<(QuadraticBranch, QuadraticBranch)> {
        let row = &self.cost[j];
        if row.beta1 != 1.0 {
            return None;
        }
        Some((
            QuadraticBranch::new(0.5 * row.alpha0, row.beta0, row.gamma0),
            QuadraticBranch::new(0.5 / row.gamma1, row.alpha1, 0.0),
        ))
    }

    /// Company indicator vectors `q^i` (1 on the company's units).
    pub fn company_indicators(&self) -> [DVector<f64>; COMPANIES] {
        let mut q = [(); COMPANIES].map(|_| DVector::zeros(UNITS));
        for (j, &c) in self.company_of_unit.iter().enumerate() {
            q[c][j] = 1.0;
        }
        q
    }

    /// Per-company profits at output vector `x`, with the affine price
    /// `p(sigma) = 378.4 - 2 sigma`.
    pub fn company_profits(&self, x: &DVector<f64>) -> [f64; COMPANIES] {
        assert_eq!(x.len(), UNITS, "output vector must have one entry per unit");
        let sigma: f64 = x.iter().sum();
        let price = PROFIT_PRICE_INTERCEPT - 2.0 * sigma;
        let mut profits = [0.0; COMPANIES];
        for j in 0..UNITS {
            profits[self.company_of_unit[j]] += price * x[j] - x[j] * self.unit_cost(j, x[j]);
        }
        profits
    }

    /// Loads parameters from a plain-text table (see the module docs of the
    /// file format in the guide). Missing entries keep their defaults.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_table_str(&text)
    }

    /// Parses the key-value table format:
    ///
    /// ```text
    /// cost <unit> <alpha0> <beta0> <gamma0> <alpha1> <beta1> <gamma1>
    /// unit <unit> <company> <min> <max>
    /// company <company> <min> <max>
    /// price_intercept <value>
    /// ```
    pub fn from_table_str(text: &str) -> Result<Self, ModelError> {
        let mut params = NashCournotParams::default();
        let bad = |line: usize, msg: &str| {
            ModelError::InvalidParams(format!("parameter table line {line}: {msg}"))
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split_whitespace();
            let key = parts.next().unwrap();
            let fields: Vec<f64> = parts
                .map(|p| p.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(line, "expected numeric fields"))?;
            match key {
                "cost" => {
                    if fields.len() != 7 {
                        return Err(bad(line, "cost rows take unit + 6 coefficients"));
                    }
                    let j = unit_index(fields[0]).ok_or_else(|| bad(line, "bad unit index"))?;
                    params.cost[j] = CostRow {
                        alpha0: fields[1],
                        beta0: fields[2],
                        gamma0: fields[3],
                        alpha1: fields[4],
                        beta1: fields[5],
                        gamma1: fields[6],
                    };
                }
                "unit" => {
                    if fields.len() != 4 {
                        return Err(bad(line, "unit rows take unit, company, min, max"));
                    }
                    let j = unit_index(fields[0]).ok_or_else(|| bad(line, "bad unit index"))?;
                    let c = (fields[1] as usize).checked_sub(1).filter(|&c| c < COMPANIES);
                    params.company_of_unit[j] = c.ok_or_else(|| bad(line, "bad company index"))?;
                    params.unit_lower[j] = fields[2];
                    params.unit_upper[j] = fields[3];
                }
                "company" => {
                    if fields.len() != 3 {
                        return Err(bad(line, "company rows take company, min, max"));
                    }
                    let c = (fields[0] as usize).checked_sub(1).filter(|&c| c < COMPANIES);
                    let c = c.ok_or_else(|| bad(line, "bad company index"))?;
                    params.company_lower[c] = fields[1];
                    params.company_upper[c] = fields[2];
                }
                "price_intercept" => {
                    if fields.len() != 1 {
                        return Err(bad(line, "price_intercept takes one value"));
                    }
                    params.price_intercept = fields[0];
                }
                other => return Err(bad(line, &format!("unknown key `{other}`"))),
            }
        }
        params.validate()?;
        Ok(params)
    }

    /// Renders the parameters in the same table format `from_table_str`
    /// accepts.
    pub fn to_table_string(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "# cost <unit> <alpha0> <beta0> <gamma0> <alpha1> <beta1> <gamma1>").unwrap();
        for (j, r) in self.cost.iter().enumerate() {
            writeln!(
                s,
                "cost {} {} {} {} {} {} {}",
                j + 1,
                r.alpha0,
                r.beta0,
                r.gamma0,
                r.alpha1,
                r.beta1,
                r.gamma1
            )
            .unwrap();
        }
        writeln!(s, "# unit <unit> <company> <min> <max>").unwrap();
        for j in 0..UNITS {
            writeln!(
                s,
                "unit {} {} {} {}",
                j + 1,
                self.company_of_unit[j] + 1,
                self.unit_lower[j],
                self.unit_upper[j]
            )
            .unwrap();
        }
        writeln!(s, "# company <company> <min> <max>").unwrap();
        for c in 0..COMPANIES {
            writeln!(
                s,
                "company {} {} {}",
                c + 1,
                self.company_lower[c],
                self.company_upper[c]
            )
            .unwrap();
        }
        writeln!(s, "price_intercept {}", self.price_intercept).unwrap();
        s
    }
}

fn unit_index(field: f64) -> Option<usize> {
    let j = field as usize;
    (field.fract() == 0.0 && (1..=UNITS).contains(&j)).then(|| j - 1)
}

/// The dense model matrices: the cross-company coupling (not positive
/// semidefinite), the within-company coupling (symmetric PSD), and the
/// linear term.
#[derive(Debug, Clone)]
pub struct ModelMatrices {
    pub cross_coupling: DMatrix<f64>,
    pub company_coupling: DMatrix<f64>,
    pub linear: DVector<f64>,
}

/// Builds the coupling matrices from the company partition:
/// cross `= 2 sum_i (1 - q^i)(q^i)^T`, within `= 2 sum_i q^i (q^i)^T`,
/// linear `= -price_intercept * sum_i q^i`.
pub fn model_matrices(params: &NashCournotParams) -> ModelMatrices {
    let same_company =
        |r: usize, c: usize| params.company_of_unit[r] == params.company_of_unit[c];
    ModelMatrices {
        cross_coupling: DMatrix::from_fn(UNITS, UNITS, |r, c| {
            if same_company(r, c) {
                0.0
            } else {
                2.0
            }
        }),
        company_coupling: DMatrix::from_fn(UNITS, UNITS, |r, c| {
            if same_company(r, c) {
                2.0
            } else {
                0.0
            }
        }),
        linear: DVector::from_element(UNITS, -params.price_intercept),
    }
}

/// The market equilibrium bifunction
/// `f(x, y) = [(A + B)x + By + a]^T (y - x) + c(y) - c(x)`
/// with `A` the cross-company coupling, `B` the within-company coupling,
/// `a` the linear term, and `c` the summed unit costs.
pub struct NashCournot {
    params: NashCournotParams,
    mats: ModelMatrices,
    smooth_lipschitz: f64,
    prox_branches: Option<[(QuadraticBranch, QuadraticBranch); UNITS]>,
}

impl NashCournot {
    pub fn new(params: NashCournotParams) -> Result<Self, ModelError> {
        params.validate()?;
        let mats = model_matrices(&params);
        let lambda_max = mats
            .company_coupling
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let branches: Option<Vec<_>> =
            (0..UNITS).map(|j| params.quadratic_branches(j)).collect();
        Ok(NashCournot {
            params,
            mats,
            smooth_lipschitz: 2.0 * lambda_max,
            prox_branches: branches.map(|v| {
                let mut arr = [(QuadraticBranch::new(0.0, 0.0, 0.0),
                                QuadraticBranch::new(0.0, 0.0, 0.0)); UNITS];
                arr.copy_from_slice(&v);
                arr
            }),
        })
    }

    pub fn params(&self) -> &NashCournotParams {
        &self.params
    }

    pub fn matrices(&self) -> &ModelMatrices {
        &self.mats
    }

    fn total_cost(&self, x: &DVector<f64>) -> f64 {
        (0..UNITS).map(|j| self.params.unit_cost(j, x[j])).sum()
    }

    fn cost_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(UNITS, |j, _| self.params.unit_cost_derivative(j, x[j]))
    }
}

impl EpOracle for NashCournot {
    fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let coeff =
            &self.mats.cross_coupling * x + &self.mats.company_coupling * (x + y) + &self.mats.linear;
        coeff.dot(&(y - x)) + self.total_cost(y) - self.total_cost(x)
    }

    fn subgrad2(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        &self.mats.cross_coupling * x
            + &self.mats.company_coupling * y * 2.0
            + &self.mats.linear
            + self.cost_gradient(y)
    }

    fn prox_split(&self) -> Option<&dyn ProxSplit> {
        self.prox_branches.as_ref().map(|_| self as &dyn ProxSplit)
    }
}

impl ProxSplit for NashCournot {
    // f(x, .) splits as [y^T B y + (A x + a)^T y] + sum_j c_j(y_j) plus a
    // constant in x.
    fn smooth_grad(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        &self.mats.company_coupling * y * 2.0 + &self.mats.cross_coupling * x + &self.mats.linear
    }

    fn smooth_lipschitz(&self) -> f64 {
        self.smooth_lipschitz
    }

    fn prox_coordinate(&self, j: usize, center: f64, weight: f64, lo: f64, hi: f64) -> f64 {
        let (q0, q1) = self.prox_branches.as_ref().expect("prox route requires quadratic branches")[j];
        prox_separable_1d(q0, q1, center, weight, lo, hi)
    }
}

/// Builds the market equilibrium instance on the generator-bound box.
pub fn build_nash_cournot(params: NashCournotParams) -> Result<ProblemInstance, ModelError> {
    let lower = DVector::from_row_slice(&params.unit_lower);
    let upper = DVector::from_row_slice(&params.unit_upper);
    let oracle = NashCournot::new(params)?;
    Ok(ProblemInstance::new(
        "nash-cournot",
        Oracle::Ep(Arc::new(oracle)),
        FeasibleBox::new(lower, upper)?,
    ))
}

/// The quasimonotone VI operator on `[0,1]^2`:
/// with `t = (x1 + sqrt(x1^2 + 4 x2)) / 2`,
/// `F(x) = (-t/(1+t), -1/(1+t))`.
///
/// Panics if the radicand is negative (impossible on the feasible square).
pub fn quasimonotone_f(x: &DVector<f64>) -> DVector<f64> {
    assert_eq!(x.len(), 2, "operator is two-dimensional");
    let radicand = x[0] * x[0] + 4.0 * x[1];
    assert!(radicand >= 0.0, "negative radicand: point outside the domain");
    let t = (x[0] + radicand.sqrt()) / 2.0;
    DVector::from_vec(vec![-t / (1.0 + t), -1.0 / (1.0 + t)])
}

/// The quasimonotone VI instance. Both the problem and its Minty dual have
/// the single solution `(1, 1)`: the operator is componentwise nonpositive,
/// so every product `<F(x), y - (1,1)>` has nonnegative terms.
pub fn quasimonotone_vi() -> ProblemInstance {
    let solution = DVector::from_vec(vec![1.0, 1.0]);
    ProblemInstance::new(
        "quasimonotone-vi",
        Oracle::Vi(Arc::new(ViFn(|x: &DVector<f64>| quasimonotone_f(x)))),
        FeasibleBox::unit(2),
    )
    .with_minty_point(solution.clone(), true)
    .expect("solution lies in the unit square")
    .with_solution(solution)
    .expect("solution lies in the unit square")
}

/// Affine VI `F(x) = M x + q` on a box, for test instances whose solution
/// can be checked independently. For dimensions up to 3 the constructor
/// locates the solution by minimizing the natural residual
/// `||x - P_C(x - F(x))||` on a refined grid and stores it on the instance.
///
/// `M` must be positive semidefinite (symmetric part checked) so that the
/// residual has no spurious minima.
pub fn synthetic_affine_vi(
    m: DMatrix<f64>,
    q: DVector<f64>,
    bounds: FeasibleBox,
    locate_solution: bool,
) -> Result<ProblemInstance, ModelError> {
    let n = bounds.dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(ModelError::DimensionMismatch { expected: n, got: m.nrows() });
    }
    if q.len() != n {
        return Err(ModelError::DimensionMismatch { expected: n, got: q.len() });
    }
    check_finite(&q)?;
    let sym = (&m + m.transpose()) * 0.5;
    let min_eig = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 {
        return Err(ModelError::InvalidParams(format!(
            "matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})"
        )));
    }
    if locate_solution && n > 3 {
        return Err(ModelError::InvalidParams(
            "solution location by grid search supports dimension <= 3".into(),
        ));
    }

    let operator = {
        let m = m.clone();
        let q = q.clone();
        Arc::new(ViFn(move |x: &DVector<f64>| &m * x + &q))
    };
    let mut instance = ProblemInstance::new("synthetic-affine-vi", Oracle::Vi(operator.clone()), bounds);
    if locate_solution {
        let solution = locate_vi_solution(operator.as_ref(), &instance.feasible);
        instance = instance.with_solution(solution)?;
    }
    Ok(instance)
}

/// Grid search with window refinement on the natural residual map.
fn locate_vi_solution(operator: &dyn ViOracle, bounds: &FeasibleBox) -> DVector<f64> {
    let n = bounds.dim();
    let residual = |x: &DVector<f64>| -> f64 {
        let stepped = x - operator.eval(x);
        (x - bounds.clamp(&stepped)).norm()
    };
    let mut center = (bounds.lower() + bounds.upper()) * 0.5;
    let mut half_span: Vec<f64> = (0..n)
        .map(|j| (bounds.upper()[j] - bounds.lower()[j]) * 0.5)
        .collect();

    const POINTS: usize = 21;
    for _round in 0..12 {
        let mut best = center.clone();
        let mut best_res = f64::INFINITY;
        let mut idx = vec![0usize; n];
        loop {
            let candidate = DVector::from_fn(n, |j, _| {
                let lo = (center[j] - half_span[j]).max(bounds.lower()[j]);
                let hi = (center[j] + half_span[j]).min(bounds.upper()[j]);
                lo + (hi - lo) * idx[j] as f64 / (POINTS - 1) as f64
            });
            let r = residual(&candidate);
            if r < best_res {
                best_res = r;
                best = candidate;
            }
            let mut j = 0;
            loop {
                if j == n {
                    break;
                }
                idx[j] += 1;
                if idx[j] < POINTS {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == n {
                break;
            }
        }
        center = best;
        for s in half_span.iter_mut() {
            *s *= 0.2;
        }
    }
    center
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn paper_oracle() -> NashCournot {
        NashCournot::new(NashCournotParams::default()).unwrap()
    }

    fn random_feasible(rng: &mut StdRng, bounds: &FeasibleBox) -> DVector<f64> {
        DVector::from_fn(bounds.dim(), |j, _| {
            rng.random_range(bounds.lower()[j]..=bounds.upper()[j])
        })
    }

    #[test]
    fn coupling_matrices_match_partition() {
        let m = model_matrices(&NashCournotParams::default());
        // Units 2 and 3 (zero-based 1 and 2) share a company; units 1 and 2 do not.
        assert_eq!(m.company_coupling[(1, 2)], 2.0);
        assert_eq!(m.company_coupling[(0, 1)], 0.0);
        assert_eq!(m.company_coupling[(0, 0)], 2.0);
        // The two couplings always sum to the all-twos matrix.
        for r in 0..UNITS {
            for c in 0..UNITS {
                assert_eq!(m.cross_coupling[(r, c)] + m.company_coupling[(r, c)], 2.0);
            }
        }
        assert_eq!(m.linear, DVector::from_element(UNITS, -387.4));
    }

    #[test]
    fn company_indicators_partition_units() {
        let params = NashCournotParams::default();
        let q = params.company_indicators();
        let sum = &q[0] + &q[1] + &q[2];
        assert_eq!(sum, DVector::from_element(UNITS, 1.0));
    }

    #[test]
    fn company_coupling_is_psd() {
        let m = model_matrices(&NashCournotParams::default());
        let eigs = m.company_coupling.symmetric_eigen().eigenvalues;
        assert!(eigs.iter().all(|&l| l >= -1e-12));
        // Largest block has three units.
        assert_abs_diff_eq!(eigs.max(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn cost_branches_nearly_coincide() {
        // The table data satisfies gamma1 ~ 1/alpha0 and alpha1 = beta0, so
        // the two branches agree as polynomials up to the table's printed
        // precision and the max is a near-tie everywhere.
        let params = NashCournotParams::default();
        for j in 0..UNITS {
            let (q0, q1) = params.quadratic_branches(j).unwrap();
            // The table prints 6 significant digits, so the reciprocal
            // relation holds to ~1e-6 relative.
            assert_abs_diff_eq!(q0.a2, q1.a2, epsilon = 2e-6 * q0.a2.abs());
            assert_eq!(q0.a1, q1.a1);
            assert_eq!(q0.a0, 0.0);
            assert_eq!(q1.a0, 0.0);
        }
    }

    #[test]
    fn unit_cost_values() {
        let params = NashCournotParams::default();
        // Unit 1 at 10: both branches give 22.
        assert_abs_diff_eq!(params.unit_cost(0, 10.0), 22.0, epsilon = 1e-12);
        // Zero output costs gamma0 = 0 for every unit.
        for j in 0..UNITS {
            assert_eq!(params.unit_cost(j, 0.0), 0.0);
        }
        // Derivative of branch 0 for unit 1 at 10.
        assert_abs_diff_eq!(params.unit_cost_derivative(0, 10.0), 2.4, epsilon = 1e-12);
        // Unit 3 at 0: derivative is beta0 = 1.
        assert_eq!(params.unit_cost_derivative(2, 0.0), 1.0);
        // Tie rule determinism.
        let d1 = params.unit_cost_derivative(3, 17.3);
        let d2 = params.unit_cost_derivative(3, 17.3);
        assert_eq!(d1, d2);
    }

    #[test]
    fn bifunction_value_against_independent_evaluation() {
        let oracle = paper_oracle();
        let x = dvector![20.0, 50.0, 40.0, 45.0, 30.0, 30.0];
        let mut y = x.clone();
        y[0] += 1.0;

        // Independent term-by-term evaluation: every unit sees coefficient
        // 2*sigma(x) from the all-twos (A+B), plus its company block of B
        // applied to y, minus the intercept; then the cost difference.
        let params = NashCournotParams::default();
        let sigma_x: f64 = x.iter().sum();
        let mut expected = 0.0;
        for j in 0..UNITS {
            let mut b_y = 0.0;
            for k in 0..UNITS {
                if params.company_of_unit[j] == params.company_of_unit[k] {
                    b_y += 2.0 * y[k];
                }
            }
            let coeff = 2.0 * sigma_x + b_y - 387.4;
            expected += coeff * (y[j] - x[j]);
            expected += params.unit_cost(j, y[j]) - params.unit_cost(j, x[j]);
        }
        let got = oracle.eval(&x, &y);
        assert_abs_diff_eq!(got, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(got, 87.42, epsilon = 1e-9);
    }

    #[test]
    fn bifunction_vanishes_on_diagonal() {
        let instance = build_nash_cournot(NashCournotParams::default()).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = random_feasible(&mut rng, &instance.feasible);
            assert!(instance.ep_eval(&x, &x).abs() <= 1e-12);
        }
        let vi = quasimonotone_vi();
        for _ in 0..1000 {
            let x = random_feasible(&mut rng, &vi.feasible);
            assert!(vi.ep_eval(&x, &x).abs() <= 1e-12);
        }
    }

    #[test]
    fn generator_bounds_clamp_overproduction() {
        let instance = build_nash_cournot(NashCournotParams::default()).unwrap();
        let clamped = instance.feasible.clamp(&DVector::from_element(UNITS, 100.0));
        assert_eq!(clamped, dvector![80.0, 80.0, 50.0, 55.0, 30.0, 40.0]);
    }

    #[test]
    fn subgradient_inequality_holds() {
        let instance = build_nash_cournot(NashCournotParams::default()).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let x = random_feasible(&mut rng, &instance.feasible);
            let y = random_feasible(&mut rng, &instance.feasible);
            let w = random_feasible(&mut rng, &instance.feasible);
            let xi = instance.ep_subgradient2(&x, &y);
            let lhs = instance.ep_eval(&x, &w) - instance.ep_eval(&x, &y);
            let rhs = xi.dot(&(&w - &y));
            assert!(lhs >= rhs - 1e-9, "subgradient inequality violated: {lhs} < {rhs}");
        }
    }

    #[test]
    fn diagonal_subgradient_matches_closed_form() {
        let oracle = paper_oracle();
        let m = oracle.matrices();
        let z = dvector![10.0, 20.0, 30.0, 15.0, 25.0, 35.0];
        let expected = &m.cross_coupling * &z
            + &m.company_coupling * &z * 2.0
            + &m.linear
            + DVector::from_fn(UNITS, |j, _| {
                oracle.params().unit_cost_derivative(j, z[j])
            });
        assert_eq!(oracle.subgrad2(&z, &z), expected);
    }

    #[test]
    fn skew_part_is_cross_coupling_quadratic() {
        // f(x, y) + f(y, x) = -(y - x)^T A (y - x).
        let oracle = paper_oracle();
        let instance = build_nash_cournot(NashCournotParams::default()).unwrap();
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..200 {
            let x = random_feasible(&mut rng, &instance.feasible);
            let y = random_feasible(&mut rng, &instance.feasible);
            let sum = oracle.eval(&x, &y) + oracle.eval(&y, &x);
            let d = &y - &x;
            let expected = -(&oracle.matrices().cross_coupling * &d).dot(&d);
            assert_abs_diff_eq!(sum, expected, epsilon = 1e-8);
        }
    }

    #[test]
    fn profits_match_hand_computation() {
        let params = NashCournotParams::default();
        assert_eq!(params.company_profits(&DVector::zeros(UNITS)), [0.0; 3]);

        let x = dvector![1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let profits = params.company_profits(&x);
        assert_abs_diff_eq!(profits[0], 374.38, epsilon = 1e-12);
        assert_eq!(profits[1], 0.0);
        assert_eq!(profits[2], 0.0);
    }

    #[test]
    fn quasimonotone_operator_values() {
        assert_eq!(quasimonotone_f(&dvector![0.0, 0.0]), dvector![0.0, -1.0]);
        assert_abs_diff_eq!(
            quasimonotone_f(&dvector![1.0, 0.0]),
            dvector![-0.5, -0.5],
            epsilon = 1e-15
        );
        // At (1,1) the auxiliary root is the golden ratio.
        let f = quasimonotone_f(&dvector![1.0, 1.0]);
        assert_abs_diff_eq!(f[0], -0.618033988749895, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], -0.381966011250105, epsilon = 1e-12);
    }

    #[test]
    fn quasimonotone_operator_signs() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..500 {
            let x = dvector![rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)];
            let f = quasimonotone_f(&x);
            assert!(f[0] <= 0.0 && f[1] < 0.0);
            let t = (x[0] + (x[0] * x[0] + 4.0 * x[1]).sqrt()) / 2.0;
            if t > 0.0 {
                assert!(f[0] < 0.0);
            }
        }
    }

    #[test]
    fn corner_solves_primal_and_minty_problems() {
        // <F(x), y - (1,1)> >= 0 for any feasible x, y: both factors are
        // componentwise nonpositive.
        let solution = dvector![1.0, 1.0];
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..1000 {
            let x = dvector![rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)];
            let y = dvector![rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)];
            let f = quasimonotone_f(&x);
            assert!(f.dot(&(&y - &solution)) >= 0.0);
        }
    }

    #[test]
    fn synthetic_affine_locates_interior_zero() {
        let inst = synthetic_affine_vi(
            DMatrix::identity(2, 2),
            dvector![-0.3, -0.7],
            FeasibleBox::unit(2),
            true,
        )
        .unwrap();
        let sol = inst.known_solution.clone().unwrap();
        assert_abs_diff_eq!(sol, dvector![0.3, 0.7], epsilon = 1e-6);
    }

    #[test]
    fn synthetic_affine_locates_corner_solution() {
        let inst = synthetic_affine_vi(
            DMatrix::identity(2, 2),
            dvector![1.0, 1.0],
            FeasibleBox::unit(2),
            true,
        )
        .unwrap();
        let sol = inst.known_solution.clone().unwrap();
        assert_abs_diff_eq!(sol, dvector![0.0, 0.0], epsilon = 1e-6);
        // VI inequality spot check on a grid.
        for i in 0..=10 {
            for j in 0..=10 {
                let y = dvector![i as f64 / 10.0, j as f64 / 10.0];
                assert!(dvector![1.0, 1.0].dot(&(&y - &sol)) >= -1e-12);
            }
        }
    }

    #[test]
    fn synthetic_affine_rejects_indefinite_matrix() {
        let err = synthetic_affine_vi(
            DMatrix::from_diagonal(&dvector![1.0, -1.0]),
            dvector![0.0, 0.0],
            FeasibleBox::unit(2),
            false,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InvalidParams(_)));
    }

    #[test]
    fn params_table_round_trip() {
        let params = NashCournotParams::default();
        let text = params.to_table_string();
        let reparsed = NashCournotParams::from_table_str(&text).unwrap();
        assert_eq!(params, reparsed);
    }

    #[test]
    fn params_table_rejects_garbage() {
        assert!(NashCournotParams::from_table_str("cost 7 1 2 3 4 5 6").is_err());
        assert!(NashCournotParams::from_table_str("unknown 1 2").is_err());
        assert!(NashCournotParams::from_table_str("cost 1 1 2").is_err());
    }

    #[test]
    fn params_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("market.txt");
        std::fs::write(&path, NashCournotParams::default().to_table_string()).unwrap();
        let loaded = NashCournotParams::from_file(&path).unwrap();
        assert_eq!(loaded, NashCournotParams::default());
    }
}
