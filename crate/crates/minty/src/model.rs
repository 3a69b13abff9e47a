//! Problem data shared by every solver layer: oracles for equilibrium
//! bifunctions and VI operators, box feasible sets, half-spaces, and the
//! [`ProblemInstance`] bundle that ties them together.

use std::sync::Arc;

use nalgebra::DVector;
use thiserror::Error;

/// Errors raised while constructing or validating problem data.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("invalid bounds at index {index}: lower {lower} exceeds upper {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("point lies outside the feasible box (coordinate {index})")]
    OutsideBox { index: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Returns an error if any entry of `v` is NaN or infinite.
pub fn check_finite(v: &DVector<f64>) -> Result<(), ModelError> {
    match v.iter().position(|e| !e.is_finite()) {
        Some(index) => Err(ModelError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Axis-aligned box `{x : lower <= x <= upper}`.
///
/// Both benchmark problems use box feasible sets; the cutting scheme only
/// ever intersects this box with half-spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleBox {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl FeasibleBox {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self, ModelError> {
        if lower.len() != upper.len() {
            return Err(ModelError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        check_finite(&lower)?;
        check_finite(&upper)?;
        for (index, (&lo, &hi)) in lower.iter().zip(upper.iter()).enumerate() {
            if lo > hi {
                return Err(ModelError::InvalidBounds {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Unit box `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        Self {
            lower: DVector::zeros(dim),
            upper: DVector::from_element(dim, 1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    /// Coordinatewise clamp of `x` into the box; this is the exact metric
    /// projection onto the box.
    pub fn clamp(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |j, _| x[j].max(self.lower[j]).min(self.upper[j]))
    }

    /// Largest coordinatewise distance of `x` to the box (0 when inside).
    pub fn violation(&self, x: &DVector<f64>) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        worst.max(0.0)
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.violation(x) <= tol
    }
}

/// Half-space `{x : <normal, x - anchor> <= 0}`.
///
/// A zero normal denotes the whole space: the anchored cut `W(x^0)` at the
/// first iteration has normal `x^0 - x^0 = 0`, and the scheme must treat it
/// as unconstraining.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: DVector<f64>,
    pub anchor: DVector<f64>,
}

impl HalfSpace {
    /// Panics if the normal and anchor dimensions differ.
    pub fn new(normal: DVector<f64>, anchor: DVector<f64>) -> Self {
        assert_eq!(
            normal.len(),
            anchor.len(),
            "half-space normal and anchor must have equal dimension"
        );
        Self { normal, anchor }
    }

    pub fn whole_space(dim: usize) -> Self {
        Self {
            normal: DVector::zeros(dim),
            anchor: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn is_whole_space(&self) -> bool {
        self.normal.iter().all(|&e| e == 0.0)
    }

    /// Signed constraint value `<normal, x - anchor>`; nonpositive inside.
    pub fn excess(&self, x: &DVector<f64>) -> f64 {
        self.normal.dot(x) - self.normal.dot(&self.anchor)
    }

    /// Euclidean distance of `x` to the half-space (0 when inside or when
    /// the half-space is the whole space).
    pub fn violation(&self, x: &DVector<f64>) -> f64 {
        if self.is_whole_space() {
            return 0.0;
        }
        self.excess(x).max(0.0) / self.normal.norm()
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.violation(x) <= tol
    }
}

/// Oracle for an equilibrium bifunction `f` with `f(x, x) = 0`.
///
/// `subgrad2` must return one element of the subdifferential of the convex
/// function `f(x, .)` at `y`, and must be deterministic so that runs are
/// replayable.
pub trait EpOracle: Send + Sync {
    fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64;

    fn subgrad2(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;

    /// Smooth-plus-separable structure of `f(x, .)`, when the problem has
    /// one. Enables the fast proximal-gradient subproblem solver.
    fn prox_split(&self) -> Option<&dyn ProxSplit> {
        None
    }
}

/// Decomposition `f(x, y) = smooth(x, y) + sum_j nonsmooth_j(y_j) + const(x)`
/// where `smooth(x, .)` is convex with an `L`-Lipschitz gradient and each
/// `nonsmooth_j` is convex with an exactly solvable 1-D proximal step.
pub trait ProxSplit: Send + Sync {
    /// Gradient of the smooth part with respect to `y`.
    fn smooth_grad(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;

    /// Lipschitz constant of `smooth_grad(x, .)`, uniform over feasible `x`.
    fn smooth_lipschitz(&self) -> f64;

    /// Exact minimizer over `[lo, hi]` of
    /// `nonsmooth_j(t) + (weight/2) (t - center)^2`.
    fn prox_coordinate(&self, j: usize, center: f64, weight: f64, lo: f64, hi: f64) -> f64;
}

/// Operator oracle for a variational inequality `<F(x*), y - x*> >= 0`.
pub trait ViOracle: Send + Sync {
    fn eval(&self, x: &DVector<f64>) -> DVector<f64>;
}

/// Equilibrium bifunction induced by a VI operator:
/// `f(x, y) = <F(x), y - x>`, whose partial subdifferential at any `y` is
/// the singleton `{F(x)}`.
struct ViAsEp {
    vi: Arc<dyn ViOracle>,
}

impl EpOracle for ViAsEp {
    fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.vi.eval(x).dot(&(y - x))
    }

    fn subgrad2(&self, x: &DVector<f64>, _y: &DVector<f64>) -> DVector<f64> {
        self.vi.eval(x)
    }
}

/// Views a VI operator as an equilibrium bifunction oracle.
pub fn vi_as_ep(vi: Arc<dyn ViOracle>) -> Arc<dyn EpOracle> {
    Arc::new(ViAsEp { vi })
}

/// Closure-backed [`EpOracle`] for synthetic and test problems.
pub struct EpFn<E, G> {
    pub eval_fn: E,
    pub subgrad_fn: G,
}

impl<E, G> EpOracle for EpFn<E, G>
where
    E: Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync,
    G: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync,
{
    fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (self.eval_fn)(x, y)
    }

    fn subgrad2(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        (self.subgrad_fn)(x, y)
    }
}

/// Closure-backed [`ViOracle`].
pub struct ViFn<F>(pub F);

impl<F> ViOracle for ViFn<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
{
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.0)(x)
    }
}

/// Which kind of oracle a [`ProblemInstance`] carries.
#[derive(Clone)]
pub enum Oracle {
    Ep(Arc<dyn EpOracle>),
    Vi(Arc<dyn ViOracle>),
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Oracle::Ep(_) => f.write_str("Oracle::Ep"),
            Oracle::Vi(_) => f.write_str("Oracle::Vi"),
        }
    }
}

/// A problem bundled with its feasible set and optional reference points.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub oracle: Oracle,
    pub feasible: FeasibleBox,
    /// A known solution of the Minty (dual) problem, if any.
    pub known_minty_point: Option<DVector<f64>>,
    /// True when `known_minty_point` is the entire Minty solution set, so
    /// that it is the projection of any anchor onto that set.
    pub minty_point_is_unique: bool,
    /// A known solution of the problem itself, if any.
    pub known_solution: Option<DVector<f64>>,
}

impl ProblemInstance {
    pub fn new(
        name: impl Into<String>,
        oracle: Oracle,
        feasible: FeasibleBox,
    ) -> ProblemInstance {
        ProblemInstance {
            name: name.into(),
            oracle,
            feasible,
            known_minty_point: None,
            minty_point_is_unique: false,
            known_solution: None,
        }
    }

    /// Records a known Minty point; it must lie in the feasible box.
    pub fn with_minty_point(
        mut self,
        point: DVector<f64>,
        unique: bool,
    ) -> Result<Self, ModelError> {
        self.check_member(&point)?;
        self.known_minty_point = Some(point);
        self.minty_point_is_unique = unique;
        Ok(self)
    }

    /// Records a known solution; it must lie in the feasible box.
    pub fn with_solution(mut self, point: DVector<f64>) -> Result<Self, ModelError> {
        self.check_member(&point)?;
        self.known_solution = Some(point);
        Ok(self)
    }

    fn check_member(&self, point: &DVector<f64>) -> Result<(), ModelError> {
        if point.len() != self.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        check_finite(point)?;
        // Allow boundary points exactly; reference points come from closed-form
        // arguments, not floating computations.
        for j in 0..self.dim() {
            if point[j] < self.feasible.lower()[j] || point[j] > self.feasible.upper()[j] {
                return Err(ModelError::OutsideBox { index: j });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.feasible.dim()
    }

    /// The bifunction oracle; a VI instance is wrapped via [`vi_as_ep`].
    pub fn ep_oracle(&self) -> Arc<dyn EpOracle> {
        match &self.oracle {
            Oracle::Ep(o) => Arc::clone(o),
            Oracle::Vi(f) => vi_as_ep(Arc::clone(f)),
        }
    }

    /// The VI operator, when this instance carries one.
    pub fn vi_oracle(&self) -> Option<Arc<dyn ViOracle>> {
        match &self.oracle {
            Oracle::Vi(f) => Some(Arc::clone(f)),
            Oracle::Ep(_) => None,
        }
    }

    /// Evaluates the bifunction `f(x, y)`.
    ///
    /// Panics on dimension mismatch (contract violation).
    pub fn ep_eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.check_dims(x, y);
        self.ep_oracle().eval(x, y)
    }

    /// Returns one element of the partial subdifferential of `f(x, .)` at `y`.
    ///
    /// Panics on dimension mismatch (contract violation).
    pub fn ep_subgradient2(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.check_dims(x, y);
        self.ep_oracle().subgrad2(x, y)
    }

    fn check_dims(&self, x: &DVector<f64>, y: &DVector<f64>) {
        assert_eq!(x.len(), self.dim(), "x dimension does not match instance");
        assert_eq!(y.len(), self.dim(), "y dimension does not match instance");
    }
}
