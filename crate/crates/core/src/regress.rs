//! Weighted ridge regression, weighted L2-regularized logistic regression and
//! diagonal Gaussian densities.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{cholesky_solve, dot, Matrix};
use crate::math::{log_sigmoid, sigmoid, LN_2PI};
use crate::{Error, Result};

/// Smallest variance a [`DiagGaussian`] (or a fitted noise model) may carry.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Regularization strengths for the two regression problems in the models.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Regularization {
    /// Ridge penalty on every mechanism coefficient, intercept included.
    pub ridge: f64,
    /// L2 penalty on the logistic weights; the intercept is not penalized.
    pub logistic: f64,
}

impl Default for Regularization {
    fn default() -> Self {
        Self { ridge: 1.0, logistic: 1.0 }
    }
}

/// Linear map from causes (plus a trailing intercept input) to effects.
///
/// `coef` has shape `(d_in + 1) x d_out`; its last row is the intercept.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RidgeParams {
    pub coef: Matrix,
}

impl RidgeParams {
    pub fn input_dim(&self) -> usize {
        self.coef.rows() - 1
    }

    pub fn output_dim(&self) -> usize {
        self.coef.cols()
    }

    /// Writes `coefᵀ [x; 1]` into `out`.
    pub fn predict_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.input_dim();
        debug_assert_eq!(x.len(), d);
        out.copy_from_slice(self.coef.row(d));
        for (k, &xk) in x.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.coef.row(k)) {
                *o += xk * c;
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_dim()];
        self.predict_into(x, &mut out);
        out
    }

    /// `‖x_E − f(x_C)‖²`.
    pub fn squared_residual(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.output_dim()];
        self.predict_into(x, &mut buf);
        buf.iter().zip(y).map(|(p, t)| (t - p) * (t - p)).sum()
    }
}

/// Weights and intercept of `P(Y = 1 | x) = σ(wᵀx + b)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogisticParams {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogisticParams {
    pub fn logit(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }
}

/// Axis-aligned Gaussian. Variances are clamped to [`VARIANCE_FLOOR`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiagGaussian {
    mean: Vec<f64>,
    variances: Vec<f64>,
}

impl DiagGaussian {
    pub fn new(mean: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        if mean.len() != variances.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), found: variances.len() });
        }
        if mean.iter().chain(&variances).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let variances = variances.into_iter().map(|v| v.max(VARIANCE_FLOOR)).collect();
        Ok(Self { mean, variances })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }
}

/// Log-density of `x` under `g`.
pub fn log_density(g: &DiagGaussian, x: &[f64]) -> Result<f64> {
    if x.len() != g.mean.len() {
        return Err(Error::DimensionMismatch { expected: g.mean.len(), found: x.len() });
    }
    Ok(diag_log_density(&g.mean, &g.variances, x))
}

pub(crate) fn diag_log_density(mean: &[f64], variances: &[f64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((m, v), xi) in mean.iter().zip(variances).zip(x) {
        let r = xi - m;
        acc -= 0.5 * (LN_2PI + crate::math::ln(*v)) + r * r / (2.0 * v);
    }
    acc
}

/// Closed-form weighted ridge without intercept augmentation:
/// `(XᵀWX + λI)⁻¹ XᵀWY`.
pub fn solve_weighted_ridge(x: &Matrix, y: &Matrix, weights: &[f64], lambda: f64) -> Result<Matrix> {
    let n = x.rows();
    if y.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.rows() });
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
    }
    if !x.is_finite() || !y.is_finite() || !lambda.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if lambda < 0.0 || weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidConfig("ridge weights and lambda must be non-negative".into()));
    }
    let d = x.cols();
    let k = y.cols();
    let mut gram = Matrix::zeros(d, d);
    let mut rhs = Matrix::zeros(d, k);
    for i in 0..n {
        let w = weights[i];
        if w == 0.0 {
            continue;
        }
        let xi = x.row(i);
        let yi = y.row(i);
        for a in 0..d {
            let wa = w * xi[a];
            for b in a..d {
                gram[(a, b)] += wa * xi[b];
            }
            for c in 0..k {
                rhs[(a, c)] += wa * yi[c];
            }
        }
    }
    for a in 0..d {
        gram[(a, a)] += lambda;
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    if d == 0 {
        return Ok(Matrix::zeros(0, k));
    }
    // all-zero weights with lambda > 0 solve to exactly zero
    cholesky_solve(&gram, &rhs)
}

/// Weighted ridge of `y` on `[x, 1]`, penalizing every coefficient including
/// the intercept row.
pub fn weighted_ridge(x: &Matrix, y: &Matrix, weights: &[f64], lambda: f64) -> Result<RidgeParams> {
    let coef = solve_weighted_ridge(&x.with_intercept(), y, weights, lambda)?;
    Ok(RidgeParams { coef })
}

/// Objective minimized by [`weighted_logistic`], written out for diagnostics
/// and tests.
pub fn logistic_objective(params: &LogisticParams, x: &Matrix, y: &[f64], weights: &[f64], lambda: f64) -> f64 {
    let mut acc = 0.5 * lambda * dot(&params.weights, &params.weights);
    for i in 0..x.rows() {
        let z = params.logit(x.row(i));
        acc -= weights[i] * (y[i] * log_sigmoid(z) + (1.0 - y[i]) * log_sigmoid(-z));
    }
    acc
}

/// Gradient of [`logistic_objective`] as `[∂w; ∂b]`.
pub fn logistic_gradient(params: &LogisticParams, x: &Matrix, y: &[f64], weights: &[f64], lambda: f64) -> Vec<f64> {
    let d = x.cols();
    let mut g = vec![0.0; d + 1];
    for i in 0..x.rows() {
        let xi = x.row(i);
        let r = weights[i] * (sigmoid(params.logit(xi)) - y[i]);
        for j in 0..d {
            g[j] += r * xi[j];
        }
        g[d] += r;
    }
    for j in 0..d {
        g[j] += lambda * params.weights[j];
    }
    g
}

const LOGISTIC_GRAD_TOL: f64 = 1e-8;
const LOGISTIC_MAX_ITER: usize = 100;

/// Weighted logistic regression with soft targets `y ∈ [0, 1]`, fitted by
/// damped Newton steps on
/// `Σ wᵢ·CE(yᵢ, σ(wᵀxᵢ + b)) + (λ/2)‖w‖²`.
///
/// Stops once the gradient ∞-norm drops below `1e-8` or after 100 steps.
pub fn weighted_logistic(x: &Matrix, y: &[f64], weights: &[f64], lambda: f64) -> Result<LogisticParams> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
    }
    if !x.is_finite() || !lambda.is_finite() || y.iter().chain(weights).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if lambda < 0.0 || weights.iter().any(|&w| w < 0.0) || y.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::InvalidConfig("logistic targets must lie in [0, 1], weights and lambda be non-negative".into()));
    }
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::NoPositiveWeights);
    }

    let d = x.cols();
    let mut params = LogisticParams { weights: vec![0.0; d], intercept: 0.0 };
    let mut obj = logistic_objective(&params, x, y, weights, lambda);
    for _ in 0..LOGISTIC_MAX_ITER {
        let grad = logistic_gradient(&params, x, y, weights, lambda);
        if grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) < LOGISTIC_GRAD_TOL {
            break;
        }
        let mut hess = Matrix::zeros(d + 1, d + 1);
        for i in 0..n {
            let xi = x.row(i);
            let p = sigmoid(params.logit(xi));
            let s = weights[i] * p * (1.0 - p);
            if s == 0.0 {
                continue;
            }
            for a in 0..=d {
                let xa = if a < d { xi[a] } else { 1.0 };
                for b in a..=d {
                    let xb = if b < d { xi[b] } else { 1.0 };
                    hess[(a, b)] += s * xa * xb;
                }
            }
        }
        for a in 0..=d {
            if a < d {
                hess[(a, a)] += lambda;
            }
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
        }
        let g = Matrix::column_vector(&grad);
        let step = match cholesky_solve(&hess, &g) {
            Ok(s) => s,
            Err(_) => {
                // saturated curvature: fall back to a lightly damped system
                let mut damped = hess.clone();
                let bump = 1e-8 * (1.0 + (0..=d).map(|a| hess[(a, a)].abs()).fold(0.0, f64::max));
                for a in 0..=d {
                    damped[(a, a)] += bump;
                }
                cholesky_solve(&damped, &g)?
            }
        };

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let cand = LogisticParams {
                weights: (0..d).map(|j| params.weights[j] - t * step[(j, 0)]).collect(),
                intercept: params.intercept - t * step[(d, 0)],
            };
            let cand_obj = logistic_objective(&cand, x, y, weights, lambda);
            // near the optimum the objective change drowns in rounding error
            let slack = 8.0 * f64::EPSILON * obj.abs().max(1.0);
            if cand_obj <= obj + slack {
                params = cand;
                obj = cand_obj;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(params)
}
