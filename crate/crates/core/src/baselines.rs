//! Comparison methods that ignore the cause/effect partition: supervised
//! logistic regression and RBF label propagation on the joint features.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Labelled, Unlabelled};
use crate::linalg::Matrix;
use crate::math::exp;
use crate::regress::{weighted_logistic, LogisticParams};
use crate::{Error, Result};

/// `[x_C, x_E]` per row.
pub fn joint_features(causes: &Matrix, effects: &Matrix) -> Result<Matrix> {
    causes.hstack(effects)
}

/// Logistic regression with unit weights on the concatenated features of the
/// labelled rows.
pub fn fit_supervised_logreg(lab: &Labelled, lambda: f64) -> Result<LogisticParams> {
    lab.check()?;
    let z = joint_features(&lab.causes, &lab.effects)?;
    let y: Vec<f64> = lab.labels.iter().map(|&v| v as f64).collect();
    weighted_logistic(&z, &y, &vec![1.0; y.len()], lambda)
}

/// Label 1 iff `σ(wᵀz + b) > 0.5`.
pub fn predict_logreg(params: &LogisticParams, causes: &Matrix, effects: &Matrix) -> Result<Vec<u8>> {
    let z = joint_features(causes, effects)?;
    if z.cols() != params.weights.len() {
        return Err(Error::DimensionMismatch { expected: params.weights.len(), found: z.cols() });
    }
    Ok(z.row_iter().map(|r| (params.logit(r) > 0.0) as u8).collect())
}

/// How the per-iteration change of the label matrix is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChangeNorm {
    /// Sum of absolute entry changes over the whole label matrix.
    L1,
    /// Largest absolute entry change.
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelPropConfig {
    /// RBF width in `exp(−γ‖zᵢ − zⱼ‖²)`.
    pub gamma: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub norm: ChangeNorm,
}

impl Default for LabelPropConfig {
    fn default() -> Self {
        Self { gamma: 20.0, max_iter: 1000, tol: 1e-3, norm: ChangeNorm::L1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelPropResult {
    /// Labels of the unlabelled rows.
    pub labels: Vec<u8>,
    /// Final label mass, labelled rows first, columns = classes 0 and 1.
    pub distributions: Matrix,
    pub converged: bool,
    pub iterations: usize,
}

/// Row-normalized RBF affinity matrix. The diagonal (self-affinity 1) is kept.
pub fn propagation_matrix(z: &Matrix, gamma: f64) -> Matrix {
    let n = z.rows();
    let mut t = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let d2: f64 = z.row(i).iter().zip(z.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            let w = exp(-gamma * d2);
            t[(i, j)] = w;
            t[(j, i)] = w;
        }
    }
    for i in 0..n {
        let row = t.row_mut(i);
        let s: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= s;
        }
    }
    t
}

/// Clamped label propagation over the joint features.
///
/// Iterates `F ← T F`, resetting labelled rows to their one-hot targets after
/// every step; unlabelled rows start at zero. Stops once the change measured
/// by `cfg.norm` is below `cfg.tol`, or after `cfg.max_iter` steps with
/// `converged = false`. Each unlabelled row takes the class with the larger
/// mass, ties to class 0.
pub fn fit_label_propagation(lab: &Labelled, unl: &Unlabelled, cfg: &LabelPropConfig) -> Result<LabelPropResult> {
    if lab.is_empty() {
        return Err(Error::TooFewRows { needed: 1, available: 0 });
    }
    if !(cfg.gamma > 0.0) || !cfg.gamma.is_finite() {
        return Err(Error::InvalidConfig("label propagation gamma must be positive".into()));
    }
    unl.check_against(lab)?;
    let n_l = lab.len();
    let n_u = unl.len();
    let z = joint_features(&lab.causes, &lab.effects)?.vstack(&joint_features(&unl.causes, &unl.effects)?)?;
    if !z.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let t = propagation_matrix(&z, cfg.gamma);
    let n = n_l + n_u;

    let mut f = Matrix::zeros(n, 2);
    for (i, &y) in lab.labels.iter().enumerate() {
        f[(i, y as usize)] = 1.0;
    }
    let mut next = f.clone();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let mut change = 0.0f64;
        for i in n_l..n {
            let row = t.row(i);
            let (mut m0, mut m1) = (0.0, 0.0);
            for (k, &w) in row.iter().enumerate() {
                m0 += w * f[(k, 0)];
                m1 += w * f[(k, 1)];
            }
            let d = [(m0 - f[(i, 0)]).abs(), (m1 - f[(i, 1)]).abs()];
            change = match cfg.norm {
                ChangeNorm::L1 => change + d[0] + d[1],
                ChangeNorm::Max => change.max(d[0]).max(d[1]),
            };
            next[(i, 0)] = m0;
            next[(i, 1)] = m1;
        }
        core::mem::swap(&mut f, &mut next);
        if change < cfg.tol {
            converged = true;
            break;
        }
    }

    let labels = (n_l..n).map(|i| (f[(i, 1)] > f[(i, 0)]) as u8).collect();
    Ok(LabelPropResult { labels, distributions: f, converged, iterations })
}
