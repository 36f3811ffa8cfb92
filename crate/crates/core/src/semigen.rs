//! Semi-generative model `P(Y, X_E | X_C)`: a logistic class prior on the
//! causes and one linear-Gaussian mechanism per class for the effects.
//!
//! The model never fits `P(X_C)`. For fixed labels the negative
//! log-likelihood splits into a label term (prior parameters only) and an
//! effect term (mechanism parameters only), so the M-step is one weighted
//! logistic regression plus two weighted ridge regressions.
//!
//! Both EM variants optimize the penalized objective
//!
//! ```text
//! NLL + (λ_Y / 2)‖w‖² + Σ_c Σ_j λ_E ‖Θ_c[:, j]‖² / (2 σ²_cj)
//! ```
//!
//! whose exact coordinate minimizers are the ridge closed form for `Θ_c`
//! (independent of `σ²`) and `σ²_cj = (weighted RSS + λ_E‖Θ_c[:, j]‖²) / Σ weights`.
//! With that noise update every M-step is a true minimization, so the hard
//! objective and the soft marginal objective never increase.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Labelled, Unlabelled};
use crate::linalg::Matrix;
use crate::math::{log_add_exp, log_sigmoid, sigmoid};
use crate::regress::{
    diag_log_density, weighted_logistic, weighted_ridge, LogisticParams, Regularization, RidgeParams,
    VARIANCE_FLOOR,
};
use crate::{Error, Result};

/// Fitted parameters of the semi-generative model.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SemiGenParams {
    /// `P(Y = 1 | x_C) = σ(wᵀx_C + b)`.
    pub prior: LogisticParams,
    /// Mean of `X_E | x_C, Y = c` for `c = 0, 1`.
    pub mech: [RidgeParams; 2],
    /// Per-class residual variances, one per effect dimension.
    pub noise: [Vec<f64>; 2],
}

impl SemiGenParams {
    /// Checks dimensional consistency and applies the variance floor.
    pub fn new(prior: LogisticParams, mech: [RidgeParams; 2], noise: [Vec<f64>; 2]) -> Result<Self> {
        let d_c = prior.weights.len();
        let d_e = mech[0].output_dim();
        for m in &mech {
            if m.input_dim() != d_c {
                return Err(Error::DimensionMismatch { expected: d_c, found: m.input_dim() });
            }
            if m.output_dim() != d_e {
                return Err(Error::DimensionMismatch { expected: d_e, found: m.output_dim() });
            }
        }
        let mut noise = noise;
        for v in noise.iter_mut() {
            if v.len() != d_e {
                return Err(Error::DimensionMismatch { expected: d_e, found: v.len() });
            }
            for s in v.iter_mut() {
                if !s.is_finite() {
                    return Err(Error::NonFiniteInput);
                }
                *s = s.max(VARIANCE_FLOOR);
            }
        }
        Ok(Self { prior, mech, noise })
    }

    pub fn cause_dim(&self) -> usize {
        self.prior.weights.len()
    }

    pub fn effect_dim(&self) -> usize {
        self.mech[0].output_dim()
    }

    fn check_dims(&self, x_c: &[f64], x_e: &[f64]) -> Result<()> {
        if x_c.len() != self.cause_dim() {
            return Err(Error::DimensionMismatch { expected: self.cause_dim(), found: x_c.len() });
        }
        if x_e.len() != self.effect_dim() {
            return Err(Error::DimensionMismatch { expected: self.effect_dim(), found: x_e.len() });
        }
        Ok(())
    }

    /// `log p(x_E | x_C, Y = class)`.
    pub fn effect_log_density(&self, class: usize, x_c: &[f64], x_e: &[f64]) -> f64 {
        let mean = self.mech[class].predict(x_c);
        diag_log_density(&mean, &self.noise[class], x_e)
    }

    /// `[log p(Y = 0, x_E | x_C), log p(Y = 1, x_E | x_C)]`.
    pub fn log_joint(&self, x_c: &[f64], x_e: &[f64]) -> [f64; 2] {
        let z = self.prior.logit(x_c);
        [
            log_sigmoid(-z) + self.effect_log_density(0, x_c, x_e),
            log_sigmoid(z) + self.effect_log_density(1, x_c, x_e),
        ]
    }

    /// Log-odds of `Y = 1` given both feature groups.
    pub fn posterior_logit(&self, x_c: &[f64], x_e: &[f64]) -> f64 {
        self.prior.logit(x_c) + (self.effect_log_density(1, x_c, x_e) - self.effect_log_density(0, x_c, x_e))
    }

    /// Penalty term added to the NLL by the regularized fits.
    pub fn penalty(&self, reg: &Regularization) -> f64 {
        let w = &self.prior.weights;
        let mut acc = 0.5 * reg.logistic * w.iter().map(|v| v * v).sum::<f64>();
        for c in 0..2 {
            let coef = &self.mech[c].coef;
            for j in 0..coef.cols() {
                let col_sq: f64 = coef.column(j).iter().map(|v| v * v).sum();
                acc += reg.ridge * col_sq / (2.0 * self.noise[c][j]);
            }
        }
        acc
    }
}

/// `p(Y = 1 | x_C, x_E)`, evaluated through log-densities.
pub fn posterior(params: &SemiGenParams, x_c: &[f64], x_e: &[f64]) -> Result<f64> {
    params.check_dims(x_c, x_e)?;
    Ok(sigmoid(params.posterior_logit(x_c, x_e)))
}

fn check_rows(params: &SemiGenParams, causes: &Matrix, effects: &Matrix, n: usize) -> Result<()> {
    if causes.rows() != n || effects.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: causes.rows().min(effects.rows()) });
    }
    if causes.cols() != params.cause_dim() {
        return Err(Error::DimensionMismatch { expected: params.cause_dim(), found: causes.cols() });
    }
    if effects.cols() != params.effect_dim() {
        return Err(Error::DimensionMismatch { expected: params.effect_dim(), found: effects.cols() });
    }
    Ok(())
}

/// The two independent parts of the complete-data NLL.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NllTerms {
    /// `−Σ log p(yᵢ | x_C,i)`.
    pub labels: f64,
    /// `−Σ log p(x_E,i | x_C,i, yᵢ)`.
    pub effects: f64,
}

impl NllTerms {
    pub fn total(&self) -> f64 {
        self.labels + self.effects
    }
}

/// Complete-data NLL split into its label and effect terms.
///
/// `resp[i]` is the probability assigned to `Y = 1` for row `i`; hard labels
/// are `0.0` / `1.0`, soft labels give the expected complete-data NLL.
pub fn nll_terms(params: &SemiGenParams, causes: &Matrix, effects: &Matrix, resp: &[f64]) -> Result<NllTerms> {
    check_rows(params, causes, effects, resp.len())?;
    let mut terms = NllTerms { labels: 0.0, effects: 0.0 };
    for (i, &r) in resp.iter().enumerate() {
        let (x_c, x_e) = (causes.row(i), effects.row(i));
        let z = params.prior.logit(x_c);
        // skip zero-weight classes so that 0·log p stays exactly 0
        if r > 0.0 {
            terms.labels -= r * log_sigmoid(z);
            terms.effects -= r * params.effect_log_density(1, x_c, x_e);
        }
        if r < 1.0 {
            terms.labels -= (1.0 - r) * log_sigmoid(-z);
            terms.effects -= (1.0 - r) * params.effect_log_density(0, x_c, x_e);
        }
    }
    Ok(terms)
}

/// Complete-data NLL `−log p(y, X_E | X_C)` (expected, for soft labels).
pub fn nll(params: &SemiGenParams, causes: &Matrix, effects: &Matrix, resp: &[f64]) -> Result<f64> {
    nll_terms(params, causes, effects, resp).map(|t| t.total())
}

/// Marginal NLL `−Σ log Σ_y p(y, x_E | x_C)` of unlabelled rows.
pub fn marginal_nll(params: &SemiGenParams, causes: &Matrix, effects: &Matrix) -> Result<f64> {
    check_rows(params, causes, effects, causes.rows())?;
    let mut acc = 0.0;
    for i in 0..causes.rows() {
        let [l0, l1] = params.log_joint(causes.row(i), effects.row(i));
        acc -= log_add_exp(l0, l1);
    }
    Ok(acc)
}

/// Penalized M-step over all rows, with `resp[i]` the weight of class 1.
pub fn m_step(causes: &Matrix, effects: &Matrix, resp: &[f64], reg: &Regularization) -> Result<SemiGenParams> {
    let n = resp.len();
    if causes.rows() != n || effects.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: causes.rows().min(effects.rows()) });
    }
    let prior = weighted_logistic(causes, resp, &vec![1.0; n], reg.logistic)?;
    let w1: Vec<f64> = resp.to_vec();
    let w0: Vec<f64> = resp.iter().map(|r| 1.0 - r).collect();
    let mech0 = weighted_ridge(causes, effects, &w0, reg.ridge)?;
    let mech1 = weighted_ridge(causes, effects, &w1, reg.ridge)?;
    let noise0 = noise_update(&mech0, causes, effects, &w0, reg.ridge);
    let noise1 = noise_update(&mech1, causes, effects, &w1, reg.ridge);
    SemiGenParams::new(prior, [mech0, mech1], [noise0, noise1])
}

fn noise_update(mech: &RidgeParams, causes: &Matrix, effects: &Matrix, weights: &[f64], lambda: f64) -> Vec<f64> {
    let d_e = effects.cols();
    let mut rss = vec![0.0; d_e];
    let mut pred = vec![0.0; d_e];
    let mut total = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        total += w;
        mech.predict_into(causes.row(i), &mut pred);
        for ((acc, p), t) in rss.iter_mut().zip(&pred).zip(effects.row(i)) {
            *acc += w * (t - p) * (t - p);
        }
    }
    (0..d_e)
        .map(|j| {
            if total <= 0.0 {
                return VARIANCE_FLOOR;
            }
            let col_sq: f64 = mech.coef.column(j).iter().map(|v| v * v).sum();
            ((rss[j] + lambda * col_sq) / total).max(VARIANCE_FLOOR)
        })
        .collect()
}

/// Fits the model on labelled rows only.
pub fn fit_supervised(lab: &Labelled, reg: &Regularization) -> Result<SemiGenParams> {
    lab.check()?;
    let resp: Vec<f64> = lab.labels.iter().map(|&y| y as f64).collect();
    m_step(&lab.causes, &lab.effects, &resp, reg)
}

/// Thresholds the posterior: label 1 iff `p(Y = 1 | ·) > threshold`.
pub fn predict(params: &SemiGenParams, causes: &Matrix, effects: &Matrix, threshold: f64) -> Result<Vec<u8>> {
    check_rows(params, causes, effects, causes.rows())?;
    Ok((0..causes.rows())
        .map(|i| (sigmoid(params.posterior_logit(causes.row(i), effects.row(i))) > threshold) as u8)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmMode {
    /// Responsibilities enter the M-step as soft targets and regression weights.
    Soft,
    /// Responsibilities are thresholded at 0.5 before the M-step.
    Hard,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmOptions {
    pub reg: Regularization,
    pub max_iter: usize,
    /// Soft mode stops once no responsibility moves by this much.
    pub tol: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self { reg: Regularization::default(), max_iter: 100, tol: 1e-6 }
    }
}

/// One EM iteration, recorded after its M-step and the following E-step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmRecord {
    pub iteration: usize,
    /// Hard mode: joint NLL with the current labels. Soft mode: marginal NLL
    /// (labelled joint terms plus unlabelled mixture terms).
    pub nll: f64,
    /// `nll` plus the parameter penalty; this is what EM decreases.
    pub objective: f64,
    pub changed_labels: usize,
    pub max_change: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmTrace {
    pub records: Vec<EmRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmFit {
    pub params: SemiGenParams,
    /// `p(Y = 1 | ·)` for each unlabelled row under `params`.
    pub responsibilities: Vec<f64>,
    /// Hard labels for the unlabelled rows.
    pub labels: Vec<u8>,
    pub trace: EmTrace,
    pub converged: bool,
}

fn e_step(params: &SemiGenParams, unl: &Unlabelled) -> Vec<f64> {
    (0..unl.len())
        .map(|i| sigmoid(params.posterior_logit(unl.causes.row(i), unl.effects.row(i))))
        .collect()
}

/// EM fit of the semi-generative model on labelled plus unlabelled rows.
///
/// Starts from [`fit_supervised`]. Hard mode stops at a label fixpoint and
/// returns the iterate with the lowest penalized joint NLL; soft mode stops
/// when the largest responsibility change drops below `opts.tol`. Both stop
/// after `opts.max_iter` M-steps.
pub fn fit_em(lab: &Labelled, unl: &Unlabelled, mode: EmMode, opts: &EmOptions) -> Result<EmFit> {
    lab.check()?;
    unl.check_against(lab)?;
    let reg = &opts.reg;
    let init = fit_supervised(lab, reg)?;
    let causes = lab.causes.vstack(&unl.causes)?;
    let effects = lab.effects.vstack(&unl.effects)?;
    let n_l = lab.len();
    let mut resp: Vec<f64> = lab.labels.iter().map(|&y| y as f64).collect();
    resp.resize(n_l + unl.len(), 0.0);

    let objective_of = |params: &SemiGenParams, q: &[f64], resp: &mut Vec<f64>| -> Result<(f64, f64)> {
        let nll = match mode {
            EmMode::Hard => {
                for (r, &qi) in resp[n_l..].iter_mut().zip(q) {
                    *r = (qi > 0.5) as u8 as f64;
                }
                nll(params, &causes, &effects, resp)?
            }
            EmMode::Soft => {
                nll(params, &lab.causes, &lab.effects, &resp[..n_l])?
                    + marginal_nll(params, &unl.causes, &unl.effects)?
            }
        };
        Ok((nll, nll + params.penalty(reg)))
    };

    let mut params = init;
    let mut q = e_step(&params, unl);
    let (nll0, obj0) = objective_of(&params, &q, &mut resp)?;
    let mut trace = EmTrace {
        records: vec![EmRecord { iteration: 0, nll: nll0, objective: obj0, changed_labels: 0, max_change: 0.0 }],
    };
    if unl.is_empty() {
        return Ok(EmFit { params, responsibilities: q, labels: Vec::new(), trace, converged: true });
    }

    let mut best = (obj0, params.clone(), q.clone());
    let mut converged = false;
    for iteration in 1..=opts.max_iter {
        for (r, &qi) in resp[n_l..].iter_mut().zip(&q) {
            *r = match mode {
                EmMode::Soft => qi,
                EmMode::Hard => (qi > 0.5) as u8 as f64,
            };
        }
        params = m_step(&causes, &effects, &resp, reg)?;
        let q_new = e_step(&params, unl);
        let changed_labels = q.iter().zip(&q_new).filter(|(a, b)| (**a > 0.5) != (**b > 0.5)).count();
        let max_change = q.iter().zip(&q_new).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        q = q_new;
        let (nll, objective) = objective_of(&params, &q, &mut resp)?;
        trace.records.push(EmRecord { iteration, nll, objective, changed_labels, max_change });
        if objective < best.0 {
            best = (objective, params.clone(), q.clone());
        }
        let done = match mode {
            EmMode::Hard => changed_labels == 0,
            EmMode::Soft => max_change < opts.tol,
        };
        if done {
            converged = true;
            break;
        }
    }

    if mode == EmMode::Hard {
        let (_, p, bq) = best;
        params = p;
        q = bq;
    }
    let labels = q.iter().map(|&v| (v > 0.5) as u8).collect();
    Ok(EmFit { params, responsibilities: q, labels, trace, converged })
}
