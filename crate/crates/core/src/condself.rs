//! Conditional self-learning: one cause→effect regressor per class, each
//! absorbing the unlabelled point it explains best, one point at a time.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Labelled, Unlabelled};
use crate::linalg::Matrix;
use crate::regress::{weighted_ridge, RidgeParams};
use crate::{Error, Result};

/// A fitted map from causes to effects.
pub trait Mechanism {
    fn predict_into(&self, x_c: &[f64], out: &mut [f64]);
}

impl Mechanism for RidgeParams {
    fn predict_into(&self, x_c: &[f64], out: &mut [f64]) {
        RidgeParams::predict_into(self, x_c, out)
    }
}

/// Fits a [`Mechanism`] regressing effects on causes.
pub trait Regressor {
    type Fitted: Mechanism + Clone;

    fn fit(&self, causes: &Matrix, effects: &Matrix) -> Result<Self::Fitted>;
}

/// Ridge regression with an intercept column, the default regressor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ridge {
    pub lambda: f64,
}

impl Default for Ridge {
    fn default() -> Self {
        Self { lambda: 1.0 }
    }
}

impl Regressor for Ridge {
    type Fitted = RidgeParams;

    fn fit(&self, causes: &Matrix, effects: &Matrix) -> Result<RidgeParams> {
        weighted_ridge(causes, effects, &vec![1.0; causes.rows()], self.lambda)
    }
}

fn squared_residual<M: Mechanism>(m: &M, x_c: &[f64], x_e: &[f64], buf: &mut [f64]) -> f64 {
    m.predict_into(x_c, buf);
    buf.iter().zip(x_e).map(|(p, t)| (t - p) * (t - p)).sum()
}

/// The two competing class mechanisms and the rows each has absorbed.
///
/// Row indices refer to the labelled rows first (`0..n_l`) and then the
/// unlabelled rows (`n_l + j`).
#[derive(Clone, Debug, PartialEq)]
pub struct MechanismPair<M = RidgeParams> {
    pub f0: M,
    pub f1: M,
    pub class_rows: [Vec<usize>; 2],
}

impl<M: Mechanism> MechanismPair<M> {
    fn get(&self, class: usize) -> &M {
        if class == 0 {
            &self.f0
        } else {
            &self.f1
        }
    }

    /// Squared residuals of `(x_C, x_E)` under both class mechanisms.
    pub fn residuals(&self, x_c: &[f64], x_e: &[f64]) -> [f64; 2] {
        let mut buf = vec![0.0; x_e.len()];
        [squared_residual(&self.f0, x_c, x_e, &mut buf), squared_residual(&self.f1, x_c, x_e, &mut buf)]
    }
}

/// One absorption step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub class: u8,
    /// Index into the unlabelled rows.
    pub sample: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelfLearnTrace {
    pub steps: Vec<TraceStep>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondSelfFit<M = RidgeParams> {
    /// Labels for the unlabelled rows, in their original order.
    pub labels: Vec<u8>,
    pub pair: MechanismPair<M>,
    pub trace: SelfLearnTrace,
}

/// Conditional self-learning with the default ridge regressor.
pub fn fit_condself(lab: &Labelled, unl: &Unlabelled, lambda: f64) -> Result<CondSelfFit> {
    fit_condself_with(lab, unl, &Ridge { lambda })
}

/// Conditional self-learning with an arbitrary regressor.
///
/// Each step scores every still-unlabelled point against both class
/// regressors, assigns the globally smallest squared residual, and refits the
/// absorbing class on its enlarged row set (the other class's rows, and so
/// its fit, are unchanged). Ties go to the lower class index, then the
/// lower sample index.
pub fn fit_condself_with<R: Regressor>(lab: &Labelled, unl: &Unlabelled, regressor: &R) -> Result<CondSelfFit<R::Fitted>> {
    lab.check()?;
    unl.check_against(lab)?;
    let n_l = lab.len();
    let n_u = unl.len();

    let mut class_rows: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &y) in lab.labels.iter().enumerate() {
        class_rows[y as usize].push(i);
    }
    let row_c = |i: usize| if i < n_l { lab.causes.row(i) } else { unl.causes.row(i - n_l) };
    let row_e = |i: usize| if i < n_l { lab.effects.row(i) } else { unl.effects.row(i - n_l) };
    let fit_class = |rows: &[usize]| -> Result<R::Fitted> {
        let c = Matrix::from_rows(&rows.iter().map(|&i| row_c(i)).collect::<Vec<_>>())?;
        let e = Matrix::from_rows(&rows.iter().map(|&i| row_e(i)).collect::<Vec<_>>())?;
        regressor.fit(&c, &e)
    };

    let mut labels: Vec<Option<u8>> = vec![None; n_u];
    let mut trace = SelfLearnTrace { steps: Vec::with_capacity(n_u) };
    let mut buf = vec![0.0; lab.effects.cols()];
    let mut fitted = [fit_class(&class_rows[0])?, fit_class(&class_rows[1])?];

    for step in 0..n_u {
        let mut best: Option<(f64, usize, usize)> = None;
        for (class, f) in fitted.iter().enumerate() {
            for j in (0..n_u).filter(|&j| labels[j].is_none()) {
                let r = squared_residual(f, unl.causes.row(j), unl.effects.row(j), &mut buf);
                if !r.is_finite() {
                    return Err(Error::NonFiniteInput);
                }
                if best.is_none_or(|(b, _, _)| r < b) {
                    best = Some((r, class, j));
                }
            }
        }
        let (residual, class, j) = best.expect("an unlabelled point remains");
        labels[j] = Some(class as u8);
        class_rows[class].push(n_l + j);
        trace.steps.push(TraceStep { step, class: class as u8, sample: j, residual });
        fitted[class] = fit_class(&class_rows[class])?;
    }

    let [f0, f1] = fitted;
    Ok(CondSelfFit {
        labels: labels.into_iter().map(|l| l.expect("every point labelled")).collect(),
        pair: MechanismPair { f0, f1, class_rows },
        trace,
    })
}

/// Inductive prediction: the class whose mechanism leaves the smaller squared
/// residual, ties to class 0.
pub fn predict_condself<M: Mechanism>(pair: &MechanismPair<M>, causes: &Matrix, effects: &Matrix) -> Result<Vec<u8>> {
    if causes.rows() != effects.rows() {
        return Err(Error::DimensionMismatch { expected: causes.rows(), found: effects.rows() });
    }
    let mut buf = vec![0.0; effects.cols()];
    Ok((0..causes.rows())
        .map(|i| {
            let r0 = squared_residual(pair.get(0), causes.row(i), effects.row(i), &mut buf);
            let r1 = squared_residual(pair.get(1), causes.row(i), effects.row(i), &mut buf);
            (r1 < r0) as u8
        })
        .collect())
}
