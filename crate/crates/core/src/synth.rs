//! Synthetic data from a linear-Gaussian structural causal model:
//!
//! ```text
//! X_C ~ Σ_k w_k N(μ_k, diag(v_k))
//! Y   := 1[σ(aᵀX_C + b) > U],         U ~ Uniform[0, 1]
//! X_E := A_Y X_C + b_Y + D_Y ε,       ε ~ N(0, I)
//! ```
//!
//! Draws happen row by row in the fixed order component, `x_C`, `U`, `ε`, so a
//! seeded generator reproduces the same dataset on every platform.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::linalg::Matrix;
use crate::math::{sigmoid, sqrt};
use crate::regress::{LogisticParams, RidgeParams};
use crate::semigen::{self, SemiGenParams};
use crate::{Error, Result};

/// One mixture component for the causes, with diagonal covariance.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Class-conditional effect mechanism `x_E = A x_C + b + D ε`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EffectMechanism {
    /// `d_E x d_C`.
    pub slope: Matrix,
    pub offset: Vec<f64>,
    /// Diagonal of `D` (standard deviations).
    pub noise_std: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthConfig {
    pub mixture: Vec<MixtureComponent>,
    pub target_weights: Vec<f64>,
    pub target_bias: f64,
    /// Mechanisms for `Y = 0` and `Y = 1`.
    pub effects: [EffectMechanism; 2],
}

impl SynthConfig {
    pub fn cause_dim(&self) -> usize {
        self.target_weights.len()
    }

    pub fn effect_dim(&self) -> usize {
        self.effects[0].offset.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let d_c = self.cause_dim();
        let d_e = self.effect_dim();
        if self.mixture.is_empty() {
            return bad("mixture needs at least one component");
        }
        let mut total = 0.0;
        for c in &self.mixture {
            if !(c.weight >= 0.0) || c.mean.len() != d_c || c.variances.len() != d_c {
                return bad("mixture component has a negative weight or wrong dimension");
            }
            if c.variances.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) || c.mean.iter().any(|m| !m.is_finite()) {
                return bad("mixture variances must be finite and non-negative");
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return bad("mixture weights must sum to 1");
        }
        if d_e == 0 {
            return bad("at least one effect dimension is required");
        }
        for m in &self.effects {
            if m.slope.rows() != d_e || m.slope.cols() != d_c || m.offset.len() != d_e || m.noise_std.len() != d_e {
                return bad("effect mechanism has wrong dimensions");
            }
            if m.noise_std.iter().any(|s| !(*s > 0.0)) {
                return bad("effect noise standard deviations must be positive");
            }
        }
        Ok(())
    }

    /// The generating process written as semi-generative model parameters.
    pub fn true_params(&self) -> Result<SemiGenParams> {
        self.validate()?;
        let d_c = self.cause_dim();
        let d_e = self.effect_dim();
        let mech = |m: &EffectMechanism| {
            let mut coef = Matrix::zeros(d_c + 1, d_e);
            for k in 0..d_c {
                for j in 0..d_e {
                    coef[(k, j)] = m.slope[(j, k)];
                }
            }
            for j in 0..d_e {
                coef[(d_c, j)] = m.offset[j];
            }
            RidgeParams { coef }
        };
        let noise = |m: &EffectMechanism| m.noise_std.iter().map(|s| s * s).collect::<Vec<_>>();
        SemiGenParams::new(
            LogisticParams { weights: self.target_weights.clone(), intercept: self.target_bias },
            [mech(&self.effects[0]), mech(&self.effects[1])],
            [noise(&self.effects[0]), noise(&self.effects[1])],
        )
    }
}

fn scalar_mixture(weights: &[f64], means: &[f64], variances: &[f64]) -> Vec<MixtureComponent> {
    weights
        .iter()
        .zip(means)
        .zip(variances)
        .map(|((&weight, &m), &v)| MixtureComponent { weight, mean: vec![m], variances: vec![v] })
        .collect()
}

fn scalar_mech(slope: f64, offset: f64, std: f64) -> EffectMechanism {
    EffectMechanism { slope: Matrix::from_rows(&[[slope]]).unwrap(), offset: vec![offset], noise_std: vec![std] }
}

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 3] = ["s1", "s2", "s3"];

/// Built-in configurations:
///
/// * `s1`: three causes clusters at −5, 0, 5 (std 0.5), effects shifted by ±2;
///   linearly separable.
/// * `s2`: two clusters at ±3 (variance 0.5), effect slopes ±0.5 through the origin.
/// * `s3`: the two-dimensional version of `s2`.
pub fn preset(name: &str) -> Result<SynthConfig> {
    let cfg = match name.to_ascii_lowercase().as_str() {
        "s1" => SynthConfig {
            mixture: scalar_mixture(&[0.3, 0.4, 0.3], &[-5.0, 0.0, 5.0], &[0.25, 0.25, 0.25]),
            target_weights: vec![0.5],
            target_bias: 0.0,
            effects: [scalar_mech(1.0, 2.0, 0.25), scalar_mech(1.0, -2.0, 0.25)],
        },
        "s2" => SynthConfig {
            mixture: scalar_mixture(&[0.5, 0.5], &[-3.0, 3.0], &[0.5, 0.5]),
            target_weights: vec![0.5],
            target_bias: 0.0,
            effects: [scalar_mech(0.5, 0.0, 0.25), scalar_mech(-0.5, 0.0, 0.25)],
        },
        "s3" => {
            let comp = |m: f64| MixtureComponent { weight: 0.5, mean: vec![m, m], variances: vec![0.5, 0.5] };
            let mech = |s: f64| EffectMechanism {
                slope: Matrix::from_rows(&[[s, 0.0], [0.0, s]]).unwrap(),
                offset: vec![0.0, 0.0],
                noise_std: vec![0.25, 0.25],
            };
            SynthConfig {
                mixture: vec![comp(-3.0), comp(3.0)],
                target_weights: vec![0.5, 0.5],
                target_bias: 0.0,
                effects: [mech(0.5), mech(-0.5)],
            }
        }
        _ => return Err(Error::UnknownPreset(String::from(name))),
    };
    Ok(cfg)
}

/// Draws `n` fully labelled rows.
pub fn generate<R: Rng + ?Sized>(cfg: &SynthConfig, n: usize, rng: &mut R) -> Result<Dataset> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::TooFewRows { needed: 1, available: 0 });
    }
    let d_c = cfg.cause_dim();
    let d_e = cfg.effect_dim();
    let std: Vec<Vec<f64>> = cfg.mixture.iter().map(|c| c.variances.iter().map(|&v| sqrt(v)).collect()).collect();
    let mut causes = Vec::with_capacity(n * d_c);
    let mut effects = Vec::with_capacity(n * d_e);
    let mut labels = Vec::with_capacity(n);
    let mut x_c = vec![0.0; d_c];
    for _ in 0..n {
        let k = pick_component(cfg, rng.gen::<f64>());
        let comp = &cfg.mixture[k];
        for j in 0..d_c {
            let z: f64 = rng.sample(StandardNormal);
            x_c[j] = comp.mean[j] + std[k][j] * z;
        }
        let u: f64 = rng.gen();
        let p = sigmoid(crate::linalg::dot(&cfg.target_weights, &x_c) + cfg.target_bias);
        let y = (p > u) as u8;
        let m = &cfg.effects[y as usize];
        for j in 0..d_e {
            let eps: f64 = rng.sample(StandardNormal);
            let mean = crate::linalg::dot(m.slope.row(j), &x_c) + m.offset[j];
            effects.push(mean + m.noise_std[j] * eps);
        }
        causes.extend_from_slice(&x_c);
        labels.push(y);
    }
    Dataset::new(Matrix::from_vec(n, d_c, causes)?, Matrix::from_vec(n, d_e, effects)?, Some(labels))
}

fn pick_component(cfg: &SynthConfig, u: f64) -> usize {
    let mut acc = 0.0;
    for (k, c) in cfg.mixture.iter().enumerate() {
        acc += c.weight;
        if u < acc {
            return k;
        }
    }
    cfg.mixture.len() - 1
}

/// Bayes posterior `p(Y = 1 | x_C, x_E)` under the generating parameters.
pub fn oracle_posterior(cfg: &SynthConfig, x_c: &[f64], x_e: &[f64]) -> Result<f64> {
    semigen::posterior(&cfg.true_params()?, x_c, x_e)
}
