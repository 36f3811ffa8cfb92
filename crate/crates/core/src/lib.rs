//! Semi-supervised binary classification for data whose features are split
//! into causes `X_C` and effects `X_E` of the target `Y`.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerical
//! parts: dense linear algebra, weighted ridge and logistic regression, the
//! semi-generative model `P(Y, X_E | X_C)` with its soft and hard EM fits,
//! conditional self-learning, synthetic SCM generators, the label
//! propagation baseline, and the per-run benchmark protocol. File formats,
//! the CLI and the parallel runner live in the `causal-ssl` crate.
//!
//! ```
//! use causal_ssl_core::{semigen, synth, Regularization};
//! use rand::SeedableRng;
//!
//! let cfg = synth::preset("s1").unwrap();
//! let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
//! let ds = synth::generate(&cfg, 210, &mut rng).unwrap();
//! let split = causal_ssl_core::data::sample_split(&ds, 10, 200, &mut rng).unwrap();
//! let (lab, unl, truth) = ds.partition(&split).unwrap();
//! let fit = semigen::fit_em(&lab, &unl, semigen::EmMode::Soft, &semigen::EmOptions::default()).unwrap();
//! let acc = causal_ssl_core::accuracy(&fit.labels, &truth);
//! assert!(acc > 0.5);
//! # let _ = Regularization::default();
//! ```

#![no_std]
// NaN-rejecting `!(x > 0.0)` checks and index loops over parallel arrays are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod bench;
pub mod condself;
pub mod data;
mod error;
pub mod linalg;
pub mod math;
pub mod regress;
pub mod semigen;
pub mod synth;

pub use data::{Dataset, Labelled, Split, Unlabelled};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use regress::{DiagGaussian, LogisticParams, Regularization, RidgeParams};

/// Fraction of positions where `predicted` and `truth` agree.
///
/// Returns `NaN` for empty input.
pub fn accuracy(predicted: &[u8], truth: &[u8]) -> f64 {
    debug_assert_eq!(predicted.len(), truth.len());
    if truth.is_empty() {
        return f64::NAN;
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}
