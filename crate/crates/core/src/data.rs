//! Datasets with a cause/effect column partition, labelled/unlabelled splits
//! and feature standardization.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Attempts made by [`sample_split`] to draw a labelled subset containing both classes.
pub const SPLIT_ATTEMPTS: usize = 1000;

const STD_FLOOR: f64 = 1e-12;

/// Row-aligned cause and effect features with optional binary labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    causes: Matrix,
    effects: Matrix,
    labels: Option<Vec<u8>>,
    cause_names: Vec<String>,
    effect_names: Vec<String>,
}

impl Dataset {
    /// Validates row alignment, finiteness, label range and `d_E ≥ 1`.
    pub fn new(causes: Matrix, effects: Matrix, labels: Option<Vec<u8>>) -> Result<Self> {
        let cause_names = (0..causes.cols()).map(|j| alloc::format!("xc_{j}")).collect();
        let effect_names = (0..effects.cols()).map(|j| alloc::format!("xe_{j}")).collect();
        Self::with_names(causes, effects, labels, cause_names, effect_names)
    }

    pub fn with_names(
        causes: Matrix,
        effects: Matrix,
        labels: Option<Vec<u8>>,
        cause_names: Vec<String>,
        effect_names: Vec<String>,
    ) -> Result<Self> {
        let n = causes.rows();
        if effects.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: effects.rows() });
        }
        if effects.cols() == 0 {
            return Err(Error::InvalidConfig("at least one effect feature is required".into()));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: l.len() });
            }
            if l.iter().any(|&v| v > 1) {
                return Err(Error::InvalidConfig("labels must be 0 or 1".into()));
            }
        }
        if cause_names.len() != causes.cols() {
            return Err(Error::DimensionMismatch { expected: causes.cols(), found: cause_names.len() });
        }
        if effect_names.len() != effects.cols() {
            return Err(Error::DimensionMismatch { expected: effects.cols(), found: effect_names.len() });
        }
        if !causes.is_finite() || !effects.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { causes, effects, labels, cause_names, effect_names })
    }

    pub fn len(&self) -> usize {
        self.causes.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn causes(&self) -> &Matrix {
        &self.causes
    }

    pub fn effects(&self) -> &Matrix {
        &self.effects
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn cause_names(&self) -> &[String] {
        &self.cause_names
    }

    pub fn effect_names(&self) -> &[String] {
        &self.effect_names
    }

    pub fn cause_dim(&self) -> usize {
        self.causes.cols()
    }

    pub fn effect_dim(&self) -> usize {
        self.effects.cols()
    }

    /// Splits the dataset into a labelled part, an unlabelled part, and the
    /// ground-truth labels of the unlabelled rows.
    pub fn partition(&self, split: &Split) -> Result<(Labelled, Unlabelled, Vec<u8>)> {
        let labels = self.labels.as_ref().ok_or(Error::MissingLabels)?;
        split.check(self.len())?;
        let lab = Labelled {
            causes: self.causes.select_rows(&split.labelled_idx),
            effects: self.effects.select_rows(&split.labelled_idx),
            labels: split.labelled_idx.iter().map(|&i| labels[i]).collect(),
        };
        let unl = Unlabelled {
            causes: self.causes.select_rows(&split.unlabelled_idx),
            effects: self.effects.select_rows(&split.unlabelled_idx),
        };
        let truth = split.unlabelled_idx.iter().map(|&i| labels[i]).collect();
        Ok((lab, unl, truth))
    }

    /// Z-scores every feature column with its full-sample mean and population
    /// standard deviation. Constant columns become zero.
    pub fn standardized(&self) -> Self {
        let mut out = self.clone();
        standardize_columns(&mut out.causes);
        standardize_columns(&mut out.effects);
        out
    }
}

fn standardize_columns(m: &mut Matrix) {
    let n = m.rows();
    if n == 0 {
        return;
    }
    for j in 0..m.cols() {
        let col = m.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let std = crate::math::sqrt(var);
        for i in 0..n {
            m[(i, j)] = if std < STD_FLOOR { 0.0 } else { (m[(i, j)] - mean) / std };
        }
    }
}

/// Exchanges the roles of causes and effects (matrices and names). Labels are kept.
///
/// Fails when the dataset has no cause columns, since the swapped dataset
/// would have no effects.
pub fn swap_roles(ds: &Dataset) -> Result<Dataset> {
    Dataset::with_names(
        ds.effects.clone(),
        ds.causes.clone(),
        ds.labels.clone(),
        ds.effect_names.clone(),
        ds.cause_names.clone(),
    )
}

/// Labelled training rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Labelled {
    pub causes: Matrix,
    pub effects: Matrix,
    pub labels: Vec<u8>,
}

impl Labelled {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&0) && self.labels.contains(&1)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let n = self.labels.len();
        if self.causes.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.causes.rows() });
        }
        if self.effects.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.effects.rows() });
        }
        if !self.has_both_classes() {
            return Err(Error::SingleClassLabels);
        }
        Ok(())
    }
}

/// Unlabelled rows (features only).
#[derive(Clone, Debug, PartialEq)]
pub struct Unlabelled {
    pub causes: Matrix,
    pub effects: Matrix,
}

impl Unlabelled {
    pub fn len(&self) -> usize {
        self.causes.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn check_against(&self, lab: &Labelled) -> Result<()> {
        if self.effects.rows() != self.causes.rows() {
            return Err(Error::DimensionMismatch { expected: self.causes.rows(), found: self.effects.rows() });
        }
        if self.causes.cols() != lab.causes.cols() {
            return Err(Error::DimensionMismatch { expected: lab.causes.cols(), found: self.causes.cols() });
        }
        if self.effects.cols() != lab.effects.cols() {
            return Err(Error::DimensionMismatch { expected: lab.effects.cols(), found: self.effects.cols() });
        }
        Ok(())
    }
}

/// Row indices of the labelled and unlabelled parts of a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Split {
    pub labelled_idx: Vec<usize>,
    pub unlabelled_idx: Vec<usize>,
}

impl Split {
    fn check(&self, n: usize) -> Result<()> {
        let mut seen = alloc::vec![false; n];
        for &i in self.labelled_idx.iter().chain(&self.unlabelled_idx) {
            if i >= n || seen[i] {
                return Err(Error::InvalidConfig("split indices must be distinct and in range".into()));
            }
            seen[i] = true;
        }
        Ok(())
    }

    /// FNV-1a fingerprint of both index lists.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(self.labelled_idx.len() as u64);
        for &i in &self.labelled_idx {
            feed(i as u64);
        }
        feed(self.unlabelled_idx.len() as u64);
        for &i in &self.unlabelled_idx {
            feed(i as u64);
        }
        h
    }
}

/// Draws `n_l` labelled and `n_u` unlabelled rows uniformly without
/// replacement, redrawing until the labelled part contains both classes.
pub fn sample_split<R: Rng + ?Sized>(ds: &Dataset, n_l: usize, n_u: usize, rng: &mut R) -> Result<Split> {
    let labels = ds.labels().ok_or(Error::MissingLabels)?;
    let n = ds.len();
    if n_l < 2 {
        return Err(Error::InvalidConfig("at least two labelled rows are required".into()));
    }
    if n_l + n_u > n {
        return Err(Error::TooFewRows { needed: n_l + n_u, available: n });
    }
    for _ in 0..SPLIT_ATTEMPTS {
        let picked = index::sample(rng, n, n_l + n_u).into_vec();
        let (lab, unl) = picked.split_at(n_l);
        let has = |c: u8| lab.iter().any(|&i| labels[i] == c);
        if has(0) && has(1) {
            return Ok(Split { labelled_idx: lab.to_vec(), unlabelled_idx: unl.to_vec() });
        }
    }
    Err(Error::SingleClassAfterRetries(SPLIT_ATTEMPTS))
}
