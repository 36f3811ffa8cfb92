//! Repeated-split evaluation protocol: per run, draw data and a
//! labelled/unlabelled split, fit every method, and score transductive
//! accuracy on the unlabelled rows.
//!
//! Each run depends only on `(protocol, run index)`, so runs can be executed
//! in any order or in parallel and then reduced with [`aggregate`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::baselines::{self, LabelPropConfig};
use crate::condself;
use crate::data::{self, Dataset, Split};
use crate::math::sqrt;
use crate::regress::Regularization;
use crate::semigen::{self, EmMode, EmOptions};
use crate::synth::{self, SynthConfig};
use crate::{accuracy, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Logistic regression on the joint features, labelled rows only.
    Supervised,
    LabelProp,
    /// Semi-generative model fitted on labelled rows only.
    SemigenSup,
    EmSoft,
    EmHard,
    CondSelf,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Supervised, Method::LabelProp, Method::SemigenSup, Method::EmSoft, Method::EmHard, Method::CondSelf];

    pub fn name(self) -> &'static str {
        match self {
            Method::Supervised => "supervised",
            Method::LabelProp => "labelprop",
            Method::SemigenSup => "semigen-sup",
            Method::EmSoft => "em-soft",
            Method::EmHard => "em-hard",
            Method::CondSelf => "cond-self",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Self::ALL.into_iter().find(|m| m.name() == s.trim())
    }

    /// Row label used in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Method::Supervised => "Lin. log. reg. (sup.)",
            Method::LabelProp => "RBF label propag.",
            Method::SemigenSup => "Semi-gen. (sup.)",
            Method::EmSoft => "Semi-gen.+soft EM",
            Method::EmHard => "Semi-gen.+hard EM",
            Method::CondSelf => "Cond. self-learning",
        }
    }

    /// Methods that use the cause/effect partition.
    pub fn uses_partition(self) -> bool {
        !matches!(self, Method::Supervised | Method::LabelProp)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSettings {
    pub reg: Regularization,
    pub em: EmOptions,
    /// Ridge strength of the conditional self-learning regressors.
    pub condself_lambda: f64,
    pub labelprop: LabelPropConfig,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            reg: Regularization::default(),
            em: EmOptions::default(),
            condself_lambda: 1.0,
            labelprop: LabelPropConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSource {
    /// A fresh dataset of `n_labelled + n_unlabelled` rows is drawn every run.
    Synthetic { name: String, config: SynthConfig },
    /// Splits are resampled from the same rows every run.
    Fixed { name: String, data: Dataset },
}

impl DatasetSource {
    pub fn preset(name: &str) -> Result<Self> {
        Ok(DatasetSource::Synthetic { name: name.to_ascii_lowercase(), config: synth::preset(name)? })
    }

    pub fn name(&self) -> &str {
        match self {
            DatasetSource::Synthetic { name, .. } | DatasetSource::Fixed { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Protocol {
    pub source: DatasetSource,
    pub n_labelled: usize,
    pub n_unlabelled: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    pub swap_roles: bool,
    pub standardize: bool,
    pub settings: MethodSettings,
}

impl Protocol {
    /// The synthetic-data protocol: 10 labelled and 200 unlabelled rows, 100 runs.
    pub fn synthetic(preset: &str, methods: &[Method], master_seed: u64) -> Result<Self> {
        Ok(Self {
            source: DatasetSource::preset(preset)?,
            n_labelled: 10,
            n_unlabelled: 200,
            runs: 100,
            master_seed,
            methods: methods.to_vec(),
            swap_roles: false,
            standardize: false,
            settings: MethodSettings::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if self.n_labelled < 2 {
            return Err(Error::InvalidConfig("at least two labelled rows are required".into()));
        }
        if self.n_unlabelled == 0 {
            return Err(Error::InvalidConfig("transductive accuracy needs unlabelled rows".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        match &self.source {
            DatasetSource::Synthetic { config, .. } => config.validate(),
            DatasetSource::Fixed { data, .. } => {
                if data.labels().is_none() {
                    return Err(Error::MissingLabels);
                }
                let needed = self.n_labelled + self.n_unlabelled;
                if needed > data.len() {
                    return Err(Error::TooFewRows { needed, available: data.len() });
                }
                Ok(())
            }
        }
    }

    /// Label used for the dataset column of the report.
    pub fn dataset_label(&self) -> String {
        let mut s = self.source.name().to_string();
        if self.swap_roles {
            s.push_str("-swapped");
        }
        s
    }
}

/// Seed of run `run`: SplitMix64 applied to the master seed offset by the run index.
pub fn run_seed(master_seed: u64, run: usize) -> u64 {
    let mut z = master_seed.wrapping_add((run as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Dataset and split of one run, before any role swap.
pub fn prepare_run(p: &Protocol, run: usize) -> Result<(Dataset, Split)> {
    let mut rng = ChaCha20Rng::seed_from_u64(run_seed(p.master_seed, run));
    let ds = match &p.source {
        DatasetSource::Synthetic { config, .. } => synth::generate(config, p.n_labelled + p.n_unlabelled, &mut rng)?,
        DatasetSource::Fixed { data, .. } => data.clone(),
    };
    let ds = if p.standardize { ds.standardized() } else { ds };
    let split = data::sample_split(&ds, p.n_labelled, p.n_unlabelled, &mut rng)?;
    Ok((ds, split))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodRun {
    pub accuracy: f64,
    pub converged: bool,
}

/// Fits `method` on the split and scores it on the unlabelled rows.
pub fn evaluate(method: Method, ds: &Dataset, split: &Split, settings: &MethodSettings) -> Result<MethodRun> {
    let (lab, unl, truth) = ds.partition(split)?;
    let (predicted, converged) = match method {
        Method::Supervised => {
            let params = baselines::fit_supervised_logreg(&lab, settings.reg.logistic)?;
            (baselines::predict_logreg(&params, &unl.causes, &unl.effects)?, true)
        }
        Method::LabelProp => {
            let r = baselines::fit_label_propagation(&lab, &unl, &settings.labelprop)?;
            (r.labels, r.converged)
        }
        Method::SemigenSup => {
            let params = semigen::fit_supervised(&lab, &settings.reg)?;
            (semigen::predict(&params, &unl.causes, &unl.effects, 0.5)?, true)
        }
        Method::EmSoft | Method::EmHard => {
            let mode = if method == Method::EmSoft { EmMode::Soft } else { EmMode::Hard };
            let opts = EmOptions { reg: settings.reg, ..settings.em };
            let fit = semigen::fit_em(&lab, &unl, mode, &opts)?;
            (fit.labels, fit.converged)
        }
        Method::CondSelf => {
            let fit = condself::fit_condself(&lab, &unl, settings.condself_lambda)?;
            (fit.labels, true)
        }
    };
    Ok(MethodRun { accuracy: accuracy(&predicted, &truth), converged })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub run: usize,
    /// Fingerprint of the split the methods were fitted on; `None` if the run
    /// could not be prepared.
    pub split_fingerprint: Option<u64>,
    pub results: Vec<(Method, Result<MethodRun>)>,
}

fn evaluate_all(p: &Protocol, run: usize, prepared: Result<(Dataset, Split)>) -> RunOutcome {
    match prepared {
        Ok((ds, split)) => RunOutcome {
            run,
            split_fingerprint: Some(split.fingerprint()),
            results: p.methods.iter().map(|&m| (m, evaluate(m, &ds, &split, &p.settings))).collect(),
        },
        Err(e) => RunOutcome {
            run,
            split_fingerprint: None,
            results: p.methods.iter().map(|&m| (m, Err(e.clone()))).collect(),
        },
    }
}

/// Executes one run of the protocol, swapping roles first when `p.swap_roles` is set.
pub fn run_once(p: &Protocol, run: usize) -> RunOutcome {
    let prepared = prepare_run(p, run).and_then(|(ds, split)| {
        let ds = if p.swap_roles { data::swap_roles(&ds)? } else { ds };
        Ok((ds, split))
    });
    evaluate_all(p, run, prepared)
}

/// One run of the swap-roles ablation: the partition-using methods on the
/// original and on the role-swapped data, sharing one split.
pub fn ablation_run(p: &Protocol, run: usize) -> (RunOutcome, RunOutcome) {
    let causal = Protocol {
        methods: p.methods.iter().copied().filter(|m| m.uses_partition()).collect(),
        swap_roles: false,
        ..p.clone()
    };
    match prepare_run(&causal, run) {
        Ok((ds, split)) => {
            let swapped = data::swap_roles(&ds).map(|s| (s, split.clone()));
            (evaluate_all(&causal, run, Ok((ds, split))), evaluate_all(&causal, run, swapped))
        }
        Err(e) => (evaluate_all(&causal, run, Err(e.clone())), evaluate_all(&causal, run, Err(e))),
    }
}

/// Aggregate for one (method, dataset) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub dataset: String,
    pub mean: f64,
    /// Population standard deviation over completed runs.
    pub std: f64,
    pub runs: usize,
    pub failures: usize,
    pub nonconverged: usize,
    /// Accuracy of every completed run, in run order.
    pub accuracies: Vec<f64>,
}

impl MethodSummary {
    /// Summary statistics of `accuracies`. `NaN` mean and std when empty.
    pub fn from_accuracies(method: &str, dataset: &str, accuracies: Vec<f64>, failures: usize, nonconverged: usize) -> Self {
        let n = accuracies.len();
        let (mean, std) = if n == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let mean = accuracies.iter().sum::<f64>() / n as f64;
            let var = accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
            (mean, sqrt(var))
        };
        Self { method: method.to_string(), dataset: dataset.to_string(), mean, std, runs: n, failures, nonconverged, accuracies }
    }

    /// True when no completed run converged, rendered as "-" in tables.
    pub fn never_converged(&self) -> bool {
        self.runs > 0 && self.nonconverged == self.runs
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub entries: Vec<MethodSummary>,
}

impl BenchReport {
    pub fn get(&self, method: Method) -> Option<&MethodSummary> {
        self.entries.iter().find(|e| e.method == method.name())
    }

    pub fn merge(mut self, other: BenchReport) -> Self {
        self.entries.extend(other.entries);
        self
    }
}

/// Reduces per-run outcomes into a report. `outcomes` may arrive in any
/// order; they are sorted by run index first.
pub fn aggregate(dataset: &str, methods: &[Method], outcomes: &[RunOutcome]) -> BenchReport {
    let mut sorted: Vec<&RunOutcome> = outcomes.iter().collect();
    sorted.sort_by_key(|o| o.run);
    let entries = methods
        .iter()
        .map(|&m| {
            let mut accs = Vec::new();
            let (mut failures, mut nonconverged) = (0, 0);
            for o in &sorted {
                for (method, r) in &o.results {
                    if *method != m {
                        continue;
                    }
                    match r {
                        Ok(run) => {
                            accs.push(run.accuracy);
                            if !run.converged {
                                nonconverged += 1;
                            }
                        }
                        Err(_) => failures += 1,
                    }
                }
            }
            MethodSummary::from_accuracies(m.name(), dataset, accs, failures, nonconverged)
        })
        .collect();
    BenchReport { entries }
}

/// Runs the whole protocol sequentially.
pub fn run_protocol(p: &Protocol) -> Result<BenchReport> {
    p.validate()?;
    let outcomes: Vec<RunOutcome> = (0..p.runs).map(|r| run_once(p, r)).collect();
    Ok(aggregate(&p.dataset_label(), &p.methods, &outcomes))
}

/// Normal and role-swapped results of the partition-using methods on shared splits.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedReport {
    pub normal: BenchReport,
    pub swapped: BenchReport,
    /// Split fingerprints used by the (normal, swapped) arm of each run.
    pub split_fingerprints: Vec<(Option<u64>, Option<u64>)>,
}

/// Reduces ablation runs into a paired report.
pub fn aggregate_ablation(p: &Protocol, outcomes: &[(RunOutcome, RunOutcome)]) -> PairedReport {
    let methods: Vec<Method> = p.methods.iter().copied().filter(|m| m.uses_partition()).collect();
    let mut sorted: Vec<&(RunOutcome, RunOutcome)> = outcomes.iter().collect();
    sorted.sort_by_key(|(a, _)| a.run);
    let normal: Vec<RunOutcome> = sorted.iter().map(|(a, _)| a.clone()).collect();
    let swapped: Vec<RunOutcome> = sorted.iter().map(|(_, b)| b.clone()).collect();
    let name = p.source.name();
    PairedReport {
        normal: aggregate(name, &methods, &normal),
        swapped: aggregate(&alloc::format!("{name}-swapped"), &methods, &swapped),
        split_fingerprints: sorted.iter().map(|(a, b)| (a.split_fingerprint, b.split_fingerprint)).collect(),
    }
}

/// Runs the swap-roles ablation sequentially.
pub fn ablate_swap_roles(p: &Protocol) -> Result<PairedReport> {
    p.validate()?;
    if !p.methods.iter().any(|m| m.uses_partition()) {
        return Err(Error::InvalidConfig("the ablation needs at least one partition-using method".into()));
    }
    let outcomes: Vec<_> = (0..p.runs).map(|r| ablation_run(p, r)).collect();
    Ok(aggregate_ablation(p, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()), Some(m));
        }
        assert_eq!(Method::parse("tsvm"), None);
    }

    #[test]
    fn run_seeds_differ() {
        let seeds: Vec<u64> = (0..100).map(|r| run_seed(42, r)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_eq!(run_seed(42, 3), seeds[3]);
    }

    #[test]
    fn population_std() {
        let s = MethodSummary::from_accuracies("m", "d", alloc::vec![0.5, 1.0], 0, 0);
        assert_eq!(s.mean, 0.75);
        assert_eq!(s.std, 0.25);
        let empty = MethodSummary::from_accuracies("m", "d", Vec::new(), 3, 0);
        assert!(empty.mean.is_nan() && empty.failures == 3 && !empty.never_converged());
    }

    #[test]
    fn protocol_validation() {
        let mut p = Protocol::synthetic("s1", &[Method::EmSoft], 1).unwrap();
        p.validate().unwrap();
        p.runs = 0;
        assert!(p.validate().is_err());
        p.runs = 1;
        p.n_labelled = 1;
        assert!(p.validate().is_err());
        p.n_labelled = 10;
        p.methods.clear();
        assert!(p.validate().is_err());
    }
}
