use causal_ssl_core::data::{sample_split, Dataset};
use causal_ssl_core::linalg::Matrix;
use causal_ssl_core::semigen::{self, EmMode, EmOptions, SemiGenParams};
use causal_ssl_core::synth::{generate, preset};
use causal_ssl_core::{accuracy, Labelled, LogisticParams, Regularization, RidgeParams, Unlabelled};
use rand::{Rng, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};

const LN_2PI: f64 = 1.8378770664093453;

fn random_params(rng: &mut impl Rng, d_c: usize, d_e: usize) -> SemiGenParams {
    let mut mech = || RidgeParams {
        coef: Matrix::from_vec(d_c + 1, d_e, (0..(d_c + 1) * d_e).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap(),
    };
    let mech = [mech(), mech()];
    let prior = LogisticParams {
        weights: (0..d_c).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        intercept: rng.gen_range(-1.0..1.0),
    };
    let noise = [
        (0..d_e).map(|_| rng.gen_range(0.01..3.0)).collect(),
        (0..d_e).map(|_| rng.gen_range(0.01..3.0)).collect(),
    ];
    SemiGenParams::new(prior, mech, noise).unwrap()
}

/// `log N(x_E; Θ_cᵀ[x_C, 1], diag(σ²_c))` written out from the parameter arrays.
fn gauss_oracle(p: &SemiGenParams, class: usize, x_c: &[f64], x_e: &[f64]) -> f64 {
    let coef = &p.mech[class].coef;
    let d_c = x_c.len();
    let mut acc = 0.0;
    for j in 0..x_e.len() {
        let mut mean = coef[(d_c, j)];
        for k in 0..d_c {
            mean += coef[(k, j)] * x_c[k];
        }
        let v = p.noise[class][j];
        acc += -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x_e[j] - mean).powi(2) / (2.0 * v);
    }
    acc
}

fn prior_oracle(p: &SemiGenParams, x_c: &[f64]) -> f64 {
    let z = p.prior.intercept + p.prior.weights.iter().zip(x_c).map(|(a, b)| a * b).sum::<f64>();
    1.0 / (1.0 + (-z).exp())
}

#[test]
fn posterior_normalizes_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let d_c = rng.gen_range(1..4);
        let d_e = rng.gen_range(1..4);
        let p = random_params(&mut rng, d_c, d_e);
        let x_c: Vec<f64> = (0..d_c).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let x_e: Vec<f64> = (0..d_e).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let p1 = semigen::posterior(&p, &x_c, &x_e).unwrap();
        // class-0 posterior computed the other way round, from the log joints
        let [l0, l1] = p.log_joint(&x_c, &x_e);
        let p0 = 1.0 / (1.0 + (l1 - l0).exp());
        assert!((p0 + p1 - 1.0).abs() < 1e-12, "{p0} + {p1}");
        assert!((0.0..=1.0).contains(&p1));
    }
}

#[test]
fn nll_matches_term_by_term_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let (n, d_c, d_e) = (rng.gen_range(1..12), rng.gen_range(1..3), rng.gen_range(1..3));
        let p = random_params(&mut rng, d_c, d_e);
        let causes = Matrix::from_vec(n, d_c, (0..n * d_c).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let effects = Matrix::from_vec(n, d_e, (0..n * d_e).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let hard: Vec<f64> = (0..n).map(|_| rng.gen_bool(0.5) as u8 as f64).collect();
        let soft: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        for resp in [&hard, &soft] {
            let mut oracle = 0.0;
            for i in 0..n {
                let (x_c, x_e) = (causes.row(i), effects.row(i));
                let pi = prior_oracle(&p, x_c);
                let r = resp[i];
                oracle -= r * (pi.ln() + gauss_oracle(&p, 1, x_c, x_e));
                oracle -= (1.0 - r) * ((1.0 - pi).ln() + gauss_oracle(&p, 0, x_c, x_e));
            }
            let got = semigen::nll(&p, &causes, &effects, resp).unwrap();
            assert!((got - oracle).abs() < 1e-9 * (1.0 + oracle.abs()), "{got} vs {oracle}");
        }
        let mut marginal = 0.0;
        for i in 0..n {
            let (x_c, x_e) = (causes.row(i), effects.row(i));
            let pi = prior_oracle(&p, x_c);
            marginal -= (pi * gauss_oracle(&p, 1, x_c, x_e).exp() + (1.0 - pi) * gauss_oracle(&p, 0, x_c, x_e).exp()).ln();
        }
        let got = semigen::marginal_nll(&p, &causes, &effects).unwrap();
        assert!((got - marginal).abs() < 1e-9 * (1.0 + marginal.abs()), "{got} vs {marginal}");
    }
}

#[test]
fn zero_residual_point_costs_label_term_plus_constant() {
    let mech = |b: f64| RidgeParams { coef: Matrix::from_rows(&[[1.0, -1.0], [b, 0.0]]).unwrap() };
    let p = SemiGenParams::new(
        LogisticParams { weights: vec![0.8], intercept: -0.3 },
        [mech(1.0), mech(-1.0)],
        [vec![1.0, 1.0], vec![1.0, 1.0]],
    )
    .unwrap();
    let x_c = [0.5];
    let x_e = [0.5 - 1.0, -0.5];
    let got = semigen::nll(&p, &Matrix::from_rows(&[x_c]).unwrap(), &Matrix::from_rows(&[x_e]).unwrap(), &[1.0]).unwrap();
    let expected = -prior_oracle(&p, &x_c).ln() + LN_2PI;
    assert!((got - expected).abs() < 1e-12);
}

fn labelled(ds: &Dataset) -> Labelled {
    Labelled { causes: ds.causes().clone(), effects: ds.effects().clone(), labels: ds.labels().unwrap().to_vec() }
}

#[test]
fn supervised_fit_recovers_s1_mechanism() {
    let cfg = preset("s1").unwrap();
    let ds = generate(&cfg, 500, &mut ChaCha20Rng::seed_from_u64(500)).unwrap();
    let fit = semigen::fit_supervised(&labelled(&ds), &Regularization::default()).unwrap();
    let (a0, b0) = (fit.mech[0].coef[(0, 0)], fit.mech[0].coef[(1, 0)]);
    assert!((a0 - 1.0).abs() <= 0.1, "A_0 = {a0}");
    assert!((b0 - 2.0).abs() <= 0.2, "b_0 = {b0}");
}

#[test]
fn noiseless_class_line_is_recovered() {
    let xs = [-2.0, -1.0, 0.5, 1.0, 3.0];
    let mut causes: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
    let mut effects: Vec<[f64; 1]> = xs.iter().map(|&x| [2.0 * x]).collect();
    let mut labels = vec![0u8; xs.len()];
    causes.extend([[0.0], [1.0]]);
    effects.extend([[5.0], [-3.0]]);
    labels.extend([1, 1]);
    let lab = Labelled { causes: Matrix::from_rows(&causes).unwrap(), effects: Matrix::from_rows(&effects).unwrap(), labels };
    let reg = Regularization { ridge: 1e-12, logistic: 1.0 };
    let fit = semigen::fit_supervised(&lab, &reg).unwrap();
    assert!((fit.mech[0].coef[(0, 0)] - 2.0).abs() < 1e-9);
    assert_eq!(fit.noise[0], vec![1e-6]);
}

/// The labelled-data objective minimized by `fit_supervised`, evaluated from
/// a flat parameter vector `[w, b, a0, c0, log v0, a1, c1, log v1]` (d_C = d_E = 1).
fn supervised_objective(theta: &[f64], lab: &Labelled, reg: &Regularization) -> f64 {
    let (w, b) = (theta[0], theta[1]);
    let mut acc = 0.5 * reg.logistic * w * w;
    for c in 0..2 {
        let (a, off, v) = (theta[2 + 3 * c], theta[3 + 3 * c], theta[4 + 3 * c].exp());
        acc += reg.ridge * (a * a + off * off) / (2.0 * v);
    }
    for i in 0..lab.len() {
        let (x, e) = (lab.causes[(i, 0)], lab.effects[(i, 0)]);
        let y = lab.labels[i] as usize;
        let z = w * x + b;
        acc += if y == 1 { (1.0 + (-z).exp()).ln() } else { (1.0 + z.exp()).ln() };
        let (a, off, v) = (theta[2 + 3 * y], theta[3 + 3 * y], theta[4 + 3 * y].exp());
        acc += 0.5 * (2.0 * std::f64::consts::PI * v).ln() + (e - a * x - off).powi(2) / (2.0 * v);
    }
    acc
}

#[test]
fn supervised_fit_matches_numeric_minimizer() {
    let cfg = preset("s1").unwrap();
    let ds = generate(&cfg, 40, &mut ChaCha20Rng::seed_from_u64(41)).unwrap();
    let lab = labelled(&ds);
    let reg = Regularization::default();
    let fit = semigen::fit_supervised(&lab, &reg).unwrap();

    // gradient descent with central-difference gradients and backtracking
    let f = |t: &[f64]| supervised_objective(t, &lab, &reg);
    let mut theta = vec![0.0; 8];
    let mut fx = f(&theta);
    for _ in 0..20_000 {
        let h = 1e-6;
        let g: Vec<f64> = (0..8)
            .map(|k| {
                let (mut up, mut dn) = (theta.clone(), theta.clone());
                up[k] += h;
                dn[k] -= h;
                (f(&up) - f(&dn)) / (2.0 * h)
            })
            .collect();
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg < 1e-16 {
            break;
        }
        let mut step = 1.0;
        loop {
            let cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
            let fc = f(&cand);
            if fc <= fx - 1e-4 * step * gg || step < 1e-12 {
                theta = cand;
                fx = fc;
                break;
            }
            step *= 0.5;
        }
    }

    let ours = [
        fit.prior.weights[0],
        fit.prior.intercept,
        fit.mech[0].coef[(0, 0)],
        fit.mech[0].coef[(1, 0)],
        fit.noise[0][0].ln(),
        fit.mech[1].coef[(0, 0)],
        fit.mech[1].coef[(1, 0)],
        fit.noise[1][0].ln(),
    ];
    let ours_obj = f(&ours);
    assert!((ours_obj - fx).abs() <= 1e-4, "closed form {ours_obj} vs numeric {fx}");
    let penalty = fit.penalty(&reg);
    let resp: Vec<f64> = lab.labels.iter().map(|&y| y as f64).collect();
    let nll = semigen::nll(&fit, &lab.causes, &lab.effects, &resp).unwrap();
    assert!((nll + penalty - ours_obj).abs() < 1e-9);
}

fn instance(preset_name: &str, seed: u64) -> (Labelled, Unlabelled, Vec<u8>) {
    let cfg = preset(preset_name).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let ds = generate(&cfg, 210, &mut rng).unwrap();
    let split = sample_split(&ds, 10, 200, &mut rng).unwrap();
    ds.partition(&split).unwrap()
}

#[test]
fn em_objective_never_increases() {
    for k in 0..50u64 {
        let name = if k % 2 == 0 { "s1" } else { "s2" };
        let (lab, unl, _) = instance(name, 1000 + k);
        for (mode, tol) in [(EmMode::Hard, 1e-8), (EmMode::Soft, 1e-6)] {
            let fit = semigen::fit_em(&lab, &unl, mode, &EmOptions::default()).unwrap();
            for w in fit.trace.records.windows(2) {
                assert!(
                    w[1].objective <= w[0].objective + tol,
                    "{name} seed {k} {mode:?}: iteration {} rose from {} to {}",
                    w[1].iteration,
                    w[0].objective,
                    w[1].objective
                );
                assert!(w[1].iteration > w[0].iteration);
            }
        }
    }
}

#[test]
fn em_trace_agrees_with_nll_evaluator() {
    let (lab, unl, _) = instance("s1", 77);
    let reg = Regularization::default();
    let init = semigen::fit_supervised(&lab, &reg).unwrap();
    let causes = lab.causes.vstack(&unl.causes).unwrap();
    let effects = lab.effects.vstack(&unl.effects).unwrap();

    let hard = semigen::fit_em(&lab, &unl, EmMode::Hard, &EmOptions::default()).unwrap();
    let guess = semigen::predict(&init, &unl.causes, &unl.effects, 0.5).unwrap();
    let resp: Vec<f64> = lab.labels.iter().chain(&guess).map(|&y| y as f64).collect();
    let expected = semigen::nll(&init, &causes, &effects, &resp).unwrap();
    assert!((hard.trace.records[0].nll - expected).abs() < 1e-9);
    // the returned hard fit is the best iterate of the trace
    let resp: Vec<f64> = lab.labels.iter().chain(&hard.labels).map(|&y| y as f64).collect();
    let final_obj = semigen::nll(&hard.params, &causes, &effects, &resp).unwrap() + hard.params.penalty(&reg);
    let best = hard.trace.records.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
    assert!((final_obj - best).abs() < 1e-9, "{final_obj} vs {best}");

    let soft = semigen::fit_em(&lab, &unl, EmMode::Soft, &EmOptions::default()).unwrap();
    let resp: Vec<f64> = lab.labels.iter().map(|&y| y as f64).collect();
    let last = soft.trace.records.last().unwrap();
    let expected = semigen::nll(&soft.params, &lab.causes, &lab.effects, &resp).unwrap()
        + semigen::marginal_nll(&soft.params, &unl.causes, &unl.effects).unwrap();
    assert!((last.nll - expected).abs() < 1e-9);
}

#[test]
fn em_without_unlabelled_rows_is_the_supervised_fit() {
    let (lab, unl, _) = instance("s2", 3);
    let empty = Unlabelled { causes: unl.causes.select_rows(&[]), effects: unl.effects.select_rows(&[]) };
    let sup = semigen::fit_supervised(&lab, &Regularization::default()).unwrap();
    for mode in [EmMode::Soft, EmMode::Hard] {
        let fit = semigen::fit_em(&lab, &empty, mode, &EmOptions::default()).unwrap();
        assert_eq!(fit.params, sup);
        assert!(fit.labels.is_empty());
    }
}

#[test]
fn flipping_labels_mirrors_the_fit() {
    let (lab, unl, truth) = instance("s1", 9);
    let flipped = Labelled { labels: lab.labels.iter().map(|y| 1 - y).collect(), ..lab.clone() };
    for mode in [EmMode::Soft, EmMode::Hard] {
        let a = semigen::fit_em(&lab, &unl, mode, &EmOptions::default()).unwrap();
        let b = semigen::fit_em(&flipped, &unl, mode, &EmOptions::default()).unwrap();
        assert!((a.params.prior.weights[0] + b.params.prior.weights[0]).abs() < 1e-6);
        assert!((a.params.prior.intercept + b.params.prior.intercept).abs() < 1e-6);
        for c in 0..2 {
            for (u, v) in a.params.mech[c].coef.as_slice().iter().zip(b.params.mech[1 - c].coef.as_slice()) {
                assert!((u - v).abs() < 1e-6);
            }
            assert!((a.params.noise[c][0] - b.params.noise[1 - c][0]).abs() < 1e-6);
        }
        let mirrored: Vec<u8> = b.labels.iter().map(|y| 1 - y).collect();
        assert_eq!(a.labels, mirrored);
        let flipped_truth: Vec<u8> = truth.iter().map(|y| 1 - y).collect();
        assert_eq!(accuracy(&a.labels, &truth), accuracy(&b.labels, &flipped_truth));
    }
}

#[test]
fn predict_thresholds_the_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let p = random_params(&mut rng, 2, 2);
        let causes = Matrix::from_vec(5, 2, (0..10).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let effects = Matrix::from_vec(5, 2, (0..10).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let t = rng.gen_range(0.05..0.95);
        let got = semigen::predict(&p, &causes, &effects, t).unwrap();
        for i in 0..5 {
            let post = semigen::posterior(&p, causes.row(i), effects.row(i)).unwrap();
            assert_eq!(got[i], (post > t) as u8);
        }
    }
}

#[test]
fn posterior_just_above_half_is_class_one() {
    let mech = |b: f64| RidgeParams { coef: Matrix::from_rows(&[[0.0], [b]]).unwrap() };
    let logit = (0.51f64 / 0.49).ln();
    let p = SemiGenParams::new(
        LogisticParams { weights: vec![0.0], intercept: logit },
        [mech(1.0), mech(1.0)],
        [vec![1.0], vec![1.0]],
    )
    .unwrap();
    let got = semigen::predict(&p, &Matrix::from_rows(&[[0.0]]).unwrap(), &Matrix::from_rows(&[[3.0]]).unwrap(), 0.5).unwrap();
    assert_eq!(got, vec![1]);
}

/// Mean accuracy of soft EM, hard EM and the labelled-only fit when both
/// classes share one effect mechanism.
fn degenerate_accuracies(base: &str) -> [f64; 3] {
    let mut cfg = preset(base).unwrap();
    cfg.effects[1] = cfg.effects[0].clone();
    let runs = 30;
    let mut acc = [0.0; 3];
    for r in 0..runs {
        let mut rng = ChaCha20Rng::seed_from_u64(9000 + r);
        let ds = generate(&cfg, 210, &mut rng).unwrap();
        let split = sample_split(&ds, 10, 200, &mut rng).unwrap();
        let (lab, unl, truth) = ds.partition(&split).unwrap();
        for (k, mode) in [EmMode::Soft, EmMode::Hard].into_iter().enumerate() {
            let fit = semigen::fit_em(&lab, &unl, mode, &EmOptions::default()).unwrap();
            acc[k] += accuracy(&fit.labels, &truth);
        }
        let sup = semigen::fit_supervised(&lab, &Regularization::default()).unwrap();
        acc[2] += accuracy(&semigen::predict(&sup, &unl.causes, &unl.effects, 0.5).unwrap(), &truth);
    }
    acc.map(|a| a / runs as f64)
}

fn check_degenerate(base: &str) {
    let [soft, hard, sup] = degenerate_accuracies(base);
    assert!((soft - sup).abs() < 0.05 && (hard - sup).abs() < 0.05, "{base}: soft {soft:.3}, hard {hard:.3}, supervised {sup:.3}");
}

#[test]
fn uninformative_effects_reduce_em_to_the_prior_s1() {
    check_degenerate("s1");
}

#[test]
fn uninformative_effects_reduce_em_to_the_prior_s2() {
    check_degenerate("s2");
}
