//! Standardization, L2-penalized logistic regression, evaluation metrics and
//! stratified shuffle-split cross-validation.
//!
//! Disinformation (`D`) is the positive class throughout: scores are
//! probabilities of `D` and AUROC ranks `D` above `M`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ClassLabel;

/// Feature rows and labels. All rows share one width.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<ClassLabel>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<ClassLabel>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} labels",
                x.len(),
                y.len()
            )));
        }
        if let Some(first) = x.first() {
            if x.iter().any(|r| r.len() != first.len()) {
                return Err(Error::InvalidArgument("ragged feature rows".into()));
            }
        }
        Ok(Dataset { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Keeps only the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        Dataset {
            x: self.x.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect(),
            y: self.y.clone(),
        }
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let d = self.y.iter().filter(|&&l| l == ClassLabel::D).count();
        (d, self.len() - d)
    }
}

/// Per-feature z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizerParams {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero marks a constant feature.
    pub std: Vec<f64>,
}

pub fn fit_standardizer(x: &[Vec<f64>]) -> Result<StandardizerParams> {
    let n = x.len();
    if n == 0 {
        return Err(Error::EmptySample("standardizer needs training rows".into()));
    }
    let width = x[0].len();
    let mut mean = vec![0.0; width];
    let mut std = vec![0.0; width];
    for j in 0..width {
        let m = x.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = x.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n as f64;
        let s = var.sqrt();
        mean[j] = m;
        // rounding noise on a constant column
        std[j] = if s <= 1e-12 * m.abs().max(1.0) { 0.0 } else { s };
    }
    Ok(StandardizerParams { mean, std })
}

impl StandardizerParams {
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| if s == 0.0 { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub c: f64,
}

impl LogisticModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.intercept
    }

    /// Probability of the positive class `D`.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }

    pub fn predict(&self, row: &[f64]) -> ClassLabel {
        if self.decision(row) > 0.0 {
            ClassLabel::D
        } else {
            ClassLabel::M
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Inverse regularization strength.
    pub c: f64,
    /// Reweight samples by N / (2 N_class).
    pub balanced: bool,
    /// Stop when the gradient max-norm is at or below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            balanced: false,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: LogisticModel,
    pub iterations: usize,
    pub converged: bool,
    /// Objective before the first step and after every accepted step.
    pub objective_trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(-m)) without overflow.
fn log1p_exp_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// Per-sample weights: all ones, or N / (2 N_class).
pub fn sample_weights(y: &[ClassLabel], balanced: bool) -> Result<Vec<f64>> {
    if !balanced {
        return Ok(vec![1.0; y.len()]);
    }
    let n = y.len() as f64;
    let d = y.iter().filter(|&&l| l == ClassLabel::D).count() as f64;
    let m = n - d;
    if d == 0.0 || m == 0.0 {
        return Err(Error::SingleClass("balanced weights need both classes".into()));
    }
    Ok(y.iter()
        .map(|&l| if l == ClassLabel::D { n / (2.0 * d) } else { n / (2.0 * m) })
        .collect())
}

/// 0.5‖w‖² + C Σ ω_i log(1 + exp(−y_i (w·x_i + b))), intercept unpenalized.
pub fn objective(w: &[f64], b: f64, x: &[Vec<f64>], y: &[ClassLabel], omega: &[f64], c: f64) -> f64 {
    let penalty = 0.5 * dot(w, w);
    let loss: f64 = x
        .iter()
        .zip(y)
        .zip(omega)
        .map(|((row, l), o)| o * log1p_exp_neg(l.sign() * (dot(w, row) + b)))
        .sum();
    penalty + c * loss
}

/// Gradient of [`objective`]; the last entry is the intercept component.
pub fn gradient(w: &[f64], b: f64, x: &[Vec<f64>], y: &[ClassLabel], omega: &[f64], c: f64) -> Vec<f64> {
    let p = w.len();
    let mut g: Vec<f64> = w.to_vec();
    g.push(0.0);
    for ((row, l), o) in x.iter().zip(y).zip(omega) {
        let s = l.sign();
        // d/dz log(1+exp(-s z)) = -s σ(-s z)
        let coef = -c * o * s * sigmoid(-s * (dot(w, row) + b));
        for j in 0..p {
            g[j] += coef * row[j];
        }
        g[p] += coef;
    }
    g
}

fn hessian(w: &[f64], b: f64, x: &[Vec<f64>], omega: &[f64], c: f64) -> DMatrix<f64> {
    let p = w.len();
    let mut h = DMatrix::<f64>::zeros(p + 1, p + 1);
    let mut aug = vec![0.0; p + 1];
    for (row, o) in x.iter().zip(omega) {
        let q = sigmoid(dot(w, row) + b);
        let k = c * o * q * (1.0 - q);
        if k == 0.0 {
            continue;
        }
        aug[..p].copy_from_slice(row);
        aug[p] = 1.0;
        for i in 0..=p {
            let ki = k * aug[i];
            for j in i..=p {
                h[(i, j)] += ki * aug[j];
            }
        }
    }
    for i in 0..=p {
        for j in 0..i {
            h[(i, j)] = h[(j, i)];
        }
    }
    for i in 0..p {
        h[(i, i)] += 1.0;
    }
    h
}

/// Fits the model with damped Newton steps and Armijo backtracking, which
/// keeps the objective non-increasing. Falls back to a gradient step when
/// the Hessian is numerically singular.
pub fn train_logistic(data: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let (d, m) = data.class_counts();
    if d == 0 || m == 0 {
        return Err(Error::SingleClass(format!("training set has {d} D and {m} M samples")));
    }
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(Error::InvalidArgument("C must be positive".into()));
    }
    let p = data.width();
    let omega = sample_weights(&data.y, cfg.balanced)?;
    let (x, y) = (&data.x, &data.y);
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut f = objective(&w, b, x, y, &omega, cfg.c);
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iter {
        let g = gradient(&w, b, x, y, &omega, cfg.c);
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if gmax <= cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let gv = DVector::from_vec(g.clone());
        let mut h = hessian(&w, b, x, &omega, cfg.c);
        // intercept curvature can vanish when all samples saturate
        h[(p, p)] += 1e-12;
        let dir = match h.cholesky() {
            Some(ch) => -ch.solve(&gv),
            None => -gv.clone(),
        };
        let mut slope = gv.dot(&dir);
        let dir = if slope < 0.0 {
            dir
        } else {
            slope = -gv.dot(&gv);
            -gv.clone()
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let w_new: Vec<f64> = w.iter().zip(dir.iter()).map(|(a, d)| a + step * d).collect();
            let b_new = b + step * dir[p];
            let f_new = objective(&w_new, b_new, x, y, &omega, cfg.c);
            if f_new <= f + 1e-4 * step * slope {
                w = w_new;
                b = b_new;
                f = f_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no representable descent left; treat as converged at float precision
            converged = gmax <= cfg.tol.max(1e-8);
            break;
        }
        trace.push(f);
    }
    Ok(TrainOutcome {
        model: LogisticModel { weights: w, intercept: b, c: cfg.c },
        iterations,
        converged,
        objective_trace: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub auroc: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Area under the ROC curve as the fraction of (D, M) pairs ranked in the
/// right order, ties counting one half. `scores` are for class `D`.
pub fn auroc(truth: &[ClassLabel], scores: &[f64]) -> Result<f64> {
    if truth.len() != scores.len() {
        return Err(Error::InvalidArgument("labels and scores differ in length".into()));
    }
    let n_pos = truth.iter().filter(|&&l| l == ClassLabel::D).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("AUROC needs both classes in the truth".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Mann-Whitney with midranks; sums are kept in half-units to stay exact
    let mut pos_rank_sum2 = 0u128;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1, midrank*2 = i + j + 2
        let mid2 = (i + j + 2) as u128;
        let pos_in_group = order[i..=j].iter().filter(|&&k| truth[k] == ClassLabel::D).count() as u128;
        pos_rank_sum2 += mid2 * pos_in_group;
        i = j + 1;
    }
    let np = n_pos as u128;
    let u2 = pos_rank_sum2 - np * (np + 1);
    Ok(u2 as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision, recall and F1 for `class`; zero denominators give 0.
pub fn class_prf(truth: &[ClassLabel], pred: &[ClassLabel], class: ClassLabel) -> (f64, f64, f64) {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for (&t, &p) in truth.iter().zip(pred) {
        match (t == class, p == class) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
    (precision, recall, f1)
}

/// AUROC plus macro (unweighted mean over D and M) precision, recall and F1.
pub fn metrics(truth: &[ClassLabel], pred: &[ClassLabel], scores: &[f64]) -> Result<Metrics> {
    if truth.is_empty() {
        return Err(Error::EmptySample("no samples to score".into()));
    }
    if truth.len() != pred.len() {
        return Err(Error::InvalidArgument("labels and predictions differ in length".into()));
    }
    let auroc = auroc(truth, scores)?;
    let (pd, rd, fd) = class_prf(truth, pred, ClassLabel::D);
    let (pm, rm, fm) = class_prf(truth, pred, ClassLabel::M);
    Ok(Metrics {
        auroc,
        precision: (pd + pm) / 2.0,
        recall: (rd + rm) / 2.0,
        f1: (fd + fm) / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StandardizeMode {
    /// Fit on each fold's training portion.
    #[default]
    TrainOnly,
    /// Fit once on the whole dataset before splitting.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub train: TrainConfig,
    pub standardize: StandardizeMode,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            test_fraction: 0.2,
            seed: 0,
            train: TrainConfig::default(),
            standardize: StandardizeMode::TrainOnly,
        }
    }
}

/// Mean and population standard deviation of one metric over folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Summary {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Summary { mean: 0.0, std: 0.0 };
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        Summary { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Free-form description of the experiment cell.
    pub name: String,
    pub feature_names: Vec<String>,
    pub config: CvConfig,
    pub folds: Vec<Metrics>,
    pub auroc: Summary,
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
}

impl EvaluationReport {
    pub fn from_folds(name: &str, feature_names: Vec<String>, config: CvConfig, folds: Vec<Metrics>) -> Self {
        EvaluationReport {
            name: name.to_string(),
            feature_names,
            config,
            auroc: Summary::of(folds.iter().map(|m| m.auroc)),
            precision: Summary::of(folds.iter().map(|m| m.precision)),
            recall: Summary::of(folds.iter().map(|m| m.recall)),
            f1: Summary::of(folds.iter().map(|m| m.f1)),
            folds,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: AUROC {:.4} ± {:.4}  Precision {:.4} ± {:.4}  Recall {:.4} ± {:.4}  F1 {:.4} ± {:.4}",
            self.name,
            self.auroc.mean,
            self.auroc.std,
            self.precision.mean,
            self.precision.std,
            self.recall.mean,
            self.recall.std,
            self.f1.mean,
            self.f1.std
        )
    }

    /// Human-readable document: configuration, per-fold table and summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.name);
        let _ = writeln!(
            s,
            "folds={} test_fraction={} seed={} C={} balanced={} standardize={:?} features={}",
            self.config.folds,
            self.config.test_fraction,
            self.config.seed,
            self.config.train.c,
            self.config.train.balanced,
            self.config.standardize,
            self.feature_names.len()
        );
        let _ = writeln!(s, "{:>4}  {:>8}  {:>9}  {:>8}  {:>8}", "fold", "AUROC", "Precision", "Recall", "F1");
        for (i, m) in self.folds.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:>4}  {:>8.4}  {:>9.4}  {:>8.4}  {:>8.4}",
                i, m.auroc, m.precision, m.recall, m.f1
            );
        }
        let _ = writeln!(s, "{}", self.summary_line());
        s
    }

    /// Machine-readable table keyed by metric: `metric,mean,std,fold0,...`.
    pub fn to_metric_table(&self) -> String {
        let mut s = String::from("metric,mean,std");
        for i in 0..self.folds.len() {
            let _ = write!(s, ",fold{i}");
        }
        s.push('\n');
        type Column = (&'static str, Summary, fn(&Metrics) -> f64);
        let rows: [Column; 4] = [
            ("auroc", self.auroc, |m| m.auroc),
            ("precision", self.precision, |m| m.precision),
            ("recall", self.recall, |m| m.recall),
            ("f1", self.f1, |m| m.f1),
        ];
        for (name, summary, get) in rows {
            let _ = write!(s, "{name},{},{}", summary.mean, summary.std);
            for m in &self.folds {
                let _ = write!(s, ",{}", get(m));
            }
            s.push('\n');
        }
        s
    }
}

/// Derives an independent RNG seed for a sub-stream (fold, cell, article).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ stream.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A train/test index split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Number of test samples drawn from a class of size `n`.
fn class_test_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n - 1)
}

/// Class-stratified random splits; fold `k` uses its own derived seed.
pub fn stratified_shuffle_splits(y: &[ClassLabel], folds: usize, test_fraction: f64, seed: u64) -> Result<Vec<Split>> {
    if folds == 0 {
        return Err(Error::InvalidArgument("at least one fold is required".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument("test fraction must be in (0, 1)".into()));
    }
    let by_class: Vec<Vec<usize>> = [ClassLabel::D, ClassLabel::M]
        .iter()
        .map(|&c| (0..y.len()).filter(|&i| y[i] == c).collect())
        .collect();
    for (c, idx) in [ClassLabel::D, ClassLabel::M].iter().zip(&by_class) {
        if idx.len() < 2 {
            return Err(Error::ClassTooSmall(format!("class {c} has {} samples", idx.len())));
        }
    }
    Ok((0..folds)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64));
            let mut split = Split { train: Vec::new(), test: Vec::new() };
            for idx in &by_class {
                let mut perm = idx.clone();
                perm.shuffle(&mut rng);
                let n_test = class_test_size(perm.len(), test_fraction);
                split.test.extend_from_slice(&perm[..n_test]);
                split.train.extend_from_slice(&perm[n_test..]);
            }
            split.train.sort_unstable();
            split.test.sort_unstable();
            split
        })
        .collect())
}

/// Fits on `train` and scores `test`, standardizing per `mode`.
pub fn fit_and_score(train: &Dataset, test: &Dataset, cfg: &CvConfig) -> Result<Metrics> {
    let (xtr, xte) = match cfg.standardize {
        StandardizeMode::TrainOnly => {
            let params = fit_standardizer(&train.x)?;
            (params.transform(&train.x), params.transform(&test.x))
        }
        StandardizeMode::Global => (train.x.clone(), test.x.clone()),
    };
    let outcome = train_logistic(&Dataset { x: xtr, y: train.y.clone() }, &cfg.train)?;
    let model = outcome.model;
    let scores: Vec<f64> = xte.iter().map(|r| model.predict_proba(r)).collect();
    let pred: Vec<ClassLabel> = xte.iter().map(|r| model.predict(r)).collect();
    metrics(&test.y, &pred, &scores)
}

/// Repeated stratified shuffle-split evaluation. Folds run in parallel on
/// the current rayon pool; results are ordered by fold index.
pub fn stratified_shuffle_cv(data: &Dataset, feature_names: Vec<String>, name: &str, cfg: &CvConfig) -> Result<EvaluationReport> {
    let splits = stratified_shuffle_splits(&data.y, cfg.folds, cfg.test_fraction, cfg.seed)?;
    let data = match cfg.standardize {
        StandardizeMode::TrainOnly => data.clone(),
        StandardizeMode::Global => {
            let params = fit_standardizer(&data.x)?;
            Dataset { x: params.transform(&data.x), y: data.y.clone() }
        }
    };
    let folds = splits
        .par_iter()
        .map(|s| fit_and_score(&data.subset(&s.train), &data.subset(&s.test), cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport::from_folds(name, feature_names, cfg.clone(), folds))
}
