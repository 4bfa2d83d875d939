//! Experiment drivers: size classes, bias-restricted training, layer
//! ablation, χ² and Kolmogorov-Smirnov feature analyses, lifetime sweeps and
//! the single-layer baseline. Also the on-disk results layout.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{self, FeatureRow, FEATURE_COUNT};
use crate::ingest::{ArticleCascade, Bias, ClassLabel};
use crate::model::{
    self, derive_seed, fit_and_score, stratified_shuffle_splits, CvConfig, Dataset, EvaluationReport,
};
use crate::netbuild::{build_network, truncate_by_lifetime, LayerKind};

/// Article size bins by number of distinct users involved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SizeClass {
    /// [0, 100)
    Small,
    /// [100, 1000)
    Medium,
    /// [1000, ∞)
    Large,
}

impl SizeClass {
    pub const ALL: [SizeClass; 3] = [SizeClass::Small, SizeClass::Medium, SizeClass::Large];

    pub fn of(n_users: usize) -> SizeClass {
        match n_users {
            0..=99 => SizeClass::Small,
            100..=999 => SizeClass::Medium,
            _ => SizeClass::Large,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizeClass::Small => "[0,100)",
            SizeClass::Medium => "[100,1000)",
            SizeClass::Large => "[1000,inf)",
        }
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Size selection for an experiment: one bin or the whole range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SizeFilter {
    #[default]
    All,
    Only(SizeClass),
}

impl SizeFilter {
    pub fn accepts(self, n_users: usize) -> bool {
        match self {
            SizeFilter::All => true,
            SizeFilter::Only(c) => SizeClass::of(n_users) == c,
        }
    }
}

impl fmt::Display for SizeFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeFilter::All => f.write_str("[0,inf)"),
            SizeFilter::Only(c) => c.fmt(f),
        }
    }
}

impl FromStr for SizeFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        match norm.as_str() {
            "all" | "[0,inf)" | "0-inf" => Ok(SizeFilter::All),
            "small" | "[0,100)" | "0-100" => Ok(SizeFilter::Only(SizeClass::Small)),
            "medium" | "[100,1000)" | "100-1000" => Ok(SizeFilter::Only(SizeClass::Medium)),
            "large" | "[1000,inf)" | "1000-inf" => Ok(SizeFilter::Only(SizeClass::Large)),
            _ => Err(Error::InvalidArgument(format!("unknown size class {s:?}"))),
        }
    }
}

pub fn partition_by_size(rows: &[FeatureRow]) -> BTreeMap<SizeClass, Vec<FeatureRow>> {
    let mut out: BTreeMap<SizeClass, Vec<FeatureRow>> = BTreeMap::new();
    for r in rows {
        out.entry(SizeClass::of(r.n_users)).or_default().push(r.clone());
    }
    out
}

/// A positive duration such as `1h` or `7d`, keeping its original spelling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lifetime {
    pub label: String,
    pub seconds: i64,
}

impl FromStr for Lifetime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let label = s.trim().to_string();
        let d = humantime::parse_duration(&label)
            .map_err(|e| Error::InvalidArgument(format!("bad duration {s:?}: {e}")))?;
        let seconds = d.as_secs() as i64;
        if seconds <= 0 {
            return Err(Error::InvalidArgument(format!("duration {s:?} must be at least one second")));
        }
        Ok(Lifetime { label, seconds })
    }
}

/// 1h, 6h, 12h, 1d, 2d, 3d, 7d.
pub fn default_lifetimes() -> Vec<Lifetime> {
    ["1h", "6h", "12h", "1d", "2d", "3d", "7d"]
        .iter()
        .map(|s| s.parse().expect("static ladder parses"))
        .collect()
}

/// Echo of one experiment cell's settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub size_class: SizeFilter,
    /// `None` trains on every bias.
    pub bias_train_filter: Option<Bias>,
    pub layers: Vec<LayerKind>,
    pub include_pure_tweets: bool,
    pub lifetime: Option<Lifetime>,
    pub excluded_sources: Vec<String>,
    pub cv: CvConfig,
}

impl ExperimentConfig {
    pub fn new(dataset: &str, cv: CvConfig) -> Self {
        ExperimentConfig {
            dataset: dataset.to_string(),
            size_class: SizeFilter::All,
            bias_train_filter: None,
            layers: LayerKind::ALL.to_vec(),
            include_pure_tweets: true,
            lifetime: None,
            excluded_sources: Vec::new(),
            cv,
        }
    }
}

/// Dataset over the given feature columns of `rows`.
pub fn dataset(rows: &[FeatureRow], cols: &[usize]) -> Dataset {
    Dataset {
        x: rows.iter().map(|r| cols.iter().map(|&c| r.features[c]).collect()).collect(),
        y: rows.iter().map(|r| r.label).collect(),
    }
}

fn column_names(cols: &[usize]) -> Vec<String> {
    let names = features::feature_names();
    cols.iter().map(|&c| names[c].clone()).collect()
}

fn filter_rows(rows: &[FeatureRow], size: SizeFilter, excluded: &[String]) -> Vec<FeatureRow> {
    rows.iter()
        .filter(|r| size.accepts(r.n_users) && !excluded.iter().any(|s| s == &r.source))
        .cloned()
        .collect()
}

/// Cross-validated evaluation on all 38 features of the rows in `size`.
pub fn evaluate(rows: &[FeatureRow], size: SizeFilter, cv: &CvConfig) -> Result<EvaluationReport> {
    let rows = filter_rows(rows, size, &[]);
    let cols: Vec<usize> = (0..FEATURE_COUNT).collect();
    model::stratified_shuffle_cv(&dataset(&rows, &cols), column_names(&cols), &format!("multi-layer {size}"), cv)
}

/// Cross-validated evaluation on one layer's nine features (no T, U).
pub fn layer_ablation(rows: &[FeatureRow], layer: LayerKind, size: SizeFilter, cv: &CvConfig) -> Result<EvaluationReport> {
    let rows = filter_rows(rows, size, &[]);
    let cols = features::layer_columns(layer);
    model::stratified_shuffle_cv(&dataset(&rows, &cols), column_names(&cols), &format!("layer {layer} {size}"), cv)
}

/// Trains a class-weighted model on articles of one political bias and tests
/// on every remaining article. Each fold trains on a stratified
/// `1 - test_fraction` share of the biased articles; the test set is every
/// other article, biased or not. Articles from `excluded_sources` are
/// dropped before anything else.
pub fn bias_restricted_eval(
    rows: &[FeatureRow],
    train_bias: Bias,
    excluded_sources: &[String],
    cv: &CvConfig,
) -> Result<EvaluationReport> {
    if train_bias == Bias::Unlabeled {
        return Err(Error::InvalidArgument("train bias must be left or right".into()));
    }
    let rows = filter_rows(rows, SizeFilter::All, excluded_sources);
    let biased: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].bias == train_bias).collect();
    if biased.is_empty() {
        return Err(Error::EmptySample(format!("no {train_bias}-biased articles")));
    }
    let biased_labels: Vec<ClassLabel> = biased.iter().map(|&i| rows[i].label).collect();
    if !biased_labels.contains(&ClassLabel::D) || !biased_labels.contains(&ClassLabel::M) {
        return Err(Error::SingleClass(format!("{train_bias}-biased articles cover one class")));
    }
    let splits = stratified_shuffle_splits(&biased_labels, cv.folds, cv.test_fraction, cv.seed)?;
    let cols: Vec<usize> = (0..FEATURE_COUNT).collect();
    let all = dataset(&rows, &cols);
    let mut cfg = cv.clone();
    cfg.train.balanced = true;
    let folds = splits
        .par_iter()
        .map(|s| {
            let train: BTreeSet<usize> = s.train.iter().map(|&k| biased[k]).collect();
            let test: Vec<usize> = (0..rows.len()).filter(|i| !train.contains(i)).collect();
            let train: Vec<usize> = train.into_iter().collect();
            fit_and_score(&all.subset(&train), &all.subset(&test), &cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut name = format!("trained on {train_bias}");
    if !excluded_sources.is_empty() {
        name.push_str(&format!(" excluding {}", excluded_sources.join(",")));
    }
    Ok(EvaluationReport::from_folds(&name, column_names(&cols), cfg, folds))
}

/// Feature-selection χ² per column of nonnegative `x`: for each class,
/// observed = sum of the feature over the class, expected = total sum ×
/// class share. Columns summing to zero score 0.
pub fn chi2_scores(x: &[Vec<f64>], y: &[ClassLabel]) -> Vec<f64> {
    let n = y.len() as f64;
    let width = x.first().map_or(0, Vec::len);
    let n_d = y.iter().filter(|&&l| l == ClassLabel::D).count() as f64;
    let shares = [n_d / n, (n - n_d) / n];
    (0..width)
        .map(|j| {
            let mut observed = [0.0; 2];
            for (row, &l) in x.iter().zip(y) {
                observed[(l == ClassLabel::M) as usize] += row[j];
            }
            let total = observed[0] + observed[1];
            if total <= 0.0 {
                return 0.0;
            }
            observed
                .iter()
                .zip(shares)
                .filter(|(_, s)| *s > 0.0)
                .map(|(o, s)| {
                    let e = total * s;
                    (o - e).powi(2) / e
                })
                .sum()
        })
        .collect()
}

/// Column-wise min-max scaling fitted on `x`; constant columns map to 0.
fn min_max_scale(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let width = x.first().map_or(0, Vec::len);
    let (lo, hi): (Vec<f64>, Vec<f64>) = (0..width)
        .map(|j| {
            x.iter()
                .map(|r| r[j])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
        })
        .unzip();
    x.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, &v)| if hi[j] > lo[j] { (v - lo[j]) / (hi[j] - lo[j]) } else { 0.0 })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub name: String,
    pub column: usize,
    pub score: f64,
}

/// Ranks the 38 features by χ² averaged over stratified shuffle-split
/// folds. Each fold scores its min-max scaled training portion.
pub fn chi2_ranking(rows: &[FeatureRow], cv: &CvConfig) -> Result<Vec<RankedFeature>> {
    let cols: Vec<usize> = (0..FEATURE_COUNT).collect();
    let data = dataset(rows, &cols);
    let splits = stratified_shuffle_splits(&data.y, cv.folds, cv.test_fraction, cv.seed)?;
    let per_fold: Vec<Vec<f64>> = splits
        .par_iter()
        .map(|s| {
            let train = data.subset(&s.train);
            chi2_scores(&min_max_scale(&train.x), &train.y)
        })
        .collect();
    let names = features::feature_names();
    let mut ranked: Vec<RankedFeature> = cols
        .iter()
        .map(|&c| RankedFeature {
            name: names[c].clone(),
            column: c,
            score: per_fold.iter().map(|f| f[c]).sum::<f64>() / per_fold.len() as f64,
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.column.cmp(&b.column)));
    Ok(ranked)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Whether equality is rejected at α = 0.05.
    pub rejected: bool,
}

pub const KS_ALPHA: f64 = 0.05;

/// Survival function of the Kolmogorov distribution, P(K > λ).
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // small-λ form of the CDF converges fast here
        let y = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let cdf: f64 = (1..=50)
            .map(|k| ((2 * k - 1) as f64).powi(2) * y)
            .map(f64::exp)
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / lambda;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let q: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum::<f64>()
            * 2.0;
        q.clamp(0.0, 1.0)
    }
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at
/// effective size n·m/(n+m).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample("KS test needs two nonempty samples".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] <= v {
            i += 1;
        }
        while j < m && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let p_value = kolmogorov_survival(ne.sqrt() * d);
    Ok(KsResult { statistic: d, p_value, rejected: p_value < KS_ALPHA })
}

/// KS test of every feature between classes, sorted by decreasing statistic.
pub fn ks_ranking(rows: &[FeatureRow]) -> Result<Vec<(RankedFeature, KsResult)>> {
    let names = features::feature_names();
    let mut out = (0..FEATURE_COUNT)
        .map(|c| {
            let pick = |l: ClassLabel| -> Vec<f64> {
                rows.iter().filter(|r| r.label == l).map(|r| r.features[c]).collect()
            };
            let ks = ks_two_sample(&pick(ClassLabel::D), &pick(ClassLabel::M))?;
            Ok((RankedFeature { name: names[c].clone(), column: c, score: ks.statistic }, ks))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.0.score.total_cmp(&a.0.score).then(a.0.column.cmp(&b.0.column)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalPoint {
    pub lifetime: Lifetime,
    pub report: EvaluationReport,
}

/// Truncates every cascade to each lifetime, rebuilds networks and features
/// and runs the same cross-validation (same seed) on all articles.
pub fn temporal_sweep(cascades: &[ArticleCascade], lifetimes: &[Lifetime], cv: &CvConfig) -> Result<Vec<TemporalPoint>> {
    lifetimes
        .iter()
        .map(|lt| {
            let truncated = cascades
                .iter()
                .map(|c| truncate_by_lifetime(c, lt.seconds))
                .collect::<Result<Vec<_>>>()?;
            let rows = features::featurize_cascades(&truncated)?;
            let cols: Vec<usize> = (0..FEATURE_COUNT).collect();
            let report = model::stratified_shuffle_cv(
                &dataset(&rows, &cols),
                column_names(&cols),
                &format!("lifetime {}", lt.label),
                cv,
            )?;
            Ok(TemporalPoint { lifetime: lt.clone(), report })
        })
        .collect()
}

/// Single-layer feature rows (aggregated graph metrics + T + U) per cascade.
pub fn single_layer_dataset(cascades: &[ArticleCascade]) -> Result<Dataset> {
    let rows = cascades
        .par_iter()
        .map(|c| build_network(c).map(|net| features::single_layer_features(&net).to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        x: rows,
        y: cascades.iter().map(|c| c.label.class_label).collect(),
    })
}

/// Cross-validated baseline that merges all layers into one graph.
pub fn single_layer_baseline(cascades: &[ArticleCascade], cv: &CvConfig) -> Result<EvaluationReport> {
    let data = single_layer_dataset(cascades)?;
    model::stratified_shuffle_cv(&data, features::single_layer_names(), "single-layer baseline", cv)
}

/// Writes one experiment cell: `config.json`, `folds.csv` (metric table),
/// `report.txt` and `report.json` under `root/cell_id`.
pub fn write_cell(root: &Path, cell_id: &str, config: &ExperimentConfig, report: &EvaluationReport) -> Result<()> {
    let dir = root.join(cell_id);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)? + "\n")?;
    fs::write(dir.join("folds.csv"), report.to_metric_table())?;
    fs::write(dir.join("report.txt"), report.to_text())?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

/// Writes `root/index.csv` summarizing the given cells.
pub fn write_index(root: &Path, cells: &[(String, EvaluationReport)]) -> Result<()> {
    fs::create_dir_all(root)?;
    let mut wtr = csv::Writer::from_path(root.join("index.csv"))?;
    wtr.write_record([
        "cell", "name", "n_features", "folds", "auroc_mean", "auroc_std", "precision_mean", "precision_std",
        "recall_mean", "recall_std", "f1_mean", "f1_std",
    ])?;
    for (id, r) in cells {
        wtr.write_record([
            id.clone(),
            r.name.clone(),
            r.feature_names.len().to_string(),
            r.folds.len().to_string(),
            r.auroc.mean.to_string(),
            r.auroc.std.to_string(),
            r.precision.mean.to_string(),
            r.precision.std.to_string(),
            r.recall.mean.to_string(),
            r.recall.std.to_string(),
            r.f1.mean.to_string(),
            r.f1.std.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Seed for a named cell of a grid run.
pub fn cell_seed(master: u64, cell_id: &str) -> u64 {
    let h = cell_id
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    derive_seed(master, h)
}
