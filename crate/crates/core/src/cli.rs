//! Command-line front end. Every run writes a `manifest.json` describing the
//! command, its settings, input digests and outputs before any result file.
//! Failures print one line `error: code=<code> <message>` to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentConfig, Lifetime, SizeFilter};
use crate::features::{self, FeatureRow};
use crate::ingest::{self, ArticleCascade, Bias};
use crate::model::{CvConfig, EvaluationReport, StandardizeMode, TrainConfig};
use crate::netbuild::{self, LayerKind};
use crate::synth::{self, GeneratorConfig};

pub const JOBS_ENV: &str = "DIFFNET_JOBS";

#[derive(Debug, Parser)]
#[command(name = "diffnet", version, about = "Multi-layer diffusion network classification")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = JOBS_ENV)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CvArgs {
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Inverse L2 regularization strength.
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = Standardize::Train)]
    pub standardize: Standardize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Standardize {
    /// Fit on each fold's training split.
    Train,
    /// Fit once on all samples.
    Global,
}

impl CvArgs {
    fn config(&self) -> CvConfig {
        CvConfig {
            folds: self.folds,
            test_fraction: self.test_fraction,
            seed: self.seed,
            train: TrainConfig { c: self.c, ..TrainConfig::default() },
            standardize: match self.standardize {
                Standardize::Train => StandardizeMode::TrainOnly,
                Standardize::Global => StandardizeMode::Global,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum RankMethod {
    Chi2,
    Ks,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum TrainBias {
    Left,
    Right,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Parse, censor and filter raw tweets into a cascades directory.
    Ingest {
        #[arg(long)]
        tweets: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Collection start (epoch seconds); defaults to the earliest tweet.
        #[arg(long)]
        start: Option<i64>,
        #[arg(long, default_value = "14d")]
        window: String,
        #[arg(long, default_value_t = 50)]
        min_tweets: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build networks and write the 43-column features table.
    Featurize {
        #[arg(long)]
        cascades: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write serialized networks to this file.
        #[arg(long)]
        networks: Option<PathBuf>,
    },
    /// Cross-validated evaluation on all 38 features.
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value = "all")]
        size_class: String,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long, default_value = "diffnet-results/evaluate")]
        out: PathBuf,
    },
    /// Cross-validated evaluation on a single layer's nine features.
    Ablate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        layer: String,
        #[arg(long, default_value = "all")]
        size_class: String,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long, default_value = "diffnet-results/ablate")]
        out: PathBuf,
    },
    /// Multi-layer model vs the single aggregated-graph baseline.
    BaselineSingleLayer {
        #[arg(long)]
        cascades: PathBuf,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long, default_value = "diffnet-results/baseline")]
        out: PathBuf,
    },
    /// Train on one political bias, test on the remaining articles.
    BiasEval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_enum)]
        train_bias: TrainBias,
        #[arg(long = "exclude-source")]
        exclude_source: Vec<String>,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long, default_value = "diffnet-results/bias-eval")]
        out: PathBuf,
    },
    /// Rank features by χ² score or KS statistic.
    RankFeatures {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_enum, default_value_t = RankMethod::Chi2)]
        method: RankMethod,
        #[arg(long, default_value_t = 5)]
        top: usize,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long, default_value = "diffnet-results/rank-features")]
        out: PathBuf,
    },
    /// Evaluate networks truncated to increasing lifetimes.
    Temporal {
        #[arg(long)]
        cascades: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1h,6h,12h,1d,2d,3d,7d")]
        lifetimes: Vec<String>,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long, default_value = "diffnet-results/temporal")]
        out: PathBuf,
    },
    /// Generate a synthetic labelled corpus.
    Synth {
        /// JSON generator config; defaults to the built-in one.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Featurize { .. } => "featurize",
            Command::Evaluate { .. } => "evaluate",
            Command::Ablate { .. } => "ablate",
            Command::BaselineSingleLayer { .. } => "baseline-single-layer",
            Command::BiasEval { .. } => "bias-eval",
            Command::RankFeatures { .. } => "rank-features",
            Command::Temporal { .. } => "temporal",
            Command::Synth { .. } => "synth",
        }
    }
}

/// Provenance record written before any result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    /// Input path → SHA-256 hex digest. Directories digest their files in name order.
    pub input_digests: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    /// Recomputes the input digests and reports the first mismatch.
    pub fn verify_inputs(&self) -> Result<()> {
        for (path, digest) in &self.input_digests {
            let now = digest_path(Path::new(path))?;
            if &now != digest {
                return Err(Error::Format(format!("input {path} changed since the run")));
            }
        }
        Ok(())
    }
}

pub fn digest_path(path: &Path) -> Result<String> {
    let mut h = Sha256::new();
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.sort();
        for p in entries.into_iter().filter(|p| p.is_file()) {
            if p.file_name().is_some_and(|n| n == "manifest.json") {
                continue;
            }
            h.update(p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default());
            h.update(fs::read(&p)?);
        }
    } else {
        h.update(fs::read(path)?);
    }
    Ok(hex::encode(h.finalize()))
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("missing input {}", path.display()),
        )))
    }
}

fn write_manifest(at: &Path, cmd: &Command, inputs: &[&Path], seed: Option<u64>, outputs: &[PathBuf]) -> Result<()> {
    let mut digests = BTreeMap::new();
    for p in inputs {
        require(p)?;
        digests.insert(p.display().to_string(), digest_path(p)?);
    }
    let manifest = RunManifest {
        command: cmd.name().to_string(),
        config: serde_json::to_value(cmd)?,
        input_digests: digests,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    if let Some(parent) = at.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(at, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Reads `tweets.jsonl` + `labels.csv` from a cascades directory.
pub fn load_cascades(dir: &Path) -> Result<Vec<ArticleCascade>> {
    let tweets = dir.join("tweets.jsonl");
    let labels = dir.join("labels.csv");
    require(&tweets)?;
    require(&labels)?;
    let parsed = ingest::parse_records(BufReader::new(fs::File::open(&tweets)?))?;
    let labels = ingest::read_labels(fs::File::open(&labels)?)?;
    Ok(ingest::group_by_article(parsed.records, &labels))
}

fn load_features(path: &Path) -> Result<Vec<FeatureRow>> {
    require(path)?;
    features::read_feature_table(BufReader::new(fs::File::open(path)?))
}

fn write_cells(out: &Path, dataset: &Path, cells: &[(String, ExperimentConfig, EvaluationReport)]) -> Result<()> {
    for (id, cfg, report) in cells {
        let mut cfg = cfg.clone();
        cfg.dataset = dataset.display().to_string();
        experiments::write_cell(out, id, &cfg, report)?;
    }
    let index: Vec<(String, EvaluationReport)> = cells.iter().map(|(id, _, r)| (id.clone(), r.clone())).collect();
    experiments::write_index(out, &index)
}

/// Runs a parsed command, writing human-readable output to `stdout`.
pub fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Ingest { tweets, labels, start, window, min_tweets, out } => {
            let manifest = out.join("manifest.json");
            let outputs = [out.join("tweets.jsonl"), out.join("labels.csv")];
            write_manifest(&manifest, cmd, &[tweets, labels], None, &outputs)?;
            let window: Lifetime = window.parse()?;
            let parsed = ingest::parse_records(BufReader::new(fs::File::open(tweets)?))?;
            let label_map = ingest::read_labels(fs::File::open(labels)?)?;
            let start = match start {
                Some(s) => *s,
                None => parsed.records.iter().map(|r| r.timestamp).min().unwrap_or(1),
            };
            let (malformed, duplicates, total) = (parsed.malformed, parsed.duplicates, parsed.records.len());
            let cascades = ingest::group_by_article(parsed.records, &label_map);
            let cascades = ingest::apply_censoring(cascades, start, window.seconds)?;
            let cascades = ingest::filter_min_tweets(cascades, *min_tweets)?;
            let (records, kept_labels) = ingest::flatten(&cascades);
            ingest::write_records(BufWriter::new(fs::File::create(&outputs[0])?), &records)?;
            ingest::write_labels(fs::File::create(&outputs[1])?, &kept_labels)?;
            writeln!(
                stdout,
                "ingest: read={total} malformed={malformed} duplicates={duplicates} articles={} tweets={}",
                cascades.len(),
                records.len()
            )?;
        }
        Command::Featurize { cascades, out, networks } => {
            let mut outputs = vec![out.clone()];
            outputs.extend(networks.iter().cloned());
            write_manifest(&sidecar(out), cmd, &[cascades], None, &outputs)?;
            let cs = load_cascades(cascades)?;
            let rows = features::featurize_cascades(&cs)?;
            features::write_feature_table(BufWriter::new(fs::File::create(out)?), &rows)?;
            if let Some(path) = networks {
                let mut w = BufWriter::new(fs::File::create(path)?);
                for c in &cs {
                    netbuild::write_network(&mut w, &netbuild::build_network(c)?)?;
                }
                w.flush()?;
            }
            writeln!(stdout, "featurize: articles={} columns={}", rows.len(), 5 + features::FEATURE_COUNT)?;
        }
        Command::Evaluate { features, size_class, cv, out } => {
            write_manifest(&out.join("manifest.json"), cmd, &[features], Some(cv.seed), &[out.join("index.csv")])?;
            let size: SizeFilter = size_class.parse()?;
            let rows = load_features(features)?;
            let cfg = cv.config();
            let report = experiments::evaluate(&rows, size, &cfg)?;
            let mut ecfg = ExperimentConfig::new("", cfg);
            ecfg.size_class = size;
            write_cells(out, features, &[("multi-layer".into(), ecfg, report.clone())])?;
            write!(stdout, "{}", report.to_text())?;
        }
        Command::Ablate { features, layer, size_class, cv, out } => {
            write_manifest(&out.join("manifest.json"), cmd, &[features], Some(cv.seed), &[out.join("index.csv")])?;
            let layer: LayerKind = layer.parse()?;
            let size: SizeFilter = size_class.parse()?;
            let rows = load_features(features)?;
            let cfg = cv.config();
            let report = experiments::layer_ablation(&rows, layer, size, &cfg)?;
            let mut ecfg = ExperimentConfig::new("", cfg);
            ecfg.size_class = size;
            ecfg.layers = vec![layer];
            ecfg.include_pure_tweets = false;
            write_cells(out, features, &[(format!("layer-{layer}"), ecfg, report.clone())])?;
            write!(stdout, "{}", report.to_text())?;
        }
        Command::BaselineSingleLayer { cascades, cv, out } => {
            write_manifest(&out.join("manifest.json"), cmd, &[cascades], Some(cv.seed), &[out.join("index.csv")])?;
            let cs = load_cascades(cascades)?;
            let cfg = cv.config();
            let rows = features::featurize_cascades(&cs)?;
            let multi = experiments::evaluate(&rows, SizeFilter::All, &cfg)?;
            let single = experiments::single_layer_baseline(&cs, &cfg)?;
            let mut single_cfg = ExperimentConfig::new("", cfg.clone());
            single_cfg.layers = Vec::new();
            write_cells(
                out,
                cascades,
                &[
                    ("multi-layer".into(), ExperimentConfig::new("", cfg), multi.clone()),
                    ("single-layer".into(), single_cfg, single.clone()),
                ],
            )?;
            writeln!(stdout, "{}", multi.summary_line())?;
            writeln!(stdout, "{}", single.summary_line())?;
        }
        Command::BiasEval { features, train_bias, exclude_source, cv, out } => {
            write_manifest(&out.join("manifest.json"), cmd, &[features], Some(cv.seed), &[out.join("index.csv")])?;
            let bias = match train_bias {
                TrainBias::Left => Bias::Left,
                TrainBias::Right => Bias::Right,
            };
            let rows = load_features(features)?;
            let report = experiments::bias_restricted_eval(&rows, bias, exclude_source, &cv.config())?;
            let mut ecfg = ExperimentConfig::new("", report.config.clone());
            ecfg.bias_train_filter = Some(bias);
            ecfg.excluded_sources = exclude_source.clone();
            write_cells(out, features, &[(format!("bias-{bias}"), ecfg, report.clone())])?;
            write!(stdout, "{}", report.to_text())?;
        }
        Command::RankFeatures { features, method, top, cv, out } => {
            let table = out.join("ranking.csv");
            write_manifest(&out.join("manifest.json"), cmd, &[features], Some(cv.seed), std::slice::from_ref(&table))?;
            let rows = load_features(features)?;
            let mut wtr = csv::Writer::from_path(&table)?;
            match method {
                RankMethod::Chi2 => {
                    let ranked = experiments::chi2_ranking(&rows, &cv.config())?;
                    wtr.write_record(["rank", "feature", "chi2"])?;
                    for (i, f) in ranked.iter().enumerate() {
                        wtr.write_record([(i + 1).to_string(), f.name.clone(), f.score.to_string()])?;
                        if i < *top {
                            writeln!(stdout, "{:>2} {:<8} chi2={:.4}", i + 1, f.name, f.score)?;
                        }
                    }
                }
                RankMethod::Ks => {
                    let ranked = experiments::ks_ranking(&rows)?;
                    wtr.write_record(["rank", "feature", "ks_statistic", "p_value", "rejected"])?;
                    for (i, (f, ks)) in ranked.iter().enumerate() {
                        wtr.write_record([
                            (i + 1).to_string(),
                            f.name.clone(),
                            ks.statistic.to_string(),
                            ks.p_value.to_string(),
                            ks.rejected.to_string(),
                        ])?;
                        if i < *top {
                            writeln!(
                                stdout,
                                "{:>2} {:<8} D={:.4} p={:.3e} rejected={}",
                                i + 1,
                                f.name,
                                ks.statistic,
                                ks.p_value,
                                ks.rejected
                            )?;
                        }
                    }
                }
            }
            wtr.flush()?;
        }
        Command::Temporal { cascades, lifetimes, cv, out } => {
            let series = out.join("temporal.csv");
            write_manifest(&out.join("manifest.json"), cmd, &[cascades], Some(cv.seed), &[series.clone(), out.join("index.csv")])?;
            let ladder = lifetimes.iter().map(|s| s.parse()).collect::<Result<Vec<Lifetime>>>()?;
            let cs = load_cascades(cascades)?;
            let cfg = cv.config();
            let points = experiments::temporal_sweep(&cs, &ladder, &cfg)?;
            let cells: Vec<_> = points
                .iter()
                .map(|p| {
                    let mut ecfg = ExperimentConfig::new("", cfg.clone());
                    ecfg.lifetime = Some(p.lifetime.clone());
                    (format!("lifetime-{}", p.lifetime.label), ecfg, p.report.clone())
                })
                .collect();
            write_cells(out, cascades, &cells)?;
            let mut wtr = csv::Writer::from_path(&series)?;
            wtr.write_record([
                "lifetime", "seconds", "auroc_mean", "auroc_std", "precision_mean", "recall_mean", "f1_mean",
            ])?;
            for p in &points {
                let r = &p.report;
                wtr.write_record([
                    p.lifetime.label.clone(),
                    p.lifetime.seconds.to_string(),
                    r.auroc.mean.to_string(),
                    r.auroc.std.to_string(),
                    r.precision.mean.to_string(),
                    r.recall.mean.to_string(),
                    r.f1.mean.to_string(),
                ])?;
                writeln!(stdout, "{:>5}  AUROC {:.4} ± {:.4}", p.lifetime.label, r.auroc.mean, r.auroc.std)?;
            }
            wtr.flush()?;
        }
        Command::Synth { config, seed, out } => {
            let inputs: Vec<&Path> = config.iter().map(PathBuf::as_path).collect();
            let outputs = [out.join("tweets.jsonl"), out.join("labels.csv"), out.join("config.json")];
            let mut cfg = match config {
                Some(p) => {
                    require(p)?;
                    serde_json::from_reader(BufReader::new(fs::File::open(p)?))?
                }
                None => GeneratorConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            write_manifest(&out.join("manifest.json"), cmd, &inputs, Some(cfg.seed), &outputs)?;
            let corpus = synth::generate_corpus(&cfg)?;
            corpus.write_to(out)?;
            fs::write(&outputs[2], serde_json::to_string_pretty(&cfg)? + "\n")?;
            writeln!(stdout, "synth: articles={} tweets={}", corpus.labels.len(), corpus.records.len())?;
        }
    }
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

/// Parses arguments, runs the command on a pool of `--jobs` threads and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: code=usage {first}");
            return 2;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: code=runtime {e}");
            return 1;
        }
    };
    let stdout = std::io::stdout();
    let result = pool.install(|| execute(&cli.command, &mut stdout.lock()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: code={} {msg}", e.code());
            1
        }
    }
}
