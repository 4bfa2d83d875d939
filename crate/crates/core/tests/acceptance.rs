//! Acceptance suite. Every test prints one `[PASS]`/`[FAIL] criterion N`
//! line; run with `--nocapture` to see them.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::Matrix;
use diffnet::experiments::{self, default_lifetimes, ks_two_sample, SizeFilter, TemporalPoint};
use diffnet::features::{self, feature_names, featurize_cascades, FeatureRow, FEATURE_COUNT};
use diffnet::graphops::*;
use diffnet::ingest::{self, ArticleCascade, ClassLabel};
use diffnet::model::{self, CvConfig, EvaluationReport, TrainConfig};
use diffnet::netbuild::{self, LayerKind};
use diffnet::synth::{generate_corpus, GeneratorConfig};
use rand::seq::SliceRandom;
use rand::Rng;

const ORACLE_GRAPHS: u64 = 300;
const ORACLE_MAX_NODES: usize = 8;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const REAL_TOL: f64 = 1e-9;
const AUROC_TRAPEZOID_TOL: f64 = 1e-12;
const AUROC_FIXTURES: u64 = 1000;
const RANDOM_TRIALS: u64 = 1000;
const RANDOM_TRIAL_SIZE: usize = 1000;
const RANDOM_BAND: f64 = 0.05;
const FD_REL_TOL: f64 = 1e-5;
const MIN_AUROC: f64 = 0.85;
const MIN_BASELINE_GAP: f64 = 0.03;
const PIPELINE_BUDGET: Duration = Duration::from_secs(120);
const KS_ALPHA: f64 = 0.05;

fn verdict(n: u32, ok: bool, what: &str) -> bool {
    println!("[{}] criterion {n}: {what}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn sorted(mut parts: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    parts.iter_mut().for_each(|p| p.sort_unstable());
    parts.sort();
    parts
}

#[test]
fn criterion_1_graph_metrics_match_brute_force() {
    let t0 = Instant::now();
    let mut mismatches = Vec::new();
    for seed in 0..ORACLE_GRAPHS {
        let (n, edges) = common::random_graph(&mut common::rng(seed), ORACLE_MAX_NODES);
        let g = DirectedGraph::from_index_edges(n, edges.iter().copied());
        let m = Matrix::from_edges(n, &edges);
        let wccs = weakly_connected_components(&g);
        let (largest, _) = wccs.iter().enumerate().fold((0, 0), |acc, (i, c)| if c.len() > acc.1 { (i, c.len()) } else { acc });
        let comp = &wccs[largest];
        let checks = [
            ("SCC", sorted(strongly_connected_components(&g)) == sorted(m.sccs())),
            ("WCC", sorted(wccs.clone()) == sorted(m.wccs())),
            ("diameter", diameter_undirected(&g, comp).unwrap() == m.diameter(comp)),
            ("k-core", main_kcore_number(&g) == m.main_kcore()),
            ("clustering", (average_clustering(&g) - m.clustering()).abs() <= REAL_TOL),
            ("SV", (structural_virality(&g, comp).unwrap() - m.virality(comp)).abs() <= REAL_TOL),
            ("density", (density(&g) - m.density()).abs() <= REAL_TOL),
        ];
        for (name, ok) in checks {
            if !ok {
                mismatches.push(format!("seed {seed} {name}"));
            }
        }
    }
    let elapsed = t0.elapsed();
    let ok = verdict(
        1,
        mismatches.is_empty() && elapsed < ORACLE_BUDGET,
        &format!("{ORACLE_GRAPHS} graphs, {} mismatches, {elapsed:.2?}", mismatches.len()),
    );
    assert!(ok, "{mismatches:?}");
}

#[test]
fn criterion_2_hand_fixtures() {
    let path = DirectedGraph::from_index_edges(3, [(0, 1), (1, 2)]);
    let cycle = DirectedGraph::from_index_edges(3, [(0, 1), (1, 2), (2, 0)]);
    let triangle = DirectedGraph::from_index_edges(3, [(0, 1), (1, 2), (0, 2)]);
    let complete = DirectedGraph::from_index_edges(4, (0..4).flat_map(|a| (0..4).map(move |b| (a, b))));
    let single = DirectedGraph::from_index_edges(1, []);
    let empty = features::extract_layer_features(&netbuild::LayerGraph::new(LayerKind::R));
    let checks = [
        ("path SV", structural_virality(&path, &[0, 1, 2]).unwrap() == 8.0 / 6.0),
        ("cycle KC", main_kcore_number(&cycle) == 2),
        ("triangle CC", average_clustering(&triangle) == 1.0),
        ("complete density", density(&complete) == 1.0),
        ("empty layer", empty.to_array().iter().all(|&v| v == 0.0)),
        ("single SV", structural_virality(&single, &[0]).unwrap() == 0.0),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let ok = verdict(2, failed.is_empty(), &format!("{} of {} fixtures hold", checks.len() - failed.len(), checks.len()));
    assert!(ok, "{failed:?}");
}

fn relabel(c: &ArticleCascade, map: &dyn Fn(&str) -> String) -> ArticleCascade {
    let mut out = c.clone();
    for t in out.tweets.iter_mut() {
        t.author_id = map(&t.author_id);
        for x in [&mut t.retweet_of, &mut t.quote_of, &mut t.reply_to] {
            if let Some(v) = x.as_mut() {
                *v = map(v);
            }
        }
        t.mentions = t.mentions.iter().map(|m| map(m)).collect();
    }
    out
}

#[test]
fn criterion_3_vector_contract() {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = 60;
    cfg.mainstream.n_articles = 60;
    let cascades = generate_corpus(&cfg).unwrap().cascades();
    let rows = featurize_cascades(&cascades).unwrap();

    let mut expected = Vec::new();
    for layer in ["Q", "RT", "M", "R"] {
        for metric in ["SCC", "LSCC", "WCC", "LWCC", "DWCC", "CC", "KC", "D", "SV"] {
            expected.push(format!("{layer}_{metric}"));
        }
    }
    expected.extend(["T".to_string(), "U".to_string()]);
    let names_ok = feature_names() == expected && FEATURE_COUNT == 38;
    let len_ok = rows.len() == cascades.len() && rows.iter().all(|r| r.features.as_slice().len() == 38);

    // reverse-sorted opaque ids: the order of users changes, the graph does not
    let mut relabel_ok = true;
    for c in &cascades {
        let users: BTreeSet<String> = c
            .tweets
            .iter()
            .flat_map(|t| {
                std::iter::once(t.author_id.clone())
                    .chain(t.retweet_of.clone())
                    .chain(t.quote_of.clone())
                    .chain(t.reply_to.clone())
                    .chain(t.mentions.clone())
            })
            .collect();
        let n = users.len();
        let index: std::collections::HashMap<String, usize> = users.into_iter().enumerate().map(|(i, u)| (u, i)).collect();
        let renamed = relabel(c, &|u| format!("x{:08}", n - index[u]));
        let a = features::assemble_vector(&netbuild::build_network(c).unwrap());
        let b = features::assemble_vector(&netbuild::build_network(&renamed).unwrap());
        let net = netbuild::build_network(c).unwrap();
        for kind in LayerKind::ALL {
            // when two largest WCCs tie in size the choice between them is
            // label dependent, so DWCC and SV are only compared without ties
            let (g, _) = net.layer(kind).to_graph();
            let sizes: Vec<usize> = weakly_connected_components(&g).iter().map(Vec::len).collect();
            let top = sizes.iter().copied().max().unwrap_or(0);
            let tie = sizes.iter().filter(|&&s| s == top).count() > 1;
            for (j, (x, y)) in a.layer(kind).iter().zip(b.layer(kind)).enumerate() {
                if !(tie && (j == 4 || j == 8)) && x != y {
                    relabel_ok = false;
                }
            }
        }
        relabel_ok &= a.as_slice()[36..] == b.as_slice()[36..];
    }
    let ok = verdict(
        3,
        names_ok && len_ok && relabel_ok,
        &format!("{} articles, order ok={names_ok}, len ok={len_ok}, relabel ok={relabel_ok}", rows.len()),
    );
    assert!(ok);
}

#[test]
fn criterion_4_metric_correctness() {
    let mut worst = 0.0f64;
    for seed in 0..AUROC_FIXTURES {
        let mut r = common::rng(seed);
        let n = r.random_range(2..200);
        let mut truth: Vec<ClassLabel> = (0..n).map(|i| if i == 0 { ClassLabel::D } else if i == 1 { ClassLabel::M } else if r.random() { ClassLabel::D } else { ClassLabel::M }).collect();
        truth.shuffle(&mut r);
        let levels = r.random_range(2..50);
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..levels) as f64 / levels as f64).collect();
        let a = model::auroc(&truth, &scores).unwrap();
        worst = worst.max((a - common::trapezoid_auroc(&truth, &scores)).abs());
    }

    let mut r = common::rng(4242);
    let mut sum = 0.0;
    let mut within = 0;
    for _ in 0..RANDOM_TRIALS {
        let truth: Vec<ClassLabel> = (0..RANDOM_TRIAL_SIZE).map(|i| if i % 2 == 0 { ClassLabel::D } else { ClassLabel::M }).collect();
        let scores: Vec<f64> = (0..RANDOM_TRIAL_SIZE).map(|_| r.random()).collect();
        let a = model::auroc(&truth, &scores).unwrap();
        sum += a;
        if (a - 0.5).abs() <= RANDOM_BAND {
            within += 1;
        }
    }
    let mean = sum / RANDOM_TRIALS as f64;

    use ClassLabel::{D, M};
    let m = model::metrics(&[D, D, D, M, M], &[D, M, D, D, M], &[0.9, 0.2, 0.8, 0.7, 0.1]).unwrap();
    let f1_ok = m.f1 == (2.0 / 3.0 + 0.5) / 2.0;
    let m2 = model::metrics(&[D, D, M, M, M, M], &[D, D, D, M, M, M], &[1.0; 6]).unwrap();
    // D: tp 2 fp 1 fn 0 -> F1 4/5; M: tp 3 fp 0 fn 1 -> F1 6/7
    let f1_ok = f1_ok && m2.f1 == (4.0 / 5.0 + 6.0 / 7.0) / 2.0;

    let ok = verdict(
        4,
        worst <= AUROC_TRAPEZOID_TOL && (mean - 0.5).abs() <= RANDOM_BAND && within as f64 >= 0.95 * RANDOM_TRIALS as f64 && f1_ok,
        &format!("max |rank - trapezoid| = {worst:.1e}, random mean {mean:.4} ({within}/{RANDOM_TRIALS} within ±{RANDOM_BAND}), F1 fixtures ok={f1_ok}"),
    );
    assert!(ok);
}

#[test]
fn criterion_5_optimizer_correctness() {
    let mut r = common::rng(55);
    let d = 6;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..80 {
        let l = if i % 3 == 0 { ClassLabel::D } else { ClassLabel::M };
        let shift = if l == ClassLabel::D { 0.5 } else { -0.5 };
        x.push((0..d).map(|_| r.random_range(-1.0..1.0) + shift).collect::<Vec<f64>>());
        y.push(l);
    }
    let mut worst_rel = 0.0f64;
    for balanced in [false, true] {
        let omega = model::sample_weights(&y, balanced).unwrap();
        for _ in 0..20 {
            let w: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
            let b = r.random_range(-1.0..1.0);
            let c = r.random_range(0.1..5.0);
            let g = model::gradient(&w, b, &x, &y, &omega, c);
            for j in 0..=d {
                let eval = |h: f64| {
                    let (mut w2, mut b2) = (w.clone(), b);
                    if j < d { w2[j] += h } else { b2 += h }
                    model::objective(&w2, b2, &x, &y, &omega, c)
                };
                let fd = (eval(1e-5) - eval(-1e-5)) / 2e-5;
                worst_rel = worst_rel.max((g[j] - fd).abs() / g[j].abs().max(fd.abs()).max(1e-8));
            }
        }
    }

    let data = model::Dataset::new(x.clone(), y.clone()).unwrap();
    let trained = model::train_logistic(&data, &TrainConfig::default()).unwrap();
    let monotone = trained.objective_trace.windows(2).all(|p| p[1] <= p[0]);

    let sep_x: Vec<Vec<f64>> = (0..40).map(|i| vec![if i < 20 { 1.0 + i as f64 * 0.1 } else { -1.0 - i as f64 * 0.1 }, (i % 7) as f64]).collect();
    let sep_y: Vec<ClassLabel> = (0..40).map(|i| if i < 20 { ClassLabel::D } else { ClassLabel::M }).collect();
    let sep = model::train_logistic(&model::Dataset::new(sep_x.clone(), sep_y.clone()).unwrap(), &TrainConfig::default()).unwrap();
    let scores: Vec<f64> = sep_x.iter().map(|row| sep.model.decision(row)).collect();
    let sep_auroc = model::auroc(&sep_y, &scores).unwrap();

    let ok = verdict(
        5,
        worst_rel <= FD_REL_TOL && monotone && trained.converged && sep_auroc == 1.0,
        &format!("max FD rel err {worst_rel:.1e}, monotone={monotone}, separable AUROC {sep_auroc}"),
    );
    assert!(ok);
}

struct Pipeline {
    cascades: Vec<ArticleCascade>,
    rows: Vec<FeatureRow>,
    multi: EvaluationReport,
    single: EvaluationReport,
    elapsed: Duration,
}

/// Default corpus written to disk, then ingested, featurized and scored.
fn pipeline() -> &'static Pipeline {
    static CELL: OnceLock<Pipeline> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = GeneratorConfig::default();
        let dir = tempfile::tempdir().unwrap();
        generate_corpus(&cfg).unwrap().write_to(dir.path()).unwrap();

        let t0 = Instant::now();
        let parsed = ingest::parse_records(BufReader::new(fs::File::open(dir.path().join("tweets.jsonl")).unwrap())).unwrap();
        let labels = ingest::read_labels(fs::File::open(dir.path().join("labels.csv")).unwrap()).unwrap();
        let cascades = ingest::group_by_article(parsed.records, &labels);
        let cascades = ingest::apply_censoring(cascades, cfg.collection_start, 14 * 86_400).unwrap();
        let cascades = ingest::filter_min_tweets(cascades, 50).unwrap();
        let rows = featurize_cascades(&cascades).unwrap();
        let cv = CvConfig::default();
        let multi = experiments::evaluate(&rows, SizeFilter::All, &cv).unwrap();
        let single = experiments::single_layer_baseline(&cascades, &cv).unwrap();
        let elapsed = t0.elapsed();
        Pipeline { cascades, rows, multi, single, elapsed }
    })
}

#[test]
fn criterion_6_end_to_end_synthetic() {
    let p = pipeline();
    let gap = p.multi.auroc.mean - p.single.auroc.mean;
    let ok = verdict(
        6,
        p.multi.auroc.mean >= MIN_AUROC && gap >= MIN_BASELINE_GAP && p.elapsed < PIPELINE_BUDGET && p.multi.folds.len() == 10,
        &format!(
            "{} articles, multi-layer AUROC {:.4}, single-layer {:.4}, gap {gap:.4}, {:.1?}",
            p.rows.len(),
            p.multi.auroc.mean,
            p.single.auroc.mean,
            p.elapsed
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_structural_features_rank_high() {
    let p = pipeline();
    let ranking = experiments::chi2_ranking(&p.rows, &CvConfig::default()).unwrap();
    let top: Vec<&str> = ranking.iter().take(5).map(|f| f.name.as_str()).collect();
    let structural: Vec<&str> = top
        .iter()
        .copied()
        .filter(|n| {
            let (layer, metric) = n.split_once('_').unwrap_or(("", ""));
            matches!(layer, "RT" | "Q" | "M") && matches!(metric, "LWCC" | "SCC")
        })
        .collect();
    let mut ks_ok = !structural.is_empty();
    let mut detail = Vec::new();
    for name in &structural {
        let col = features::feature_index(name).unwrap();
        let by = |class| p.rows.iter().filter(|r| r.label == class).map(|r| r.features.0[col]).collect::<Vec<f64>>();
        let ks = ks_two_sample(&by(ClassLabel::D), &by(ClassLabel::M)).unwrap();
        ks_ok &= ks.p_value < KS_ALPHA;
        detail.push(format!("{name} p={:.1e}", ks.p_value));
    }
    let ok = verdict(7, ks_ok, &format!("chi2 top-5 {top:?}; KS {}", detail.join(", ")));
    assert!(ok);
}

#[test]
fn criterion_8_temporal_sweep_shape() {
    let p = pipeline();
    let ladder = default_lifetimes();
    let points: Vec<TemporalPoint> = experiments::temporal_sweep(&p.cascades, &ladder, &CvConfig::default()).unwrap();
    let labels: Vec<&str> = points.iter().map(|pt| pt.lifetime.label.as_str()).collect();
    let ladder_ok = labels == ["1h", "6h", "12h", "1d", "2d", "3d", "7d"];

    let mut nested = true;
    for c in &p.cascades {
        let mut prev: BTreeSet<String> = BTreeSet::new();
        for lt in &ladder {
            let ids: BTreeSet<String> = netbuild::truncate_by_lifetime(c, lt.seconds).unwrap().tweets.into_iter().map(|t| t.tweet_id).collect();
            nested &= prev.is_subset(&ids);
            prev = ids;
        }
    }
    let (first, last) = (points[0].report.auroc.mean, points[points.len() - 1].report.auroc.mean);
    let ok = verdict(
        8,
        ladder_ok && nested && last >= first,
        &format!("{} points, AUROC 1h {first:.4} -> 7d {last:.4}, nested tweet sets={nested}", points.len()),
    );
    assert!(ok);
}

/// Runs the CLI pipeline inside `dir` with relative paths and returns every
/// produced file keyed by relative path.
fn cli_run(dir: &Path, jobs: &str) -> Vec<(String, Vec<u8>)> {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = 80;
    cfg.mainstream.n_articles = 80;
    fs::write(dir.join("gen.json"), serde_json::to_string(&cfg).unwrap()).unwrap();
    let steps: [&[&str]; 8] = [
        &["synth", "--config", "gen.json", "--seed", "3", "--out", "raw"],
        &["ingest", "--tweets", "raw/tweets.jsonl", "--labels", "raw/labels.csv", "--min-tweets", "20", "--out", "cascades"],
        &["featurize", "--cascades", "cascades", "--out", "features.csv", "--networks", "networks.txt"],
        &["evaluate", "--features", "features.csv", "--seed", "5", "--out", "eval"],
        &["rank-features", "--features", "features.csv", "--seed", "5", "--out", "rank"],
        &["bias-eval", "--features", "features.csv", "--train-bias", "right", "--seed", "5", "--out", "bias"],
        &["baseline-single-layer", "--cascades", "cascades", "--seed", "5", "--out", "base"],
        &["temporal", "--cascades", "cascades", "--seed", "5", "--out", "temporal"],
    ];
    let mut stdout = Vec::new();
    for args in steps {
        let out = Command::new(env!("CARGO_BIN_EXE_diffnet"))
            .current_dir(dir)
            .args(["--jobs", jobs])
            .args(args)
            .output()
            .unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        stdout.extend(out.stdout);
    }
    let mut files = vec![("stdout".to_string(), stdout)];
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn criterion_9_cli_is_deterministic_across_jobs() {
    type Files = Vec<(String, Vec<u8>)>;
    let runs: Vec<(String, Files)> = ["1", "4", "1", "8"]
        .iter()
        .map(|jobs| {
            let dir = tempfile::tempdir().unwrap();
            (jobs.to_string(), cli_run(dir.path(), jobs))
        })
        .collect();
    let reference = &runs[0].1;
    let mut differing = Vec::new();
    for (jobs, files) in &runs[1..] {
        if files.iter().map(|f| &f.0).ne(reference.iter().map(|f| &f.0)) {
            differing.push(format!("--jobs {jobs}: file set"));
            continue;
        }
        for (a, b) in files.iter().zip(reference) {
            if a.1 != b.1 {
                differing.push(format!("--jobs {jobs}: {}", a.0));
            }
        }
    }
    let ok = verdict(
        9,
        differing.is_empty(),
        &format!("{} runs x {} files byte-identical (jobs 1, 4, 1, 8)", runs.len(), reference.len()),
    );
    assert!(ok, "{differing:?}");
}
