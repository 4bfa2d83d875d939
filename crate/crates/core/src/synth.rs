//! Synthetic labelled tweet corpora with a controllable gap between the
//! disinformation and mainstream classes.
//!
//! Each article gets `1 + Poisson(cascades_mean)` cascades. A cascade is a
//! retweet tree grown one spreader at a time: the root posts a plain tweet,
//! and every later spreader attaches to the root with probability
//! `1 - depth_bias`, otherwise to a uniformly chosen earlier non-root
//! spreader. Spreaders quote instead of retweeting with `quote_rate`, and
//! independently post a mention of an earlier participant (`mention_rate`),
//! a reply to their parent (`reply_rate`) and an extra plain tweet
//! (`pure_rate`). Tweets inside a cascade are spaced by exponential
//! inter-arrival times.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{self, ArticleLabel, Bias, ClassLabel, TweetRecord};
use crate::model::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub n_articles: usize,
    /// Poisson mean of cascades per article beyond the first.
    pub cascades_mean: f64,
    /// Power-law exponent of cascade sizes (> 1).
    pub size_exponent: f64,
    pub min_cascade_size: usize,
    pub max_cascade_size: usize,
    /// Probability a spreader attaches below the root.
    pub depth_bias: f64,
    pub mention_rate: f64,
    pub reply_rate: f64,
    pub quote_rate: f64,
    pub pure_rate: f64,
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub disinformation: ClassParams,
    pub mainstream: ClassParams,
    /// Epoch seconds of the first possible tweet.
    pub collection_start: i64,
    /// Mean seconds between consecutive tweets of a cascade.
    pub mean_interarrival_secs: f64,
    /// Mean seconds between an article's first cascade and each later one.
    pub mean_cascade_delay_secs: f64,
    /// Share of articles labelled left and right; the rest are unlabelled.
    pub left_share: f64,
    pub right_share: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    /// 400 articles per class; disinformation cascades are larger, deeper
    /// and mention-heavy, mainstream ones shallower and quote-heavy.
    fn default() -> Self {
        GeneratorConfig {
            disinformation: ClassParams {
                n_articles: 400,
                cascades_mean: 6.0,
                size_exponent: 2.1,
                min_cascade_size: 5,
                max_cascade_size: 300,
                depth_bias: 0.35,
                mention_rate: 0.25,
                reply_rate: 0.1,
                quote_rate: 0.05,
                pure_rate: 0.1,
                sources: vec!["dubious-daily.example".into(), "truthbomb.example".into(), "patriot-wire.example".into()],
            },
            mainstream: ClassParams {
                n_articles: 400,
                cascades_mean: 6.0,
                size_exponent: 2.2,
                min_cascade_size: 5,
                max_cascade_size: 300,
                depth_bias: 0.25,
                mention_rate: 0.2,
                reply_rate: 0.1,
                quote_rate: 0.25,
                pure_rate: 0.1,
                sources: vec!["gazette.example".into(), "broadsheet.example".into(), "newsroom.example".into()],
            },
            collection_start: 1_551_052_800,
            mean_interarrival_secs: 600.0,
            mean_cascade_delay_secs: 86_400.0,
            left_share: 0.3,
            right_share: 0.3,
            seed: 42,
        }
    }
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be in [0, 1], got {v}")))
    }
}

impl ClassParams {
    pub fn validate(&self) -> Result<()> {
        check_rate("depth_bias", self.depth_bias)?;
        check_rate("mention_rate", self.mention_rate)?;
        check_rate("reply_rate", self.reply_rate)?;
        check_rate("quote_rate", self.quote_rate)?;
        check_rate("pure_rate", self.pure_rate)?;
        if self.size_exponent.is_nan() || self.size_exponent <= 1.0 {
            return Err(Error::InvalidArgument("size_exponent must exceed 1".into()));
        }
        if !(self.cascades_mean > 0.0 && self.cascades_mean.is_finite()) {
            return Err(Error::InvalidArgument("cascades_mean must be positive".into()));
        }
        if self.min_cascade_size == 0 || self.max_cascade_size < self.min_cascade_size {
            return Err(Error::InvalidArgument("need 1 <= min_cascade_size <= max_cascade_size".into()));
        }
        if self.sources.is_empty() {
            return Err(Error::InvalidArgument("at least one source is required".into()));
        }
        Ok(())
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        self.disinformation.validate()?;
        self.mainstream.validate()?;
        check_rate("left_share", self.left_share)?;
        check_rate("right_share", self.right_share)?;
        if self.left_share + self.right_share > 1.0 {
            return Err(Error::InvalidArgument("left_share + right_share exceeds 1".into()));
        }
        let positive = |v: f64| v > 0.0;
        if !positive(self.mean_interarrival_secs) || !positive(self.mean_cascade_delay_secs) {
            return Err(Error::InvalidArgument("time scales must be positive".into()));
        }
        if self.collection_start <= 0 {
            return Err(Error::InvalidArgument("collection_start must be positive".into()));
        }
        Ok(())
    }
}

/// Generated tweets and labels, in article order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub records: Vec<TweetRecord>,
    pub labels: Vec<ArticleLabel>,
}

impl Corpus {
    /// Writes `tweets.jsonl` and `labels.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        ingest::write_records(BufWriter::new(fs::File::create(dir.join("tweets.jsonl"))?), &self.records)?;
        ingest::write_labels(fs::File::create(dir.join("labels.csv"))?, &self.labels)?;
        Ok(())
    }

    /// Cascades grouped and sorted the same way ingestion would.
    pub fn cascades(&self) -> Vec<ingest::ArticleCascade> {
        let labels = self.labels.iter().map(|l| (l.article_id.clone(), l.clone())).collect();
        ingest::group_by_article(self.records.clone(), &labels)
    }
}

/// Discrete power-law draw on [min, max] by inverse transform of a Pareto.
fn cascade_size(rng: &mut ChaCha8Rng, p: &ClassParams) -> usize {
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let s = p.min_cascade_size as f64 * u.powf(-1.0 / (p.size_exponent - 1.0));
    (s.floor() as usize).clamp(p.min_cascade_size, p.max_cascade_size)
}

struct ArticleBuilder<'a> {
    article_id: String,
    rng: ChaCha8Rng,
    tweets: Vec<TweetRecord>,
    params: &'a ClassParams,
}

impl ArticleBuilder<'_> {
    fn push(&mut self, author: &str, ts: i64) -> &mut TweetRecord {
        let id = format!("{}-{}", self.article_id, self.tweets.len());
        self.tweets.push(TweetRecord::original(&id, author, ts, &self.article_id));
        self.tweets.last_mut().expect("just pushed")
    }

    fn cascade(&mut self, index: usize, start: i64, gap: &Exp<f64>) {
        let size = cascade_size(&mut self.rng, self.params);
        let user = |k: usize| format!("u{index}_{k}");
        let mut t = start as f64;
        let mut parents = vec![0usize];
        self.push(&user(0), start);
        for k in 1..size {
            t += gap.sample(&mut self.rng);
            let ts = t.round() as i64;
            let parent = if k == 1 || self.rng.random::<f64>() >= self.params.depth_bias {
                0
            } else {
                self.rng.random_range(1..k)
            };
            parents.push(parent);
            let me = user(k);
            let target = user(parent);
            let quote = self.rng.random::<f64>() < self.params.quote_rate;
            let rec = self.push(&me, ts);
            if quote {
                rec.quote_of = Some(target.clone());
            } else {
                rec.retweet_of = Some(target.clone());
            }
            if self.rng.random::<f64>() < self.params.mention_rate {
                let other = self.rng.random_range(0..k);
                self.push(&me, ts + 1).mentions = vec![user(other)];
            }
            if self.rng.random::<f64>() < self.params.reply_rate {
                self.push(&me, ts + 2).reply_to = Some(target);
            }
            if self.rng.random::<f64>() < self.params.pure_rate {
                self.push(&me, ts + 3);
            }
        }
    }
}

fn generate_article(cfg: &GeneratorConfig, class: ClassLabel, index: usize, global: u64) -> Result<(Vec<TweetRecord>, ArticleLabel)> {
    let params = match class {
        ClassLabel::D => &cfg.disinformation,
        ClassLabel::M => &cfg.mainstream,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, global));
    let article_id = format!("{class}{index:05}");
    let source = params.sources[index % params.sources.len()].clone();
    let r: f64 = rng.random();
    let bias = if r < cfg.left_share {
        Bias::Left
    } else if r < cfg.left_share + cfg.right_share {
        Bias::Right
    } else {
        Bias::Unlabeled
    };
    let extra = Poisson::new(params.cascades_mean)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .sample(&mut rng) as usize;
    let gap = Exp::new(1.0 / cfg.mean_interarrival_secs).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let delay = Exp::new(1.0 / cfg.mean_cascade_delay_secs).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let first = cfg.collection_start + rng.random_range(0..2 * 86_400);
    let mut b = ArticleBuilder {
        article_id: article_id.clone(),
        rng,
        tweets: Vec::new(),
        params,
    };
    for c in 0..=extra {
        let start = if c == 0 {
            first
        } else {
            first + delay.sample(&mut b.rng).round() as i64
        };
        b.cascade(c, start, &gap);
    }
    let mut tweets = b.tweets;
    ingest::sort_tweets(&mut tweets);
    let label = ArticleLabel { article_id, class_label: class, source, bias };
    Ok((tweets, label))
}

/// Generates the corpus. Articles are independent and use seeds derived
/// from the master seed and their position, so output does not depend on
/// the thread count.
pub fn generate_corpus(cfg: &GeneratorConfig) -> Result<Corpus> {
    cfg.validate()?;
    let jobs: Vec<(ClassLabel, usize, u64)> = (0..cfg.disinformation.n_articles)
        .map(|i| (ClassLabel::D, i))
        .chain((0..cfg.mainstream.n_articles).map(|i| (ClassLabel::M, i)))
        .enumerate()
        .map(|(g, (c, i))| (c, i, g as u64))
        .collect();
    let articles = jobs
        .par_iter()
        .map(|&(c, i, g)| generate_article(cfg, c, i, g))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut labels = Vec::new();
    for (tweets, label) in articles {
        records.extend(tweets);
        labels.push(label);
    }
    Ok(Corpus { records, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extract_layer_features;
    use crate::netbuild::{build_network, LayerKind};

    fn tiny(params: impl Fn(&mut ClassParams)) -> GeneratorConfig {
        let mut cfg = GeneratorConfig::default();
        cfg.disinformation.n_articles = 3;
        cfg.mainstream.n_articles = 3;
        params(&mut cfg.disinformation);
        params(&mut cfg.mainstream);
        cfg
    }

    #[test]
    fn single_pure_tweet_article() {
        let cfg = tiny(|p| {
            p.cascades_mean = 1e-9;
            p.min_cascade_size = 1;
            p.max_cascade_size = 1;
            p.mention_rate = 0.0;
            p.reply_rate = 0.0;
            p.quote_rate = 0.0;
            p.pure_rate = 0.0;
        });
        let corpus = generate_corpus(&cfg).unwrap();
        for c in corpus.cascades() {
            assert_eq!(c.len(), 1);
            let net = build_network(&c).unwrap();
            assert_eq!(net.pure_tweet_count(), 1);
        }
    }

    #[test]
    fn zero_depth_bias_gives_stars() {
        let cfg = tiny(|p| {
            p.cascades_mean = 1e-9;
            p.min_cascade_size = 12;
            p.max_cascade_size = 12;
            p.depth_bias = 0.0;
            p.quote_rate = 0.0;
        });
        let corpus = generate_corpus(&cfg).unwrap();
        for c in corpus.cascades() {
            let net = build_network(&c).unwrap();
            let f = extract_layer_features(net.layer(LayerKind::RT));
            assert_eq!(f.lwcc, 12);
            assert_eq!(f.dwcc, 2);
            // star with 11 leaves: 2L/(L+1)
            assert!((f.sv - 22.0 / 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let cfg = tiny(|_| {});
        assert_eq!(generate_corpus(&cfg).unwrap(), generate_corpus(&cfg).unwrap());
        let mut other = cfg.clone();
        other.seed += 1;
        assert_ne!(generate_corpus(&cfg).unwrap(), generate_corpus(&other).unwrap());
    }

    #[test]
    fn invalid_rates_rejected() {
        let cfg = tiny(|p| p.mention_rate = 1.5);
        assert!(matches!(generate_corpus(&cfg), Err(Error::InvalidArgument(_))));
        let cfg = tiny(|p| p.size_exponent = 1.0);
        assert!(generate_corpus(&cfg).is_err());
    }
}
