//! Tweet and label ingestion: parsing, grouping by article, censoring and
//! volume filters.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One tweet sharing a news article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    pub timestamp: i64,
    pub article_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet_of: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quote_of: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_to: Option<String>,
    /// Body mentions. Never contains the reply target.
    #[serde(default)]
    pub mentions: Vec<String>,
}

impl TweetRecord {
    /// A plain tweet with no interaction targets.
    pub fn original(tweet_id: &str, author_id: &str, timestamp: i64, article_id: &str) -> Self {
        TweetRecord {
            tweet_id: tweet_id.to_string(),
            author_id: author_id.to_string(),
            timestamp,
            article_id: article_id.to_string(),
            retweet_of: None,
            quote_of: None,
            reply_to: None,
            mentions: Vec::new(),
        }
    }

    /// Deduplicates mentions (first occurrence wins) and strips the reply
    /// target from them.
    pub fn normalize(&mut self) {
        let mut seen = HashSet::new();
        let reply = self.reply_to.clone();
        self.mentions
            .retain(|m| Some(m) != reply.as_ref() && seen.insert(m.clone()));
    }

    fn validate(&self) -> std::result::Result<(), &'static str> {
        if self.tweet_id.is_empty() {
            return Err("empty tweet_id");
        }
        if self.author_id.is_empty() {
            return Err("empty author_id");
        }
        if self.article_id.is_empty() {
            return Err("empty article_id");
        }
        if self.timestamp <= 0 {
            return Err("non-positive timestamp");
        }
        let empty_target = [&self.retweet_of, &self.quote_of, &self.reply_to]
            .iter()
            .any(|t| t.as_deref() == Some(""))
            || self.mentions.iter().any(String::is_empty);
        if empty_target {
            return Err("empty interaction target");
        }
        Ok(())
    }

    /// True when the tweet names no other account at all.
    pub fn has_targets(&self) -> bool {
        self.retweet_of.is_some()
            || self.quote_of.is_some()
            || self.reply_to.is_some()
            || !self.mentions.is_empty()
    }
}

/// Result of [`parse_records`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedRecords {
    pub records: Vec<TweetRecord>,
    /// Lines that failed to parse or validate.
    pub malformed: usize,
    /// Records dropped because their tweet_id was already seen.
    pub duplicates: usize,
}

/// Parses line-delimited JSON tweet records.
///
/// Malformed lines are skipped and counted; blank lines are ignored. More
/// than half of the non-blank lines being malformed is a format error.
/// Duplicate tweet ids keep their first occurrence.
pub fn parse_records<R: BufRead>(reader: R) -> Result<ParsedRecords> {
    let mut out = ParsedRecords::default();
    let mut seen = HashSet::new();
    let mut total = 0usize;
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        total += 1;
        let mut rec: TweetRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(_) => {
                out.malformed += 1;
                continue;
            }
        };
        if rec.validate().is_err() {
            out.malformed += 1;
            continue;
        }
        rec.normalize();
        if !seen.insert(rec.tweet_id.clone()) {
            out.duplicates += 1;
            continue;
        }
        out.records.push(rec);
    }
    if out.malformed * 2 > total {
        return Err(Error::Format(format!(
            "{} of {} tweet lines are malformed",
            out.malformed, total
        )));
    }
    if out.malformed > 0 || out.duplicates > 0 {
        log::warn!(
            "skipped {} malformed and {} duplicate tweet records",
            out.malformed,
            out.duplicates
        );
    }
    Ok(out)
}

/// Writes records as line-delimited JSON, one record per line.
pub fn write_records<W: Write>(mut writer: W, records: &[TweetRecord]) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut writer, rec)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    /// Disinformation.
    D,
    /// Mainstream.
    M,
}

impl ClassLabel {
    /// +1 for the positive (disinformation) class, -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            ClassLabel::D => 1.0,
            ClassLabel::M => -1.0,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::D => "D",
            ClassLabel::M => "M",
        })
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "D" | "d" => Ok(ClassLabel::D),
            "M" | "m" => Ok(ClassLabel::M),
            other => Err(Error::Format(format!("unknown class label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Bias {
    Left,
    Right,
    #[default]
    Unlabeled,
}

impl Bias {
    pub fn as_str(self) -> &'static str {
        match self {
            Bias::Left => "left",
            Bias::Right => "right",
            Bias::Unlabeled => "",
        }
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Bias {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Bias::Left),
            "right" => Ok(Bias::Right),
            "" | "unlabeled" => Ok(Bias::Unlabeled),
            other => Err(Error::Format(format!("unknown bias {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleLabel {
    pub article_id: String,
    pub class_label: ClassLabel,
    pub source: String,
    pub bias: Bias,
}

#[derive(Debug, Deserialize, Serialize)]
struct LabelRow {
    article_id: String,
    label: String,
    source: String,
    #[serde(default)]
    bias: Option<String>,
}

/// Reads a labels table with header `article_id,label,source,bias`.
/// Later rows for the same article are ignored.
pub fn read_labels<R: Read>(reader: R) -> Result<BTreeMap<String, ArticleLabel>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut labels = BTreeMap::new();
    for (i, row) in rdr.deserialize::<LabelRow>().enumerate() {
        let row = row.map_err(|e| Error::Format(format!("labels row {}: {e}", i + 1)))?;
        let bias = match row.bias.as_deref() {
            Some(b) => b.parse()?,
            None => Bias::Unlabeled,
        };
        let label = ArticleLabel {
            class_label: row.label.parse()?,
            article_id: row.article_id.clone(),
            source: row.source,
            bias,
        };
        labels.entry(row.article_id).or_insert(label);
    }
    Ok(labels)
}

pub fn write_labels<'a, W: Write>(
    writer: W,
    labels: impl IntoIterator<Item = &'a ArticleLabel>,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["article_id", "label", "source", "bias"])?;
    for l in labels {
        wtr.write_record([
            l.article_id.as_str(),
            &l.class_label.to_string(),
            l.source.as_str(),
            l.bias.as_str(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// All tweets of one article, time-ordered, with its label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleCascade {
    pub article_id: String,
    pub tweets: Vec<TweetRecord>,
    pub label: ArticleLabel,
}

impl ArticleCascade {
    /// Builds a cascade, sorting tweets by (timestamp, tweet_id).
    pub fn new(label: ArticleLabel, mut tweets: Vec<TweetRecord>) -> Self {
        sort_tweets(&mut tweets);
        ArticleCascade {
            article_id: label.article_id.clone(),
            tweets,
            label,
        }
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }
}

pub(crate) fn sort_tweets(tweets: &mut [TweetRecord]) {
    tweets.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| a.tweet_id.cmp(&b.tweet_id))
    });
}

/// Groups records by article. Articles without a label row are dropped.
/// Output is ordered by article id.
pub fn group_by_article(
    records: Vec<TweetRecord>,
    labels: &BTreeMap<String, ArticleLabel>,
) -> Vec<ArticleCascade> {
    let mut groups: BTreeMap<String, Vec<TweetRecord>> = BTreeMap::new();
    let mut unlabeled = 0usize;
    for rec in records {
        if labels.contains_key(&rec.article_id) {
            groups.entry(rec.article_id.clone()).or_default().push(rec);
        } else {
            unlabeled += 1;
        }
    }
    if unlabeled > 0 {
        log::warn!("dropped {unlabeled} tweets referencing unlabeled articles");
    }
    groups
        .into_iter()
        .map(|(id, tweets)| ArticleCascade::new(labels[&id].clone(), tweets))
        .collect()
}

/// Keeps tweets with `start <= timestamp <= start + window`; articles left
/// empty are removed.
pub fn apply_censoring(cascades: Vec<ArticleCascade>, start: i64, window: i64) -> Result<Vec<ArticleCascade>> {
    if window <= 0 {
        return Err(Error::InvalidArgument("censoring window must be positive".into()));
    }
    let end = start.saturating_add(window);
    Ok(cascades
        .into_iter()
        .filter_map(|mut c| {
            c.tweets.retain(|t| t.timestamp >= start && t.timestamp <= end);
            (!c.tweets.is_empty()).then_some(c)
        })
        .collect())
}

/// Keeps articles with at least `min_count` tweets.
pub fn filter_min_tweets(cascades: Vec<ArticleCascade>, min_count: usize) -> Result<Vec<ArticleCascade>> {
    if min_count == 0 {
        return Err(Error::InvalidArgument("min_count must be at least 1".into()));
    }
    Ok(cascades.into_iter().filter(|c| c.len() >= min_count).collect())
}

/// Flattens cascades back into records plus label rows, in article order.
pub fn flatten(cascades: &[ArticleCascade]) -> (Vec<TweetRecord>, Vec<ArticleLabel>) {
    let records = cascades.iter().flat_map(|c| c.tweets.iter().cloned()).collect();
    let labels = cascades.iter().map(|c| c.label.clone()).collect();
    (records, labels)
}
