//! Four-layer diffusion network construction.
//!
//! Edge directions per interaction, for a tweet authored by `a` targeting `b`:
//!
//! | layer | interaction | edge  |
//! |-------|-------------|-------|
//! | RT    | retweet     | b → a |
//! | R     | reply       | a → b |
//! | Q     | quote       | b → a |
//! | M     | mention     | a → b |
//!
//! Repeated pairs increment the edge weight. Self-interactions are dropped.
//! A tweet that produces no edge is a pure tweet.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphops::DirectedGraph;
use crate::ingest::ArticleCascade;

/// Interaction layer. The declaration order is the order layers appear in
/// feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    Q,
    RT,
    M,
    R,
}

impl LayerKind {
    pub const ALL: [LayerKind; 4] = [LayerKind::Q, LayerKind::RT, LayerKind::M, LayerKind::R];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Q => "Q",
            LayerKind::RT => "RT",
            LayerKind::M => "M",
            LayerKind::R => "R",
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Q" => Ok(LayerKind::Q),
            "RT" => Ok(LayerKind::RT),
            "M" => Ok(LayerKind::M),
            "R" => Ok(LayerKind::R),
            other => Err(Error::InvalidArgument(format!("unknown layer {other:?}"))),
        }
    }
}

/// One weighted directed layer. Nodes are exactly the endpoints of edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerGraph {
    pub kind: LayerKind,
    edges: BTreeMap<(String, String), u32>,
}

impl LayerGraph {
    pub fn new(kind: LayerKind) -> Self {
        LayerGraph {
            kind,
            edges: BTreeMap::new(),
        }
    }

    /// Adds `weight` to edge `src → dst`. Self-loops and zero weights are ignored.
    /// Returns whether an edge was recorded.
    pub fn add_edge(&mut self, src: &str, dst: &str, weight: u32) -> bool {
        if src == dst || weight == 0 {
            return false;
        }
        *self.edges.entry((src.to_string(), dst.to_string())).or_insert(0) += weight;
        true
    }

    pub fn weight(&self, src: &str, dst: &str) -> Option<u32> {
        self.edges.get(&(src.to_string(), dst.to_string())).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.edges.iter().map(|((a, b), &w)| (a.as_str(), b.as_str(), w))
    }

    pub fn nodes(&self) -> BTreeSet<&str> {
        self.edges
            .keys()
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(|&w| w as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Unweighted simple view, with node labels in index order.
    pub fn to_graph(&self) -> (DirectedGraph, Vec<String>) {
        DirectedGraph::from_labeled_edges(self.edges.keys().map(|(a, b)| (a.as_str(), b.as_str())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiLayerNetwork {
    pub article_id: String,
    layers: [LayerGraph; 4],
    pure_tweets: u64,
    pure_authors: BTreeSet<String>,
}

impl MultiLayerNetwork {
    pub fn empty(article_id: &str) -> Self {
        MultiLayerNetwork {
            article_id: article_id.to_string(),
            layers: LayerKind::ALL.map(LayerGraph::new),
            pure_tweets: 0,
            pure_authors: BTreeSet::new(),
        }
    }

    pub fn layer(&self, kind: LayerKind) -> &LayerGraph {
        &self.layers[kind.index()]
    }

    pub fn layer_mut(&mut self, kind: LayerKind) -> &mut LayerGraph {
        &mut self.layers[kind.index()]
    }

    pub fn layers(&self) -> &[LayerGraph; 4] {
        &self.layers
    }

    pub fn add_pure_tweet(&mut self, author: &str) {
        self.pure_tweets += 1;
        self.pure_authors.insert(author.to_string());
    }

    /// Number of pure tweets (T).
    pub fn pure_tweet_count(&self) -> u64 {
        self.pure_tweets
    }

    /// Distinct authors of pure tweets (U).
    pub fn pure_tweet_users(&self) -> u64 {
        self.pure_authors.len() as u64
    }

    pub fn pure_authors(&self) -> &BTreeSet<String> {
        &self.pure_authors
    }

    /// Union of every layer's edges, collapsed to a single unweighted graph.
    pub fn aggregated_graph(&self) -> (DirectedGraph, Vec<String>) {
        DirectedGraph::from_labeled_edges(
            self.layers
                .iter()
                .flat_map(|l| l.edges.keys().map(|(a, b)| (a.as_str(), b.as_str()))),
        )
    }
}

/// Builds the four-layer network for one article.
pub fn build_network(cascade: &ArticleCascade) -> Result<MultiLayerNetwork> {
    if cascade.is_empty() {
        return Err(Error::EmptyCascade);
    }
    let mut net = MultiLayerNetwork::empty(&cascade.article_id);
    for t in &cascade.tweets {
        let a = t.author_id.as_str();
        let mut produced = false;
        if let Some(b) = &t.retweet_of {
            produced |= net.layer_mut(LayerKind::RT).add_edge(b, a, 1);
        }
        if let Some(b) = &t.reply_to {
            produced |= net.layer_mut(LayerKind::R).add_edge(a, b, 1);
        }
        if let Some(b) = &t.quote_of {
            produced |= net.layer_mut(LayerKind::Q).add_edge(b, a, 1);
        }
        for b in &t.mentions {
            produced |= net.layer_mut(LayerKind::M).add_edge(a, b, 1);
        }
        if !produced {
            net.add_pure_tweet(a);
        }
    }
    Ok(net)
}

/// Number of distinct users over all layers and pure-tweet authors.
pub fn aggregate_user_count(net: &MultiLayerNetwork) -> usize {
    let mut users: BTreeSet<&str> = net.pure_authors.iter().map(String::as_str).collect();
    for layer in &net.layers {
        users.extend(layer.nodes());
    }
    users.len()
}

/// Keeps tweets no later than `lifetime` seconds after the article's
/// earliest tweet.
pub fn truncate_by_lifetime(cascade: &ArticleCascade, lifetime: i64) -> Result<ArticleCascade> {
    if lifetime <= 0 {
        return Err(Error::InvalidArgument("lifetime must be positive".into()));
    }
    let first = cascade
        .tweets
        .iter()
        .map(|t| t.timestamp)
        .min()
        .ok_or(Error::EmptyCascade)?;
    let cutoff = first.saturating_add(lifetime);
    let mut out = cascade.clone();
    out.tweets.retain(|t| t.timestamp <= cutoff);
    Ok(out)
}

/// Writes a network as text: a header line `article <id>`, one
/// `<layer> <src> <dst> <weight>` line per edge (layers in Q, RT, M, R
/// order), one `pure <author> ` line per pure-tweet author and a trailer
/// `T=<n> U=<n>`. Identifiers must not contain whitespace.
pub fn write_network<W: Write>(mut w: W, net: &MultiLayerNetwork) -> Result<()> {
    check_token(&net.article_id)?;
    writeln!(w, "article {}", net.article_id)?;
    for layer in &net.layers {
        for (a, b, weight) in layer.edges() {
            check_token(a)?;
            check_token(b)?;
            writeln!(w, "{} {a} {b} {weight}", layer.kind)?;
        }
    }
    for author in &net.pure_authors {
        check_token(author)?;
        writeln!(w, "pure {author}")?;
    }
    writeln!(w, "T={} U={}", net.pure_tweets, net.pure_authors.len())?;
    Ok(())
}

fn check_token(s: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(Error::Format(format!("identifier {s:?} cannot be serialized")));
    }
    Ok(())
}

/// Reads every network written by [`write_network`] from `r`.
pub fn read_networks<R: BufRead>(r: R) -> Result<Vec<MultiLayerNetwork>> {
    let mut out = Vec::new();
    let mut current: Option<MultiLayerNetwork> = None;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Format(format!("network line {}: {line:?}", lineno + 1));
        match fields.as_slice() {
            [] => continue,
            ["article", id] => {
                if current.is_some() {
                    return Err(bad());
                }
                current = Some(MultiLayerNetwork::empty(id));
            }
            ["pure", author] => {
                let net = current.as_mut().ok_or_else(bad)?;
                net.pure_authors.insert(author.to_string());
            }
            [t, u] if t.starts_with("T=") && u.starts_with("U=") => {
                let mut net = current.take().ok_or_else(bad)?;
                net.pure_tweets = t[2..].parse().map_err(|_| bad())?;
                let users: usize = u[2..].parse().map_err(|_| bad())?;
                if users != net.pure_authors.len() || (net.pure_tweets as usize) < users {
                    return Err(bad());
                }
                out.push(net);
            }
            [layer, a, b, weight] => {
                let net = current.as_mut().ok_or_else(bad)?;
                let kind: LayerKind = layer.parse().map_err(|_| bad())?;
                let weight: u32 = weight.parse().map_err(|_| bad())?;
                if !net.layer_mut(kind).add_edge(a, b, weight) {
                    return Err(bad());
                }
            }
            _ => return Err(bad()),
        }
    }
    if current.is_some() {
        return Err(Error::Format("network missing T/U trailer".into()));
    }
    Ok(out)
}
