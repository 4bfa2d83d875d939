//! Fixed-length global feature vectors.
//!
//! Each layer contributes nine metrics in the order of [`METRIC_NAMES`];
//! layers appear in [`LayerKind::ALL`] order (Q, RT, M, R), followed by the
//! pure tweet count `T` and pure tweet author count `U`. Column names are
//! `<layer>_<metric>`, e.g. `RT_LWCC`.

use std::io::{Read, Write};
use std::ops::Index;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphops::{self, DirectedGraph};
use crate::ingest::{ArticleCascade, Bias, ClassLabel};
use crate::netbuild::{aggregate_user_count, build_network, LayerGraph, LayerKind, MultiLayerNetwork};

pub const METRIC_NAMES: [&str; 9] = ["SCC", "LSCC", "WCC", "LWCC", "DWCC", "CC", "KC", "D", "SV"];
pub const LAYER_FEATURES: usize = 9;
pub const FEATURE_COUNT: usize = LAYER_FEATURES * 4 + 2;

/// Global metrics of a single layer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerFeatures {
    pub scc: usize,
    pub lscc: usize,
    pub wcc: usize,
    pub lwcc: usize,
    pub dwcc: usize,
    pub cc: f64,
    pub kc: usize,
    pub density: f64,
    pub sv: f64,
}

impl LayerFeatures {
    pub fn to_array(&self) -> [f64; LAYER_FEATURES] {
        [
            self.scc as f64,
            self.lscc as f64,
            self.wcc as f64,
            self.lwcc as f64,
            self.dwcc as f64,
            self.cc,
            self.kc as f64,
            self.density,
            self.sv,
        ]
    }
}

/// Computes the nine metrics on a simple directed graph. DWCC and SV use
/// the largest weakly connected component; ties go to the component holding
/// the smallest node index.
pub fn graph_features(g: &DirectedGraph) -> LayerFeatures {
    if g.node_count() == 0 {
        return LayerFeatures::default();
    }
    let sccs = graphops::strongly_connected_components(g);
    let wccs = graphops::weakly_connected_components(g);
    let largest = wccs
        .iter()
        .enumerate()
        // max_by_key keeps the last maximum; reverse so the first wins
        .rev()
        .max_by_key(|(_, c)| c.len())
        .map(|(_, c)| c.as_slice())
        .expect("nonempty graph has a component");
    LayerFeatures {
        scc: sccs.len(),
        lscc: sccs.iter().map(Vec::len).max().unwrap_or(0),
        wcc: wccs.len(),
        lwcc: largest.len(),
        dwcc: graphops::diameter_undirected(g, largest).expect("component is connected"),
        cc: graphops::average_clustering(g),
        kc: graphops::main_kcore_number(g),
        density: graphops::density(g),
        sv: graphops::structural_virality(g, largest).expect("component is connected"),
    }
}

/// Metrics of one layer; an empty layer yields all zeros.
pub fn extract_layer_features(layer: &LayerGraph) -> LayerFeatures {
    let (g, _) = layer.to_graph();
    graph_features(&g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(#[serde(with = "array38")] pub [f64; FEATURE_COUNT]);

mod array38 {
    use super::FEATURE_COUNT;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64; FEATURE_COUNT], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; FEATURE_COUNT], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into()
            .map_err(|v: Vec<f64>| D::Error::invalid_length(v.len(), &"38 features"))
    }
}

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn layer(&self, kind: LayerKind) -> &[f64] {
        let start = kind.index() * LAYER_FEATURES;
        &self.0[start..start + LAYER_FEATURES]
    }

    /// Value of the named column, e.g. `"M_LWCC"` or `"T"`.
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.0[i])
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// The 38 column names in vector order.
pub fn feature_names() -> Vec<String> {
    let mut names: Vec<String> = LayerKind::ALL
        .iter()
        .flat_map(|k| METRIC_NAMES.iter().map(move |m| format!("{k}_{m}")))
        .collect();
    names.push("T".into());
    names.push("U".into());
    names
}

pub fn feature_index(name: &str) -> Option<usize> {
    match name {
        "T" => Some(FEATURE_COUNT - 2),
        "U" => Some(FEATURE_COUNT - 1),
        _ => {
            let (layer, metric) = name.split_once('_')?;
            let layer: LayerKind = layer.parse().ok()?;
            let m = METRIC_NAMES.iter().position(|&x| x == metric)?;
            Some(layer.index() * LAYER_FEATURES + m)
        }
    }
}

/// Column indices of one layer's nine metrics.
pub fn layer_columns(kind: LayerKind) -> Vec<usize> {
    let start = kind.index() * LAYER_FEATURES;
    (start..start + LAYER_FEATURES).collect()
}

pub fn assemble_vector(net: &MultiLayerNetwork) -> FeatureVector {
    let mut v = [0.0; FEATURE_COUNT];
    for kind in LayerKind::ALL {
        let f = extract_layer_features(net.layer(kind)).to_array();
        let start = kind.index() * LAYER_FEATURES;
        v[start..start + LAYER_FEATURES].copy_from_slice(&f);
    }
    v[FEATURE_COUNT - 2] = net.pure_tweet_count() as f64;
    v[FEATURE_COUNT - 1] = net.pure_tweet_users() as f64;
    FeatureVector(v)
}

/// Nine metrics of the aggregated single-layer graph plus T and U.
pub fn single_layer_features(net: &MultiLayerNetwork) -> [f64; LAYER_FEATURES + 2] {
    let (g, _) = net.aggregated_graph();
    let mut out = [0.0; LAYER_FEATURES + 2];
    out[..LAYER_FEATURES].copy_from_slice(&graph_features(&g).to_array());
    out[LAYER_FEATURES] = net.pure_tweet_count() as f64;
    out[LAYER_FEATURES + 1] = net.pure_tweet_users() as f64;
    out
}

pub fn single_layer_names() -> Vec<String> {
    let mut names: Vec<String> = METRIC_NAMES.iter().map(|m| format!("ALL_{m}")).collect();
    names.push("T".into());
    names.push("U".into());
    names
}

/// One row of a features table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub article_id: String,
    pub label: ClassLabel,
    pub source: String,
    pub bias: Bias,
    pub n_users: usize,
    pub features: FeatureVector,
}

pub const METADATA_COLUMNS: [&str; 5] = ["article_id", "label", "source", "bias", "n_users"];

/// Writes the features table: five metadata columns then 38 features.
/// Floats use Rust's shortest round-trip representation.
pub fn write_feature_table<W: Write>(w: W, rows: &[FeatureRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = METADATA_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(feature_names());
    wtr.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.article_id.clone(),
            row.label.to_string(),
            row.source.clone(),
            row.bias.as_str().to_string(),
            row.n_users.to_string(),
        ];
        rec.extend(row.features.0.iter().map(|x| x.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_feature_table<R: Read>(r: R) -> Result<Vec<FeatureRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    let expected: Vec<String> = METADATA_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(feature_names())
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Format("unexpected features table header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::Format(format!("features row {}: bad {what}", i + 1));
        let mut v = [0.0; FEATURE_COUNT];
        for (j, slot) in v.iter_mut().enumerate() {
            *slot = rec[METADATA_COLUMNS.len() + j]
                .parse()
                .map_err(|_| bad(&expected[METADATA_COLUMNS.len() + j]))?;
        }
        rows.push(FeatureRow {
            article_id: rec[0].to_string(),
            label: rec[1].parse()?,
            source: rec[2].to_string(),
            bias: rec[3].parse()?,
            n_users: rec[4].parse().map_err(|_| bad("n_users"))?,
            features: FeatureVector(v),
        });
    }
    Ok(rows)
}

/// Builds networks and feature rows for every cascade, in input order.
/// Work is spread over the current rayon pool.
pub fn featurize_cascades(cascades: &[ArticleCascade]) -> Result<Vec<FeatureRow>> {
    cascades
        .par_iter()
        .map(|c| {
            let net = build_network(c)?;
            Ok(FeatureRow {
                article_id: c.article_id.clone(),
                label: c.label.class_label,
                source: c.label.source.clone(),
                bias: c.label.bias,
                n_users: aggregate_user_count(&net),
                features: assemble_vector(&net),
            })
        })
        .collect()
}
