// Scores each layer's nine features on their own, and the multi-layer
// model against the single aggregated-graph baseline.
//
// cargo run --example layer_ablation

use diffnet::experiments::{evaluate, layer_ablation, single_layer_baseline, SizeFilter};
use diffnet::features::featurize_cascades;
use diffnet::model::CvConfig;
use diffnet::netbuild::LayerKind;
use diffnet::synth::{generate_corpus, GeneratorConfig};

pub fn run_example() -> diffnet::Result<()> {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = 50;
    cfg.mainstream.n_articles = 50;
    let cascades = generate_corpus(&cfg)?.cascades();
    let rows = featurize_cascades(&cascades)?;
    let cv = CvConfig { folds: 5, ..CvConfig::default() };
    for layer in LayerKind::ALL {
        println!("{layer:>2}  {}", layer_ablation(&rows, layer, SizeFilter::All, &cv)?.summary_line());
    }
    println!("all {}", evaluate(&rows, SizeFilter::All, &cv)?.summary_line());
    println!("agg {}", single_layer_baseline(&cascades, &cv)?.summary_line());
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
