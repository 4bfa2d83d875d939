// Builds the 38-entry feature vector of every article and writes the
// features table to stdout.
//
// cargo run --example featurize

use diffnet::features::{feature_names, featurize_cascades, write_feature_table};
use diffnet::synth::{generate_corpus, GeneratorConfig};

pub fn run_example() -> diffnet::Result<()> {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = 3;
    cfg.mainstream.n_articles = 3;
    let rows = featurize_cascades(&generate_corpus(&cfg)?.cascades())?;
    println!("{} features: {}", feature_names().len(), feature_names().join(" "));
    let mut table = Vec::new();
    write_feature_table(&mut table, &rows)?;
    print!("{}", String::from_utf8_lossy(&table));
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
