// Stratified shuffle-split cross-validation of the logistic model on the
// full feature vector, with and without balanced class weights.
//
// cargo run --example cross_validate

use diffnet::experiments::{evaluate, SizeFilter};
use diffnet::features::featurize_cascades;
use diffnet::model::CvConfig;
use diffnet::synth::{generate_corpus, GeneratorConfig};

pub fn run_example() -> diffnet::Result<()> {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = 60;
    cfg.mainstream.n_articles = 40;
    let rows = featurize_cascades(&generate_corpus(&cfg)?.cascades())?;
    let mut cv = CvConfig { folds: 5, seed: 1, ..CvConfig::default() };
    println!("{}", evaluate(&rows, SizeFilter::All, &cv)?.to_text());
    cv.train.balanced = true;
    println!("balanced: {}", evaluate(&rows, SizeFilter::All, &cv)?.summary_line());
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
