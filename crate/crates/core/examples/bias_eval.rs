// Trains only on left- (then right-) leaning articles and tests on the
// rest, with and without one excluded source.
//
// cargo run --example bias_eval

use diffnet::experiments::bias_restricted_eval;
use diffnet::features::featurize_cascades;
use diffnet::ingest::Bias;
use diffnet::model::CvConfig;
use diffnet::synth::{generate_corpus, GeneratorConfig};

pub fn run_example() -> diffnet::Result<()> {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = 80;
    cfg.mainstream.n_articles = 80;
    let rows = featurize_cascades(&generate_corpus(&cfg)?.cascades())?;
    let cv = CvConfig { folds: 5, ..CvConfig::default() };
    for bias in [Bias::Left, Bias::Right] {
        println!("{bias:>5}: {}", bias_restricted_eval(&rows, bias, &[], &cv)?.summary_line());
    }
    let excluded = vec!["truthbomb.example".to_string()];
    println!("left, no truthbomb: {}", bias_restricted_eval(&rows, Bias::Left, &excluded, &cv)?.summary_line());
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
