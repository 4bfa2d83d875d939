// Classifies articles from only the first hours or days of their
// diffusion, over the 1h..7d lifetime ladder.
//
// cargo run --example temporal_sweep

use diffnet::experiments::{default_lifetimes, temporal_sweep};
use diffnet::model::CvConfig;
use diffnet::synth::{generate_corpus, GeneratorConfig};

pub fn run_example() -> diffnet::Result<()> {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = 50;
    cfg.mainstream.n_articles = 50;
    let cascades = generate_corpus(&cfg)?.cascades();
    let cv = CvConfig { folds: 5, ..CvConfig::default() };
    for p in temporal_sweep(&cascades, &default_lifetimes(), &cv)? {
        println!("{:>4}  {}", p.lifetime.label, p.report.summary_line());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
