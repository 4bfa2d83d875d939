// Ranks features by χ² score and by the two-sample Kolmogorov-Smirnov
// statistic between the classes.
//
// cargo run --example feature_ranking

use diffnet::experiments::{chi2_ranking, ks_ranking};
use diffnet::features::featurize_cascades;
use diffnet::model::CvConfig;
use diffnet::synth::{generate_corpus, GeneratorConfig};

pub fn run_example() -> diffnet::Result<()> {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = 60;
    cfg.mainstream.n_articles = 60;
    let rows = featurize_cascades(&generate_corpus(&cfg)?.cascades())?;
    for f in chi2_ranking(&rows, &CvConfig { folds: 3, ..CvConfig::default() })?.iter().take(5) {
        println!("chi2 {:<8} {:.3}", f.name, f.score);
    }
    for (f, ks) in ks_ranking(&rows)?.iter().take(5) {
        println!("ks   {:<8} D={:.3} p={:.2e} reject={}", f.name, ks.statistic, ks.p_value, ks.rejected);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
