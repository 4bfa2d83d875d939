// Synthetic corpus → ingestion filters → features → cross-validation,
// compared against the single-layer baseline.
//
// cargo run --release --example end_to_end

use diffnet::experiments::{self, SizeFilter};
use diffnet::features::featurize_cascades;
use diffnet::ingest::{apply_censoring, filter_min_tweets};
use diffnet::model::CvConfig;
use diffnet::synth::{generate_corpus, GeneratorConfig};

pub fn run_example() -> diffnet::Result<()> {
    let cfg = GeneratorConfig::default();
    let corpus = generate_corpus(&cfg)?;
    let cascades = apply_censoring(corpus.cascades(), cfg.collection_start, 14 * 86_400)?;
    let cascades = filter_min_tweets(cascades, 50)?;
    println!("{} articles after filters", cascades.len());

    let rows = featurize_cascades(&cascades)?;
    let cv = CvConfig { seed: 7, ..CvConfig::default() };
    let multi = experiments::evaluate(&rows, SizeFilter::All, &cv)?;
    let single = experiments::single_layer_baseline(&cascades, &cv)?;
    println!("{}", multi.summary_line());
    println!("{}", single.summary_line());

    let top = experiments::chi2_ranking(&rows, &cv)?;
    for f in top.iter().take(5) {
        println!("chi2 {:<8} {:.3}", f.name, f.score);
    }
    for p in experiments::temporal_sweep(&cascades, &experiments::default_lifetimes(), &cv)? {
        println!("{:>4}  AUROC {:.4}", p.lifetime.label, p.report.auroc.mean);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
