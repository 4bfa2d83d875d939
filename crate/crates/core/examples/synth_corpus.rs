// Generates a small labelled corpus and writes `tweets.jsonl` and
// `labels.csv` to a directory (a temporary one by default).
//
// cargo run --example synth_corpus -- [out-dir]

use diffnet::synth::{generate_corpus, GeneratorConfig};

pub fn run_example() -> diffnet::Result<()> {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = 10;
    cfg.mainstream.n_articles = 10;
    let corpus = generate_corpus(&cfg)?;
    let out = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("diffnet-synth"));
    corpus.write_to(&out)?;
    println!("{} articles, {} tweets -> {}", corpus.labels.len(), corpus.records.len(), out.display());
    for c in corpus.cascades().iter().take(4) {
        println!("{} {} {} tweets", c.label.article_id, c.label.class_label, c.len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
