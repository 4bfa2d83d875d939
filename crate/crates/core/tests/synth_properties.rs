use diffnet::features::{featurize_cascades, FeatureRow};
use diffnet::ingest::{parse_records, ClassLabel};
use diffnet::synth::{generate_corpus, GeneratorConfig};

fn small_config(per_class: usize, seed: u64) -> GeneratorConfig {
    let mut cfg = GeneratorConfig::default();
    cfg.disinformation.n_articles = per_class;
    cfg.mainstream.n_articles = per_class;
    cfg.seed = seed;
    cfg
}

fn class_mean(rows: &[FeatureRow], class: ClassLabel, name: &str) -> f64 {
    let vals: Vec<f64> = rows.iter().filter(|r| r.label == class).map(|r| r.features.get(name).unwrap()).collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}

#[test]
fn generated_records_parse_cleanly_and_are_deterministic() {
    let cfg = small_config(20, 5);
    let corpus = generate_corpus(&cfg).unwrap();
    assert_eq!(corpus, generate_corpus(&cfg).unwrap());
    assert_ne!(corpus, generate_corpus(&small_config(20, 6)).unwrap());

    let mut buf = Vec::new();
    diffnet::ingest::write_records(&mut buf, &corpus.records).unwrap();
    let parsed = parse_records(buf.as_slice()).unwrap();
    assert_eq!(parsed.malformed, 0);
    assert_eq!(parsed.duplicates, 0);
    assert_eq!(parsed.records.len(), corpus.records.len());
    assert_eq!(corpus.labels.len(), 40);
    assert!(corpus.records.iter().all(|r| r.timestamp >= cfg.collection_start));
}

#[test]
fn disinformation_cascades_are_larger_in_rt_and_m_layers() {
    let corpus = generate_corpus(&small_config(200, 9)).unwrap();
    let rows = featurize_cascades(&corpus.cascades()).unwrap();
    for name in ["RT_LWCC", "RT_DWCC", "M_LWCC", "M_DWCC"] {
        let (d, m) = (class_mean(&rows, ClassLabel::D, name), class_mean(&rows, ClassLabel::M, name));
        assert!(d > m, "{name}: D {d} vs M {m}");
    }
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = small_config(5, 0);
    cfg.mainstream.quote_rate = 1.5;
    assert!(generate_corpus(&cfg).is_err());
}
