//! Invariants of ingestion, network building and feature assembly.

use std::collections::BTreeSet;

use diffnet::features::{assemble_vector, FEATURE_COUNT};
use diffnet::ingest::*;
use diffnet::netbuild::*;
use proptest::prelude::*;

const USERS: [&str; 6] = ["u0", "u1", "u2", "u3", "u4", "u5"];

fn tweet_strategy() -> impl Strategy<Value = TweetRecord> {
    (
        0usize..6,
        1i64..5_000,
        prop::option::of(0usize..6),
        prop::option::of(0usize..6),
        prop::option::of(0usize..6),
        prop::collection::vec(0usize..6, 0..3),
    )
        .prop_map(|(a, ts, rt, q, r, m)| {
            let mut t = TweetRecord::original("", USERS[a], ts, "art");
            t.retweet_of = rt.map(|i| USERS[i].to_string());
            t.quote_of = q.map(|i| USERS[i].to_string());
            t.reply_to = r.map(|i| USERS[i].to_string());
            t.mentions = m.into_iter().map(|i| USERS[i].to_string()).collect();
            t.normalize();
            t
        })
}

fn cascade_strategy() -> impl Strategy<Value = ArticleCascade> {
    prop::collection::vec(tweet_strategy(), 1..40).prop_map(|mut tweets| {
        for (i, t) in tweets.iter_mut().enumerate() {
            t.tweet_id = format!("t{i:03}");
        }
        let label = ArticleLabel {
            article_id: "art".into(),
            class_label: ClassLabel::D,
            source: "s".into(),
            bias: Bias::Unlabeled,
        };
        ArticleCascade::new(label, tweets)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn layer_invariants(c in cascade_strategy()) {
        let net = build_network(&c).unwrap();
        for layer in net.layers() {
            let nodes = layer.nodes();
            for (a, b, w) in layer.edges() {
                prop_assert!(a != b);
                prop_assert!(w >= 1);
                prop_assert!(nodes.contains(a) && nodes.contains(b));
            }
            // nodes are exactly edge endpoints, so none is isolated
            let endpoints: BTreeSet<&str> = layer.edges().flat_map(|(a, b, _)| [a, b]).collect();
            prop_assert_eq!(nodes, endpoints);
        }
        prop_assert!(net.pure_tweet_users() <= net.pure_tweet_count());
    }

    #[test]
    fn weights_count_interactions(c in cascade_strategy()) {
        let net = build_network(&c).unwrap();
        let distinct = |t: &TweetRecord, x: &Option<String>| x.as_ref().is_some_and(|b| b != &t.author_id);
        let rt = c.tweets.iter().filter(|t| distinct(t, &t.retweet_of)).count() as u64;
        let r = c.tweets.iter().filter(|t| distinct(t, &t.reply_to)).count() as u64;
        let q = c.tweets.iter().filter(|t| distinct(t, &t.quote_of)).count() as u64;
        let m: u64 = c.tweets.iter().map(|t| t.mentions.iter().filter(|b| **b != t.author_id).count() as u64).sum();
        prop_assert_eq!(net.layer(LayerKind::RT).total_weight(), rt);
        prop_assert_eq!(net.layer(LayerKind::R).total_weight(), r);
        prop_assert_eq!(net.layer(LayerKind::Q).total_weight(), q);
        prop_assert_eq!(net.layer(LayerKind::M).total_weight(), m);
    }

    #[test]
    fn build_is_permutation_invariant(c in cascade_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut tweets = c.tweets.clone();
        tweets.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = ArticleCascade { tweets, ..c.clone() };
        prop_assert_eq!(build_network(&c).unwrap(), build_network(&shuffled).unwrap());
    }

    #[test]
    fn truncation_is_monotone(c in cascade_strategy(), x in 1i64..3000, y in 1i64..3000) {
        let (lo, hi) = (x.min(y), x.max(y));
        let small: BTreeSet<String> = truncate_by_lifetime(&c, lo).unwrap().tweets.into_iter().map(|t| t.tweet_id).collect();
        let large: BTreeSet<String> = truncate_by_lifetime(&c, hi).unwrap().tweets.into_iter().map(|t| t.tweet_id).collect();
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn vector_is_relabel_invariant(c in cascade_strategy()) {
        let rename = |u: &str| format!("renamed-{}", 9 - u[1..].parse::<u32>().unwrap());
        let mut renamed = c.clone();
        for t in renamed.tweets.iter_mut() {
            t.author_id = rename(&t.author_id);
            for x in [&mut t.retweet_of, &mut t.quote_of, &mut t.reply_to] {
                if let Some(v) = x.as_mut() {
                    *v = rename(v);
                }
            }
            t.mentions = t.mentions.iter().map(|m| rename(m)).collect();
        }
        let a = assemble_vector(&build_network(&c).unwrap());
        let b = assemble_vector(&build_network(&renamed).unwrap());
        prop_assert_eq!(a.as_slice().len(), FEATURE_COUNT);
        // DWCC/SV can change only when two largest WCCs tie; compare the rest exactly
        let net = build_network(&c).unwrap();
        for kind in LayerKind::ALL {
            let (g, _) = net.layer(kind).to_graph();
            let sizes: Vec<usize> = diffnet::graphops::weakly_connected_components(&g).iter().map(Vec::len).collect();
            let top = sizes.iter().copied().max().unwrap_or(0);
            let tie = sizes.iter().filter(|&&s| s == top).count() > 1;
            for (j, (x, y)) in a.layer(kind).iter().zip(b.layer(kind)).enumerate() {
                if tie && (j == 4 || j == 8) {
                    continue;
                }
                prop_assert!((x - y).abs() < 1e-12, "{kind} metric {j}: {x} vs {y}");
            }
        }
        prop_assert_eq!(&a.as_slice()[36..], &b.as_slice()[36..]);
    }

    #[test]
    fn records_round_trip(c in cascade_strategy()) {
        let mut buf = Vec::new();
        write_records(&mut buf, &c.tweets).unwrap();
        let parsed = parse_records(buf.as_slice()).unwrap();
        prop_assert_eq!(parsed.malformed, 0);
        prop_assert_eq!(parsed.records, c.tweets.clone());
    }

    #[test]
    fn network_text_round_trip(c in cascade_strategy()) {
        let net = build_network(&c).unwrap();
        let mut buf = Vec::new();
        write_network(&mut buf, &net).unwrap();
        prop_assert_eq!(read_networks(buf.as_slice()).unwrap(), vec![net]);
    }

    #[test]
    fn censoring_is_idempotent(c in cascade_strategy(), start in 1i64..3000, window in 1i64..3000) {
        let once = apply_censoring(vec![c], start, window).unwrap();
        let twice = apply_censoring(once.clone(), start, window).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn min_tweet_filter_is_monotone(cs in prop::collection::vec(cascade_strategy(), 0..8), a in 1usize..40, b in 1usize..40) {
        let cs: Vec<ArticleCascade> = cs
            .into_iter()
            .enumerate()
            .map(|(i, mut c)| {
                c.label.article_id = format!("art{i}");
                c
            })
            .collect();
        let (lo, hi) = (a.min(b), a.max(b));
        let kept = |k| -> BTreeSet<String> {
            filter_min_tweets(cs.clone(), k).unwrap().into_iter().map(|c| c.label.article_id).collect()
        };
        let expected_lo: BTreeSet<String> = cs.iter().filter(|c| c.len() >= lo).map(|c| c.label.article_id.clone()).collect();
        prop_assert_eq!(&kept(lo), &expected_lo);
        prop_assert!(kept(hi).is_subset(&kept(lo)));
    }
}
