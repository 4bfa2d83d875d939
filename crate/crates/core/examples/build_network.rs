// Turns a handful of tweets about one article into its four interaction
// layers and prints them in the network text format.
//
// cargo run --example build_network

use diffnet::ingest::{ArticleCascade, ArticleLabel, Bias, ClassLabel, TweetRecord};
use diffnet::netbuild::{build_network, write_network, LayerKind};

pub fn run_example() -> diffnet::Result<()> {
    let mut tweets = vec![TweetRecord::original("1", "alice", 100, "a1")];
    let mut rt = TweetRecord::original("2", "bob", 160, "a1");
    rt.retweet_of = Some("alice".into());
    let mut quote = TweetRecord::original("3", "carol", 200, "a1");
    quote.quote_of = Some("bob".into());
    quote.mentions = vec!["alice".into(), "dave".into()];
    let mut reply = TweetRecord::original("4", "dave", 260, "a1");
    reply.reply_to = Some("carol".into());
    tweets.extend([rt, quote, reply, TweetRecord::original("5", "erin", 300, "a1")]);

    let label = ArticleLabel {
        article_id: "a1".into(),
        class_label: ClassLabel::D,
        source: "example.org".into(),
        bias: Bias::Unlabeled,
    };
    let net = build_network(&ArticleCascade::new(label, tweets))?;
    for kind in LayerKind::ALL {
        println!("{kind}: {} edges", net.layer(kind).edge_count());
    }
    let mut text = Vec::new();
    write_network(&mut text, &net)?;
    print!("{}", String::from_utf8_lossy(&text));
    Ok(())
}

#[allow(dead_code)]
fn main() -> diffnet::Result<()> {
    run_example()
}
