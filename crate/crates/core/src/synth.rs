//! Seeded generators for corpora with known structure.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{RecordKind, RedditRecord, TextType, TextUnit};

/// Tokenized documents plus the token set each topic draws from.
#[derive(Debug, Clone)]
pub struct TopicCorpus {
    pub docs: Vec<Vec<String>>,
    pub topics: Vec<Vec<String>>,
}

fn topic_words(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Documents of `doc_len` tokens, each drawn uniformly from one of two
/// disjoint topic vocabularies, until `total_tokens` is reached.
pub fn two_topic_corpus(total_tokens: usize, words_per_topic: usize, doc_len: usize, seed: u64) -> TopicCorpus {
    let topics = vec![topic_words("alpha", words_per_topic), topic_words("beta", words_per_topic)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doc_len = doc_len.max(2);
    let mut docs = Vec::with_capacity(total_tokens / doc_len + 1);
    let mut produced = 0;
    while produced < total_tokens {
        let topic = &topics[docs.len() % 2];
        let n = doc_len.min(total_tokens - produced).max(2);
        docs.push((0..n).map(|_| topic.choose(&mut rng).expect("topic").clone()).collect());
        produced += n;
    }
    TopicCorpus { docs, topics }
}

/// Mean within-topic and cross-topic cosine over all token pairs.
pub fn topic_margin(model: &crate::embed::EmbeddingModel, topics: &[Vec<String>]) -> (f64, f64) {
    let (mut within, mut nw, mut cross, mut nc) = (0.0, 0usize, 0.0, 0usize);
    for (ti, a_words) in topics.iter().enumerate() {
        for (tj, b_words) in topics.iter().enumerate().skip(ti) {
            for (i, a) in a_words.iter().enumerate() {
                for (j, b) in b_words.iter().enumerate() {
                    if ti == tj && j <= i {
                        continue;
                    }
                    let Ok(c) = model.cosine(a, b) else { continue };
                    if ti == tj {
                        within += c;
                        nw += 1;
                    } else {
                        cross += c;
                        nc += 1;
                    }
                }
            }
        }
    }
    (within / nw.max(1) as f64, cross / nc.max(1) as f64)
}

/// Period corpora in which `source` moves from target A's context to
/// target B's. Each period holds alternating A-topic and B-topic documents
/// carrying their target, each followed by a short `source` document drawn
/// from B's context words with probability rising linearly from 0.1 to 0.9
/// (A's otherwise). The source shares contexts with the targets rather than
/// windows, since vector cosine tracks shared contexts.
#[derive(Debug, Clone)]
pub struct DriftCorpus {
    pub periods: Vec<Vec<Vec<String>>>,
    pub source: String,
    pub target_a: String,
    pub target_b: String,
}

pub fn planted_drift_corpus(n_periods: usize, docs_per_period: usize, seed: u64) -> DriftCorpus {
    let ctx_a = topic_words("sea", 30);
    let ctx_b = topic_words("deck", 30);
    let (source, target_a, target_b) = ("snapper".to_string(), "fish".to_string(), "card".to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut periods = Vec::with_capacity(n_periods);
    for p in 0..n_periods {
        let shift = if n_periods > 1 { 0.1 + 0.8 * p as f64 / (n_periods - 1) as f64 } else { 0.1 };
        let mut docs = Vec::with_capacity(2 * docs_per_period);
        for d in 0..docs_per_period {
            let in_b = d % 2 == 1;
            let (ctx, target) = if in_b { (&ctx_b, &target_b) } else { (&ctx_a, &target_a) };
            let mut doc: Vec<String> = (0..10).map(|_| ctx.choose(&mut rng).expect("ctx").clone()).collect();
            doc.insert(rng.random_range(0..=doc.len()), target.clone());
            docs.push(doc);
            let ctx = if rng.random::<f64>() < shift { &ctx_b } else { &ctx_a };
            let mut sd: Vec<String> = (0..10).map(|_| ctx.choose(&mut rng).expect("ctx").clone()).collect();
            sd.insert(rng.random_range(0..=sd.len()), source.clone());
            docs.push(sd);
        }
        periods.push(docs);
    }
    DriftCorpus {
        periods,
        source,
        target_a,
        target_b,
    }
}

/// Period corpora drawn from one fixed two-topic distribution.
pub fn stationary_periods(n_periods: usize, tokens_per_period: usize, words_per_topic: usize, seed: u64) -> Vec<Vec<Vec<String>>> {
    (0..n_periods)
        .map(|p| two_topic_corpus(tokens_per_period, words_per_topic, 20, seed.wrapping_add(p as u64 * 7919)).docs)
        .collect()
}

/// Text units whose communities share one filler vocabulary and differ only
/// in the place names mentioned. Returns the units and the full name list.
pub fn place_name_corpus(n_classes: usize, units_per_class: usize, seed: u64) -> (Vec<TextUnit>, Vec<String>) {
    const PLACES: [&str; 24] = [
        "auckland", "wellington", "christchurch", "dunedin", "hamilton", "tauranga",
        "napier", "nelson", "rotorua", "whanganui", "invercargill", "gisborne",
        "brisbane", "melbourne", "perth", "adelaide", "hobart", "darwin",
        "cairns", "geelong", "canberra", "townsville", "ballarat", "bendigo",
    ];
    let filler = ["the", "weather", "was", "good", "went", "to", "see", "mates", "in", "yesterday", "really", "nice", "trip", "from", "back"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = PLACES.len() / n_classes.max(1);
    let mut units = Vec::with_capacity(n_classes * units_per_class);
    for c in 0..n_classes {
        let names = &PLACES[c * per..(c + 1) * per];
        for i in 0..units_per_class {
            let mut words: Vec<&str> = (0..8).map(|_| *filler.choose(&mut rng).expect("filler")).collect();
            for _ in 0..2 {
                let at = rng.random_range(0..=words.len());
                words.insert(at, names.choose(&mut rng).expect("names"));
            }
            units.push(TextUnit {
                record_id: format!("c{c}u{i}"),
                community: format!("community{c}"),
                text_type: TextType::Rcomm,
                text: words.join(" "),
                created_utc: 1_500_000_000 + (i as i64) * 60,
                author: format!("user{}", i % 50),
                score: 1,
                moderator: false,
            });
        }
    }
    let names = PLACES[..per * n_classes].iter().map(|s| s.to_string()).collect();
    (units, names)
}

/// Archive-style records across a few communities with mixed kinds,
/// suitable for end-to-end runs. Timestamps spread over `days` days.
pub fn records(n: usize, communities: &[&str], days: i64, seed: u64) -> Vec<RedditRecord> {
    let words = [
        "sweet", "as", "mate", "the", "arvo", "was", "heaps", "good", "tramp", "bro", "footy", "on", "tonight", "keen",
        "for", "a", "feed", "jandals", "chilly", "bin", "togs", "beach", "reckon", "yeah", "nah", "munted", "chur",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = 1_356_998_400; // 2013-01-01
    let span = days.max(1) * 86_400;
    let mut out: Vec<RedditRecord> = (0..n)
        .map(|i| {
            let text: Vec<&str> = (0..rng.random_range(4..20)).map(|_| *words.choose(&mut rng).expect("words")).collect();
            let text = text.join(" ");
            let kind = if rng.random_bool(0.7) { RecordKind::Comment } else { RecordKind::Submission };
            let selfpost = rng.random_bool(0.5);
            RedditRecord {
                id: format!("t{i:06}"),
                author: format!("user{}", rng.random_range(0..40)),
                subreddit: communities[i % communities.len()].to_string(),
                created_utc: start + rng.random_range(0..span),
                kind,
                title: (kind == RecordKind::Submission).then(|| text.split(' ').take(4).collect::<Vec<_>>().join(" ")),
                selftext: (kind == RecordKind::Submission && selfpost).then(|| text.clone()),
                body: (kind == RecordKind::Comment).then(|| text.clone()),
                score: rng.random_range(-5..50),
                url: (kind == RecordKind::Submission && !selfpost).then(|| "https://example.org/x".to_string()),
                distinguished: None,
            }
        })
        .collect();
    out.sort_by_key(|r| r.created_utc);
    out
}

/// Serializes records as newline-delimited JSON.
pub fn to_ndjson(records: &[RedditRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let mut v = serde_json::to_value(r).expect("record serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("kind");
            obj.retain(|_, x| !x.is_null());
        }
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}
