use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tokenize::TokenizedDoc;
use crate::error::{Error, Result};

/// Coarse part-of-speech classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    NN,
    NNS,
    VB,
    VBD,
    VBN,
    VBG,
    JJ,
    RB,
    IN,
    DET,
    PRP,
    MOD,
    OTHER,
}

impl Tag {
    pub const ALL: [Tag; 13] = [
        Tag::NN,
        Tag::NNS,
        Tag::VB,
        Tag::VBD,
        Tag::VBN,
        Tag::VBG,
        Tag::JJ,
        Tag::RB,
        Tag::IN,
        Tag::DET,
        Tag::PRP,
        Tag::MOD,
        Tag::OTHER,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::NN => "NN",
            Tag::NNS => "NNS",
            Tag::VB => "VB",
            Tag::VBD => "VBD",
            Tag::VBN => "VBN",
            Tag::VBG => "VBG",
            Tag::JJ => "JJ",
            Tag::RB => "RB",
            Tag::IN => "IN",
            Tag::DET => "DET",
            Tag::PRP => "PRP",
            Tag::MOD => "MOD",
            Tag::OTHER => "OTHER",
        }
    }

    pub fn is_verb(self) -> bool {
        matches!(self, Tag::VB | Tag::VBD | Tag::VBN | Tag::VBG)
    }

    pub fn is_noun(self) -> bool {
        matches!(self, Tag::NN | Tag::NNS)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Validation(format!("unknown POS tag {s:?}")))
    }
}

const SEED_CORPUS: &str = include_str!("../../data/pos_seed.txt");

/// Unambiguous function words, tagged without consulting the model.
const CLOSED_CLASS: &[(&str, Tag)] = &[
    ("a", Tag::DET),
    ("about", Tag::IN),
    ("after", Tag::IN),
    ("am", Tag::VB),
    ("an", Tag::DET),
    ("and", Tag::OTHER),
    ("are", Tag::VB),
    ("at", Tag::IN),
    ("be", Tag::VB),
    ("been", Tag::VBN),
    ("being", Tag::VBG),
    ("but", Tag::OTHER),
    ("by", Tag::IN),
    ("can", Tag::MOD),
    ("could", Tag::MOD),
    ("did", Tag::VBD),
    ("during", Tag::IN),
    ("each", Tag::DET),
    ("every", Tag::DET),
    ("for", Tag::IN),
    ("from", Tag::IN),
    ("had", Tag::VBD),
    ("has", Tag::VB),
    ("have", Tag::VB),
    ("he", Tag::PRP),
    ("i", Tag::PRP),
    ("if", Tag::IN),
    ("in", Tag::IN),
    ("into", Tag::IN),
    ("is", Tag::VB),
    ("it", Tag::PRP),
    ("its", Tag::DET),
    ("may", Tag::MOD),
    ("me", Tag::PRP),
    ("might", Tag::MOD),
    ("must", Tag::MOD),
    ("my", Tag::DET),
    ("never", Tag::RB),
    ("not", Tag::RB),
    ("of", Tag::IN),
    ("on", Tag::IN),
    ("or", Tag::OTHER),
    ("our", Tag::DET),
    ("shall", Tag::MOD),
    ("she", Tag::PRP),
    ("should", Tag::MOD),
    ("some", Tag::DET),
    ("the", Tag::DET),
    ("their", Tag::DET),
    ("them", Tag::PRP),
    ("these", Tag::DET),
    ("they", Tag::PRP),
    ("those", Tag::DET),
    ("to", Tag::IN),
    ("us", Tag::PRP),
    ("very", Tag::RB),
    ("was", Tag::VBD),
    ("we", Tag::PRP),
    ("were", Tag::VBD),
    ("will", Tag::MOD),
    ("with", Tag::IN),
    ("would", Tag::MOD),
    ("you", Tag::PRP),
    ("your", Tag::DET),
];

fn closed_class(word: &str) -> Option<Tag> {
    CLOSED_CLASS
        .binary_search_by(|(w, _)| w.cmp(&word))
        .ok()
        .map(|i| CLOSED_CLASS[i].1)
}

/// Tag guess from word shape alone, used for words the model has never seen.
pub fn suffix_rule(word: &str) -> Tag {
    if word.starts_with('<') || word.chars().all(|c| c.is_ascii_digit()) {
        return if word.starts_with('<') { Tag::NN } else { Tag::OTHER };
    }
    if word.ends_with("ing") && word.len() > 4 {
        Tag::VBG
    } else if word.ends_with("ed") && word.len() > 3 {
        Tag::VBD
    } else if word.ends_with("ly") && word.len() > 3 {
        Tag::RB
    } else if ["ous", "ful", "ive", "able", "ible", "less", "ish", "ic", "al"]
        .iter()
        .any(|s| word.ends_with(s) && word.len() > s.len() + 2)
    {
        Tag::JJ
    } else if word.ends_with('s') && !word.ends_with("ss") && word.len() > 3 {
        Tag::NNS
    } else {
        Tag::NN
    }
}

type Weights = HashMap<String, [f64; 13]>;

/// Averaged perceptron tagger over the coarse tagset.
#[derive(Debug, Clone, PartialEq)]
pub struct Tagger {
    weights: Weights,
    /// Frequent words seen with a single tag in training.
    tagdict: HashMap<String, Tag>,
}

static SEED: LazyLock<Tagger> = LazyLock::new(|| {
    let sents = parse_tagged(SEED_CORPUS).expect("shipped seed corpus parses");
    Tagger::train(&sents, 8, 17)
});

fn features(i: usize, words: &[String], prev: Tag, prev2: Tag) -> Vec<String> {
    let w = words[i].as_str();
    let at = |j: isize| -> &str {
        let k = i as isize + j;
        if k < 0 {
            "-START-"
        } else {
            words.get(k as usize).map(String::as_str).unwrap_or("-END-")
        }
    };
    let suffix = |s: &str, n: usize| -> String {
        let c: Vec<char> = s.chars().collect();
        c[c.len().saturating_sub(n)..].iter().collect()
    };
    let prefix: String = w.chars().take(1).collect();
    vec![
        "bias".to_string(),
        format!("w {w}"),
        format!("s3 {}", suffix(w, 3)),
        format!("s2 {}", suffix(w, 2)),
        format!("p1 {prefix}"),
        format!("rule {}", suffix_rule(w)),
        format!("t-1 {prev}"),
        format!("t-2 {prev2}"),
        format!("t-1t-2 {prev} {prev2}"),
        format!("t-1w {prev} {w}"),
        format!("w-1 {}", at(-1)),
        format!("s3-1 {}", suffix(at(-1), 3)),
        format!("w-2 {}", at(-2)),
        format!("w+1 {}", at(1)),
        format!("s3+1 {}", suffix(at(1), 3)),
        format!("w+2 {}", at(2)),
    ]
}

fn argmax(scores: &[f64; 13]) -> Tag {
    let mut best = 0;
    for k in 1..13 {
        if scores[k] > scores[best] {
            best = k;
        }
    }
    Tag::ALL[best]
}

/// Parses `word/TAG word/TAG ...` lines; blank lines and `#` comments skipped.
pub fn parse_tagged(text: &str) -> Result<Vec<(Vec<String>, Vec<Tag>)>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = Vec::new();
        let mut tags = Vec::new();
        for item in line.split_whitespace() {
            let (w, t) = item
                .rsplit_once('/')
                .ok_or_else(|| Error::Format(format!("untagged item {item:?}")))?;
            words.push(w.to_lowercase());
            tags.push(t.parse()?);
        }
        out.push((words, tags));
    }
    Ok(out)
}

impl Tagger {
    /// The tagger trained on the shipped seed corpus.
    pub fn seed() -> &'static Tagger {
        &SEED
    }

    pub fn train(sentences: &[(Vec<String>, Vec<Tag>)], iterations: usize, seed: u64) -> Tagger {
        let mut counts: HashMap<&str, [u32; 13]> = HashMap::new();
        for (words, tags) in sentences {
            for (w, t) in words.iter().zip(tags) {
                counts.entry(w).or_insert([0; 13])[t.index()] += 1;
            }
        }
        let tagdict: HashMap<String, Tag> = counts
            .iter()
            .filter_map(|(w, c)| {
                let total: u32 = c.iter().sum();
                let (k, &top) = c.iter().enumerate().max_by_key(|(_, n)| **n)?;
                (total >= 3 && f64::from(top) / f64::from(total) >= 0.97).then(|| (w.to_string(), Tag::ALL[k]))
            })
            .collect();

        let mut weights: Weights = HashMap::new();
        let mut totals: Weights = HashMap::new();
        let mut stamps: HashMap<String, [u64; 13]> = HashMap::new();
        let mut step: u64 = 0;
        let mut order: Vec<usize> = (0..sentences.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut update = |weights: &mut Weights, feat: &str, k: usize, delta: f64, step: u64| {
            let w = weights.entry(feat.to_string()).or_insert([0.0; 13]);
            let tot = totals.entry(feat.to_string()).or_insert([0.0; 13]);
            let st = stamps.entry(feat.to_string()).or_insert([0; 13]);
            tot[k] += (step - st[k]) as f64 * w[k];
            st[k] = step;
            w[k] += delta;
        };

        for _ in 0..iterations {
            for &si in &order {
                let (words, gold) = &sentences[si];
                let (mut prev, mut prev2) = (Tag::OTHER, Tag::OTHER);
                for i in 0..words.len() {
                    let guess = match closed_class(&words[i]).or_else(|| tagdict.get(&words[i]).copied()) {
                        Some(t) => t,
                        None => {
                            let feats = features(i, words, prev, prev2);
                            let mut scores = [0.0; 13];
                            for f in &feats {
                                if let Some(w) = weights.get(f) {
                                    for k in 0..13 {
                                        scores[k] += w[k];
                                    }
                                }
                            }
                            let guess = argmax(&scores);
                            step += 1;
                            if guess != gold[i] {
                                for f in &feats {
                                    update(&mut weights, f, gold[i].index(), 1.0, step);
                                    update(&mut weights, f, guess.index(), -1.0, step);
                                }
                            }
                            guess
                        }
                    };
                    prev2 = prev;
                    prev = guess;
                }
            }
            order.shuffle(&mut rng);
        }

        let mut averaged = Weights::new();
        for (feat, w) in &weights {
            let tot = totals.get(feat).copied().unwrap_or([0.0; 13]);
            let st = stamps.get(feat).copied().unwrap_or([0; 13]);
            let mut avg = [0.0; 13];
            for k in 0..13 {
                let total = tot[k] + (step - st[k]) as f64 * w[k];
                avg[k] = if step > 0 { total / step as f64 } else { 0.0 };
            }
            if avg.iter().any(|v| *v != 0.0) {
                averaged.insert(feat.clone(), avg);
            }
        }
        Tagger {
            weights: averaged,
            tagdict,
        }
    }

    fn predict(&self, i: usize, words: &[String], prev: Tag, prev2: Tag) -> Tag {
        let w = words[i].as_str();
        if let Some(t) = closed_class(w).or_else(|| self.tagdict.get(w).copied()) {
            return t;
        }
        let feats = features(i, words, prev, prev2);
        let known = self.weights.contains_key(&feats[1]);
        let mut scores = [0.0; 13];
        for f in &feats {
            if let Some(v) = self.weights.get(f) {
                for k in 0..13 {
                    scores[k] += v[k];
                }
            }
        }
        if !known && scores.iter().all(|s| *s <= 0.0) {
            return suffix_rule(w);
        }
        argmax(&scores)
    }

    pub fn tag(&self, words: &[String]) -> Vec<Tag> {
        let (mut prev, mut prev2) = (Tag::OTHER, Tag::OTHER);
        let mut out = Vec::with_capacity(words.len());
        for i in 0..words.len() {
            let t = self.predict(i, words, prev, prev2);
            out.push(t);
            prev2 = prev;
            prev = t;
        }
        out
    }

    /// Writes the model as flat `key<TAB>value` lines: `w<TAB>feature<TAB>TAG`
    /// keys carry weights and `d<TAB>word` keys carry dictionary tags.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let sorted: BTreeMap<_, _> = self.weights.iter().collect();
        for (feat, w) in sorted {
            for (k, v) in w.iter().enumerate() {
                if *v != 0.0 {
                    writeln!(out, "w\t{feat}\t{}\t{v}", Tag::ALL[k])?;
                }
            }
        }
        let dict: BTreeMap<_, _> = self.tagdict.iter().collect();
        for (word, t) in dict {
            writeln!(out, "d\t{word}\t{t}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Tagger> {
        let mut weights = Weights::new();
        let mut tagdict = HashMap::new();
        for line in reader.lines() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            match parts[..] {
                ["w", feat, tag, v] => {
                    let t: Tag = tag.parse()?;
                    let v: f64 = v.parse().map_err(|_| Error::Format(format!("bad weight {v:?}")))?;
                    weights.entry(feat.to_string()).or_insert([0.0; 13])[t.index()] = v;
                }
                ["d", word, tag] => {
                    tagdict.insert(word.to_string(), tag.parse()?);
                }
                _ => return Err(Error::Format(format!("bad tagger line {line:?}"))),
            }
        }
        Ok(Tagger { weights, tagdict })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Tagger> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Attaches one tag per token.
pub fn pos_tag(doc: TokenizedDoc, tagger: &Tagger) -> TokenizedDoc {
    let tags = tagger.tag(&doc.tokens);
    TokenizedDoc {
        tags: Some(tags),
        ..doc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn closed_class_sorted() {
        assert!(CLOSED_CLASS.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn tag_round_trip() {
        for t in Tag::ALL {
            assert_eq!(t.as_str().parse::<Tag>().unwrap(), t);
        }
        assert!("XYZ".parse::<Tag>().is_err());
    }

    #[test]
    fn the_dog_runs() {
        let tags = Tagger::seed().tag(&t("the dog runs"));
        assert_eq!(tags[0], Tag::DET);
        assert_eq!(tags[1], Tag::NN);
        assert!(tags[2].is_verb(), "{tags:?}");
    }

    #[test]
    fn burnt_adjective_vs_past() {
        let tagger = Tagger::seed();
        assert_eq!(tagger.tag(&t("the burnt toast"))[1], Tag::JJ);
        assert_eq!(tagger.tag(&t("she burnt it"))[1], Tag::VBD);
    }

    #[test]
    fn tramp_noun_and_verb() {
        let tagger = Tagger::seed();
        assert_eq!(tagger.tag(&t("we went for a tramp"))[4], Tag::NN);
        assert_eq!(tagger.tag(&t("we tramp every weekend"))[1], Tag::VB);
    }

    #[test]
    fn unseen_words_fall_back_to_suffix_rule() {
        assert_eq!(suffix_rule("zorbing"), Tag::VBG);
        assert_eq!(suffix_rule("quickly"), Tag::RB);
        assert_eq!(suffix_rule("jandals"), Tag::NNS);
        assert_eq!(suffix_rule("2019"), Tag::OTHER);
    }

    #[test]
    fn pos_tag_lengths_match() {
        let doc = pos_tag(TokenizedDoc::new(t("sweet as bro")), Tagger::seed());
        assert_eq!(doc.tags.as_ref().unwrap().len(), doc.tokens.len());
    }

    #[test]
    fn model_file_round_trip() {
        let sents = parse_tagged("the/DET cat/NN sat/VBD\na/DET dog/NN ran/VBD\nthe/DET cats/NNS sat/VBD").unwrap();
        let m = Tagger::train(&sents, 3, 1);
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = Tagger::read(buf.as_slice()).unwrap();
        assert_eq!(back.tag(&t("the dog sat")), m.tag(&t("the dog sat")));
        assert_eq!(back.tagdict, m.tagdict);
    }
}
