use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Collocation statistics for one merge pass. Pass 1 joins bigrams; a second
/// pass learned on pass-1 output yields trigrams such as `te_reo_māori`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseModel {
    pub unigrams: HashMap<String, u64>,
    pub bigrams: HashMap<(String, String), u64>,
    pub min_count: u64,
    pub threshold: f64,
    pub pass: u8,
    vocab_size: u64,
    /// Pairs whose score reaches the threshold. Loaded models carry only these.
    phrases: HashMap<(String, String), f64>,
}

impl PhraseModel {
    pub fn empty(min_count: u64, threshold: f64, pass: u8) -> Result<Self> {
        if min_count < 1 {
            return Err(Error::Validation("phrase min_count must be at least 1".into()));
        }
        if !(threshold > 0.0) {
            return Err(Error::Validation("phrase threshold must be positive".into()));
        }
        if !(1..=2).contains(&pass) {
            return Err(Error::Validation("phrase pass must be 1 or 2".into()));
        }
        Ok(Self {
            unigrams: HashMap::new(),
            bigrams: HashMap::new(),
            min_count,
            threshold,
            pass,
            vocab_size: 0,
            phrases: HashMap::new(),
        })
    }

    /// Adds the counts of one document.
    pub fn observe(&mut self, tokens: &[String]) {
        for t in tokens {
            *self.unigrams.entry(t.clone()).or_default() += 1;
        }
        for w in tokens.windows(2) {
            *self.bigrams.entry((w[0].clone(), w[1].clone())).or_default() += 1;
        }
    }

    /// Folds in counts gathered on another partition. Count merging is
    /// associative and commutative, so partitions can be reduced in any order.
    pub fn merge_counts(&mut self, other: &PhraseModel) {
        for (k, v) in &other.unigrams {
            *self.unigrams.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.bigrams {
            *self.bigrams.entry(k.clone()).or_default() += v;
        }
    }

    /// Recomputes the merge table from the current counts.
    pub fn finalize(&mut self) {
        self.vocab_size = self.unigrams.len() as u64;
        self.phrases = self
            .bigrams
            .iter()
            .filter_map(|(pair, &n)| {
                let s = self.score_counts(n, &pair.0, &pair.1)?;
                (s >= self.threshold).then(|| (pair.clone(), s))
            })
            .collect();
    }

    fn score_counts(&self, n_ab: u64, a: &str, b: &str) -> Option<f64> {
        let ca = *self.unigrams.get(a)?;
        let cb = *self.unigrams.get(b)?;
        Some((n_ab as f64 - self.min_count as f64) * self.vocab_size as f64 / (ca as f64 * cb as f64))
    }

    /// Collocation score of an adjacent pair, `None` if the pair was never seen.
    pub fn score(&self, a: &str, b: &str) -> Option<f64> {
        let key = (a.to_string(), b.to_string());
        match self.bigrams.get(&key) {
            Some(&n) => self.score_counts(n, a, b),
            None => self.phrases.get(&key).copied(),
        }
    }

    pub fn vocab_size(&self) -> u64 {
        self.vocab_size
    }

    pub fn is_phrase(&self, a: &str, b: &str) -> bool {
        self.phrases.contains_key(&(a.to_string(), b.to_string()))
    }

    /// Merged pairs, sorted.
    pub fn phrases(&self) -> Vec<(String, String)> {
        let mut v: Vec<_> = self.phrases.keys().cloned().collect();
        v.sort();
        v
    }

    /// Writes `token_a token_b count score` for every merging pair.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# min_count={} threshold={} pass={} vocab={}", self.min_count, self.threshold, self.pass, self.vocab_size)?;
        let mut rows: Vec<_> = self.phrases.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        for ((a, b), s) in rows {
            let n = self.bigrams.get(&(a.clone(), b.clone())).copied().unwrap_or(0);
            writeln!(w, "{a} {b} {n} {s}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(f)
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Format("empty phrase model".into()))?;
        let mut params: HashMap<&str, &str> = HashMap::new();
        for kv in header.trim_start_matches('#').split_whitespace() {
            if let Some((k, v)) = kv.split_once('=') {
                params.insert(k, v);
            }
        }
        let get = |k: &str| -> Result<&str> {
            params
                .get(k)
                .copied()
                .ok_or_else(|| Error::Format(format!("phrase model header lacks {k}")))
        };
        let bad = |what: &str| Error::Format(format!("bad phrase model {what}"));
        let mut model = Self::empty(
            get("min_count")?.parse().map_err(|_| bad("min_count"))?,
            get("threshold")?.parse().map_err(|_| bad("threshold"))?,
            get("pass")?.parse().map_err(|_| bad("pass"))?,
        )?;
        model.vocab_size = get("vocab")?.parse().map_err(|_| bad("vocab"))?;
        for line in lines {
            let line = line?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.is_empty() {
                continue;
            }
            let [a, b, _, s] = parts[..] else {
                return Err(bad("line"));
            };
            let score: f64 = s.parse().map_err(|_| bad("score"))?;
            model.phrases.insert((a.to_string(), b.to_string()), score);
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Counts unigrams and adjacent pairs over the corpus and fixes the merge
/// table. `V` in the score is the number of distinct unigram types.
pub fn learn_phrases<D: AsRef<[String]>>(
    corpus: &[D],
    min_count: u64,
    threshold: f64,
) -> Result<PhraseModel> {
    learn_phrases_pass(corpus, min_count, threshold, 1)
}

pub fn learn_phrases_pass<D: AsRef<[String]>>(
    corpus: &[D],
    min_count: u64,
    threshold: f64,
    pass: u8,
) -> Result<PhraseModel> {
    let mut model = PhraseModel::empty(min_count, threshold, pass)?;
    for doc in corpus {
        model.observe(doc.as_ref());
    }
    model.finalize();
    Ok(model)
}

/// Learns a bigram model, applies it, then learns a second model on the
/// merged text so that three-word phrases can form.
pub fn learn_phrases_two_pass<D: AsRef<[String]>>(
    corpus: &[D],
    min_count: u64,
    threshold: f64,
) -> Result<(PhraseModel, PhraseModel)> {
    let first = learn_phrases_pass(corpus, min_count, threshold, 1)?;
    let merged: Vec<Vec<String>> = corpus.iter().map(|d| apply_phrases(d.as_ref(), &first)).collect();
    let second = learn_phrases_pass(&merged, min_count, threshold, 2)?;
    Ok((first, second))
}

/// Joins merging pairs with `_`, scanning left to right without overlap.
pub fn apply_phrases(tokens: &[String], model: &PhraseModel) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if i + 1 < tokens.len() && model.is_phrase(&tokens[i], &tokens[i + 1]) {
            out.push(format!("{}_{}", tokens[i], tokens[i + 1]));
            i += 2;
        } else {
            out.push(tokens[i].clone());
            i += 1;
        }
    }
    out
}
