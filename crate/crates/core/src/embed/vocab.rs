use std::collections::HashMap;

use crate::error::{Error, Result};

/// Token index with frequencies, most frequent first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub(crate) fn from_parts(words: Vec<String>, counts: Vec<u64>) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self { words, counts, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

pub(crate) fn count_tokens<D: AsRef<[String]>>(corpus: &[D]) -> HashMap<&str, u64> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for doc in corpus {
        for t in doc.as_ref() {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    counts
}

/// Orders by descending frequency, ties alphabetical.
pub(crate) fn sorted_by_frequency<'a>(counts: impl IntoIterator<Item = (&'a str, u64)>) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = counts.into_iter().map(|(w, c)| (w.to_string(), c)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Tokens occurring at least `min_count` times, most frequent first.
pub fn build_vocab<D: AsRef<[String]>>(corpus: &[D], min_count: u64) -> Result<Vocab> {
    let counts = count_tokens(corpus);
    let kept = sorted_by_frequency(counts.into_iter().filter(|(_, c)| *c >= min_count.max(1)));
    if kept.is_empty() {
        return Err(Error::InsufficientData(format!("no token reaches min_count {min_count}")));
    }
    let (words, counts) = kept.into_iter().unzip();
    Ok(Vocab::from_parts(words, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn docs(s: &[&str]) -> Vec<Vec<String>> {
        s.iter().map(|d| d.split_whitespace().map(String::from).collect()).collect()
    }

    #[test]
    fn min_count_filter() {
        let c = docs(&["a a a a b b b b b", "c"]);
        let v = build_vocab(&c, 5).unwrap();
        assert_eq!(v.words(), ["b"]);
        let all = build_vocab(&c, 1).unwrap();
        assert_eq!(all.words(), ["b", "a", "c"]);
        assert_eq!(all.counts(), [5, 4, 1]);
        assert!(build_vocab(&c, 6).is_err());
    }

    proptest! {
        #[test]
        fn matches_bruteforce_filter(
            raw in proptest::collection::vec(proptest::collection::vec(0u8..12, 0..30), 1..10),
            min_count in 1u64..6,
        ) {
            let corpus: Vec<Vec<String>> = raw.iter().map(|d| d.iter().map(|x| format!("t{x}")).collect()).collect();
            let mut freq: BTreeMap<String, u64> = BTreeMap::new();
            for d in &corpus {
                for t in d {
                    *freq.entry(t.clone()).or_default() += 1;
                }
            }
            let expected: BTreeMap<String, u64> = freq.into_iter().filter(|(_, c)| *c >= min_count).collect();
            match build_vocab(&corpus, min_count) {
                Ok(v) => {
                    let got: BTreeMap<String, u64> = v.words().iter().cloned().zip(v.counts().iter().copied()).collect();
                    prop_assert_eq!(got, expected);
                    prop_assert!(v.counts().windows(2).all(|w| w[0] >= w[1]));
                }
                Err(_) => prop_assert!(expected.is_empty()),
            }
        }
    }
}
