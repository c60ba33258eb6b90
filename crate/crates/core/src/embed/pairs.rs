use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EmbeddingModel;
use crate::error::{Error, Result};

const HYPOCORISTICS: &str = include_str!("../../data/hypocoristics.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordPair {
    pub source: String,
    pub target: String,
    pub role: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordPairList {
    pub pairs: Vec<WordPair>,
}

impl WordPairList {
    /// Two whitespace-separated tokens per line, optionally a role label as
    /// a third field. Blank lines and `#` comments are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&parts.len()) {
                return Err(Error::Format(format!("pair list line {}: {line:?}", n + 1)));
            }
            pairs.push(WordPair {
                source: parts[0].to_lowercase(),
                target: parts[1].to_lowercase(),
                role: parts.get(2).map(|r| r.to_string()),
            });
        }
        if pairs.is_empty() {
            return Err(Error::Validation("pair list is empty".into()));
        }
        Ok(Self { pairs })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// The shipped list of hypocoristic pairs.
    pub fn hypocoristics() -> Self {
        Self::from_reader(HYPOCORISTICS.as_bytes()).expect("shipped pair list is valid")
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub source: String,
    pub target: String,
    /// `None` when either token is out of vocabulary.
    pub cosine: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEvaluation {
    pub mean: f64,
    pub oov: usize,
    pub scores: Vec<PairScore>,
}

/// Mean cosine over pairs whose tokens are both known; other pairs are
/// skipped and counted.
pub fn evaluate_pairs(model: &EmbeddingModel, list: &WordPairList) -> Result<PairEvaluation> {
    if list.is_empty() {
        return Err(Error::Validation("pair list is empty".into()));
    }
    let scores: Vec<PairScore> = list
        .pairs
        .iter()
        .map(|p| PairScore {
            source: p.source.clone(),
            target: p.target.clone(),
            cosine: model.cosine(&p.source, &p.target).ok(),
        })
        .collect();
    let known: Vec<f64> = scores.iter().filter_map(|s| s.cosine).collect();
    if known.is_empty() {
        return Err(Error::InsufficientData("every pair is out of vocabulary".into()));
    }
    Ok(PairEvaluation {
        mean: known.iter().sum::<f64>() / known.len() as f64,
        oov: scores.len() - known.len(),
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> EmbeddingModel {
        EmbeddingModel::from_vectors(
            vec!["arvo".into(), "afternoon".into(), "smoko".into(), "break".into()],
            vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![0.0, 1.0], vec![1.0, 1.0]],
        )
        .unwrap()
    }

    fn list(s: &str) -> WordPairList {
        WordPairList::from_reader(s.as_bytes()).unwrap()
    }

    #[test]
    fn shipped_list_has_all_pairs() {
        let l = WordPairList::hypocoristics();
        assert_eq!(l.len(), 59);
        assert_eq!(l.pairs[2].source, "arvo");
        assert_eq!(l.pairs[2].target, "afternoon");
    }

    #[test]
    fn identical_pairs() {
        let e = evaluate_pairs(&model(), &list("arvo arvo\nsmoko smoko\n")).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-12);
        assert_eq!(e.oov, 0);
    }

    #[test]
    fn oov_pairs_skipped() {
        let e = evaluate_pairs(&model(), &list("arvo afternoon\nbogan redneck\nsmoko break\n")).unwrap();
        assert_eq!(e.oov, 1);
        // cos(arvo, afternoon) = 0.6; cos(smoko, break) = 1/√2
        let expected = (0.6 + 1.0 / 2f64.sqrt()) / 2.0;
        assert!((e.mean - expected).abs() < 1e-7, "{}", e.mean);
        assert!(e.scores[1].cosine.is_none());
    }

    #[test]
    fn all_oov_is_error() {
        assert!(evaluate_pairs(&model(), &list("x y\n")).is_err());
        assert!(WordPairList::from_reader("".as_bytes()).is_err());
        assert!(WordPairList::from_reader("one\n".as_bytes()).is_err());
    }
}
