//! Static word embeddings: CBOW and skip-gram with negative sampling,
//! similarity queries and word-pair evaluation.

mod io;
mod pairs;
mod train;
mod vocab;

pub use pairs::{evaluate_pairs, PairEvaluation, PairScore, WordPair, WordPairList};
pub use train::{train, Architecture, TrainConfig};
pub use vocab::{build_vocab, Vocab};

use crate::classify::VectorLookup;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub(crate) vocab: Vocab,
    /// Row-major |V| × dim word vectors.
    pub(crate) input: Vec<f32>,
    /// Row-major |V| × dim context vectors.
    pub(crate) output: Vec<f32>,
    pub(crate) config: TrainConfig,
}

fn cos64(a: &[f32], b: &[f32]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (f64::from(*x), f64::from(*y));
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

fn unit(v: &[f32]) -> Vec<f64> {
    let norm = v.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
    v.iter()
        .map(|x| if norm > 0.0 { f64::from(*x) / norm } else { 0.0 })
        .collect()
}

impl EmbeddingModel {
    /// Builds a model from explicit vectors, e.g. for constructed geometry.
    /// Counts default to zero and context vectors to zero.
    pub fn from_vectors(words: Vec<String>, vectors: Vec<Vec<f32>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if words.len() != vectors.len() || dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Validation("words and equal-length vectors required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = words.iter().find(|w| !seen.insert(w.as_str())) {
            return Err(Error::Validation(format!("duplicate token {dup}")));
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite vector value".into()));
        }
        let n = words.len();
        Ok(Self {
            vocab: Vocab::from_parts(words, vec![0; n]),
            input: vectors.into_iter().flatten().collect(),
            output: vec![0.0; n * dim],
            config: TrainConfig {
                dim,
                ..TrainConfig::default()
            },
        })
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vocab.contains(token)
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.input[i * self.dim()..(i + 1) * self.dim()]
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.vocab.get(token).map(|i| self.row(i))
    }

    fn lookup(&self, token: &str) -> Result<usize> {
        self.vocab.get(token).ok_or_else(|| Error::Oov(token.to_string()))
    }

    /// Multiplies one stored vector by `factor`.
    pub fn scale_vector(&mut self, token: &str, factor: f32) -> Result<()> {
        let i = self.lookup(token)?;
        let d = self.dim();
        for x in &mut self.input[i * d..(i + 1) * d] {
            *x *= factor;
        }
        Ok(())
    }

    pub fn cosine(&self, a: &str, b: &str) -> Result<f64> {
        let (ia, ib) = (self.lookup(a)?, self.lookup(b)?);
        Ok(cos64(self.row(ia), self.row(ib)))
    }

    fn rank(&self, target: &[f64], exclude: &[usize], k: usize) -> Vec<(String, f64)> {
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .filter(|i| !exclude.contains(i))
            .map(|i| {
                let u = unit(self.row(i));
                (i, u.iter().zip(target).map(|(x, y)| x * y).sum())
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored
            .into_iter()
            .take(k)
            .map(|(i, s)| (self.vocab.word(i).to_string(), s))
            .collect()
    }

    /// The `k` nearest tokens by cosine, excluding the query itself.
    pub fn most_similar(&self, token: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let i = self.lookup(token)?;
        Ok(self.rank(&unit(self.row(i)), &[i], k))
    }

    /// Ranks tokens by cosine to `a + b − c` over unit vectors, excluding
    /// the three query tokens.
    pub fn analogy(&self, a: &str, b: &str, c: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let (ia, ib, ic) = (self.lookup(a)?, self.lookup(b)?, self.lookup(c)?);
        let (ua, ub, uc) = (unit(self.row(ia)), unit(self.row(ib)), unit(self.row(ic)));
        let target: Vec<f64> = (0..self.dim()).map(|d| ua[d] + ub[d] - uc[d]).collect();
        let norm = target.iter().map(|x| x * x).sum::<f64>().sqrt();
        let target: Vec<f64> = target.iter().map(|x| if norm > 0.0 { x / norm } else { 0.0 }).collect();
        Ok(self.rank(&target, &[ia, ib, ic], k))
    }
}

impl VectorLookup for EmbeddingModel {
    fn dim(&self) -> usize {
        self.config.dim
    }

    fn vector(&self, token: &str) -> Option<Vec<f64>> {
        self.get(token).map(|v| v.iter().map(|x| f64::from(*x)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(words: &[&str], vecs: &[&[f32]]) -> EmbeddingModel {
        EmbeddingModel::from_vectors(
            words.iter().map(|s| s.to_string()).collect(),
            vecs.iter().map(|v| v.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_basics() {
        let m = toy(&["a", "b", "c"], &[&[1.0, 2.0, 3.0], &[4.0, -5.0, 6.0], &[0.0, 0.0, 1.0]]);
        assert!((m.cosine("a", "a").unwrap() - 1.0).abs() < 1e-12);
        // 1*4 - 2*5 + 3*6 = 12; |a| = √14, |b| = √77
        let manual = 12.0 / (14f64.sqrt() * 77f64.sqrt());
        assert!((m.cosine("a", "b").unwrap() - manual).abs() < 1e-12);
        let o = toy(&["x", "y"], &[&[1.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(o.cosine("x", "y").unwrap(), 0.0);
        assert!(matches!(m.cosine("a", "zzz"), Err(Error::Oov(t)) if t == "zzz"));
    }

    #[test]
    fn neighbours() {
        let m = toy(&["a", "b", "c"], &[&[1.0, 0.0], &[0.9, 0.1], &[0.0, 1.0]]);
        let top = m.most_similar("a", 1).unwrap();
        assert_eq!(top[0].0, "b");
        assert!(m.most_similar("q", 1).is_err());
    }

    #[test]
    fn analogy_parallelogram() {
        // stroll sits at walk + hike - tramp
        let m = toy(
            &["tramp", "walk", "hike", "stroll", "noise1", "noise2"],
            &[
                &[1.0, 1.0, 0.0],
                &[0.0, 1.0, 1.0],
                &[1.0, 0.0, 0.0],
                &[0.0, 2.0, 1.0],
                &[-1.0, 0.0, 0.3],
                &[0.2, -1.0, 0.0],
            ],
        );
        let res = m.analogy("tramp", "walk", "hike", 3).unwrap();
        assert_eq!(res[0].0, "stroll");
        assert!(res.iter().all(|(w, _)| !["tramp", "walk", "hike"].contains(&w.as_str())));
    }

    #[test]
    fn analogy_collapse_matches_neighbours() {
        let m = toy(
            &["a", "b", "c", "d", "e"],
            &[&[1.0, 0.2], &[0.3, 1.0], &[0.9, 0.3], &[-0.5, 0.5], &[0.7, 0.8]],
        );
        let a = m.analogy("a", "b", "b", 10).unwrap();
        let ms: Vec<(String, f64)> = m.most_similar("a", 10).unwrap().into_iter().filter(|(w, _)| w != "b").collect();
        let names: Vec<&String> = a.iter().map(|x| &x.0).collect();
        let expected: Vec<&String> = ms.iter().map(|x| &x.0).collect();
        assert_eq!(names, expected);
    }

    fn arb_model() -> impl Strategy<Value = EmbeddingModel> {
        proptest::collection::vec(proptest::collection::vec(-1.0f32..1.0, 4), 3..12).prop_map(|vecs| {
            let words = (0..vecs.len()).map(|i| format!("w{i}")).collect();
            EmbeddingModel::from_vectors(words, vecs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(m in arb_model(), lambda in 0.01f32..50.0) {
            let n = m.len();
            let mut scaled = m.clone();
            scaled.scale_vector("w0", lambda).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = (format!("w{i}"), format!("w{j}"));
                    let c = m.cosine(&a, &b).unwrap();
                    prop_assert!((c - m.cosine(&b, &a).unwrap()).abs() < 1e-12);
                    prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&c));
                    prop_assert!((c - scaled.cosine(&a, &b).unwrap()).abs() < 1e-5);
                }
            }
        }

        #[test]
        fn neighbours_cover_vocabulary(m in arb_model()) {
            let n = m.len();
            let res = m.most_similar("w0", n - 1).unwrap();
            let mut names: Vec<String> = res.iter().map(|x| x.0.clone()).collect();
            prop_assert!(res.windows(2).all(|w| w[0].1 >= w[1].1));
            names.sort();
            let mut expected: Vec<String> = (1..n).map(|i| format!("w{i}")).collect();
            expected.sort();
            prop_assert_eq!(names, expected);
        }
    }
}
