use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{build_vocab, count_tokens, sorted_by_frequency, Vocab};
use super::EmbeddingModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Cbow,
    Sgns,
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cbow" => Ok(Self::Cbow),
            "sgns" | "skipgram" | "skip-gram" => Ok(Self::Sgns),
            other => Err(Error::Validation(format!("unknown architecture {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub epochs: usize,
    /// Starting learning rate, decayed linearly towards `alpha * 1e-4`.
    pub alpha: f32,
    /// Frequent-word downsampling threshold; 0 disables it.
    pub subsample: f64,
    pub architecture: Architecture,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 300,
            window: 5,
            min_count: 5,
            negatives: 5,
            epochs: 5,
            alpha: 0.025,
            subsample: 1e-4,
            architecture: Architecture::Sgns,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 || self.window < 1 || self.min_count < 1 {
            return Err(Error::Validation("dim, window and min_count must be at least 1".into()));
        }
        if !(self.alpha > 0.0) || self.subsample < 0.0 {
            return Err(Error::Validation("alpha must be positive and subsample non-negative".into()));
        }
        Ok(())
    }
}

/// Cumulative unigram^0.75 weights, sampled by binary search.
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(counts: &[u64]) -> Option<Self> {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        (acc > 0.0).then_some(Self { cumulative })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let r = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= r).min(self.cumulative.len() - 1)
    }
}

fn sigmoid(x: f32) -> f32 {
    if x > 20.0 {
        1.0
    } else if x < -20.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Vocabulary for a run: with an initial model, its tokens keep their rows
/// and counts accumulate; new tokens reaching `min_count` are appended.
fn merged_vocab<D: AsRef<[String]>>(corpus: &[D], min_count: u64, init: Option<&EmbeddingModel>) -> Result<Vocab> {
    let Some(init) = init else {
        return build_vocab(corpus, min_count);
    };
    let counts = count_tokens(corpus);
    let mut words: Vec<String> = init.vocab.words().to_vec();
    let mut freqs: Vec<u64> = words
        .iter()
        .zip(init.vocab.counts())
        .map(|(w, c)| c + counts.get(w.as_str()).copied().unwrap_or(0))
        .collect();
    let fresh = sorted_by_frequency(
        counts
            .into_iter()
            .filter(|(w, c)| *c >= min_count && !init.vocab.contains(w)),
    );
    for (w, c) in fresh {
        words.push(w);
        freqs.push(c);
    }
    Ok(Vocab::from_parts(words, freqs))
}

/// Trains CBOW or skip-gram vectors with negative sampling. Given `init`,
/// shared-vocabulary rows start from the earlier model and only new tokens
/// are randomly initialized.
pub fn train<D: AsRef<[String]>>(corpus: &[D], config: &TrainConfig, init: Option<&EmbeddingModel>) -> Result<EmbeddingModel> {
    config.validate()?;
    if let Some(m) = init {
        if m.config.dim != config.dim {
            return Err(Error::Validation(format!(
                "initial model has dim {}, config asks for {}",
                m.config.dim, config.dim
            )));
        }
    }
    let vocab = merged_vocab(corpus, config.min_count, init)?;
    let dim = config.dim;
    let v = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut input = vec![0f32; v * dim];
    let mut output = vec![0f32; v * dim];
    let shared = init.map_or(0, |m| m.vocab.len());
    if let Some(m) = init {
        input[..shared * dim].copy_from_slice(&m.input);
        output[..shared * dim].copy_from_slice(&m.output);
    }
    let half = 0.5 / dim as f32;
    for x in &mut input[shared * dim..] {
        *x = rng.random_range(-half..half);
    }

    let mut model = EmbeddingModel {
        vocab,
        input,
        output,
        config: *config,
    };

    let docs: Vec<Vec<usize>> = corpus
        .iter()
        .map(|d| d.as_ref().iter().filter_map(|t| model.vocab.get(t)).collect())
        .collect();
    let trainable = docs.iter().any(|d| d.len() >= 2);
    if config.epochs == 0 || (init.is_some() && !trainable) {
        return Ok(model);
    }
    if !trainable {
        return Err(Error::InsufficientData("corpus has no context pairs".into()));
    }

    let noise = NoiseTable::new(model.vocab.counts())
        .ok_or_else(|| Error::InsufficientData("vocabulary has no counts".into()))?;
    let total_words: u64 = docs.iter().map(|d| d.len() as u64).sum();
    let corpus_total: f64 = model.vocab.counts().iter().sum::<u64>() as f64;
    let keep_prob: Vec<f64> = model
        .vocab
        .counts()
        .iter()
        .map(|&c| {
            if config.subsample <= 0.0 || c == 0 {
                return 1.0;
            }
            let f = c as f64;
            let t = config.subsample * corpus_total;
            ((f / t).sqrt() + 1.0) * t / f
        })
        .collect();

    let planned = (config.epochs as u64 * total_words).max(1) as f32;
    let min_alpha = config.alpha * 1e-4;
    let mut processed: u64 = 0;
    let mut hidden = vec![0f32; dim];
    let mut grad = vec![0f32; dim];
    let mut sentence = Vec::new();

    for _ in 0..config.epochs {
        for doc in &docs {
            sentence.clear();
            for &w in doc {
                if keep_prob[w] >= 1.0 || rng.random::<f64>() < keep_prob[w] {
                    sentence.push(w);
                }
            }
            let alpha = (config.alpha * (1.0 - processed as f32 / planned)).max(min_alpha);
            processed += doc.len() as u64;
            for pos in 0..sentence.len() {
                let reduced = rng.random_range(0..config.window);
                let span = config.window - reduced;
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(sentence.len() - 1);
                let centre = sentence[pos];
                match config.architecture {
                    Architecture::Sgns => {
                        for c in lo..=hi {
                            if c == pos {
                                continue;
                            }
                            let ctx = sentence[c];
                            grad.iter_mut().for_each(|g| *g = 0.0);
                            for d in 0..=config.negatives {
                                let (target, label) = if d == 0 {
                                    (centre, 1.0)
                                } else {
                                    let t = noise.sample(&mut rng);
                                    if t == centre {
                                        continue;
                                    }
                                    (t, 0.0)
                                };
                                let l1 = &model.input[ctx * dim..(ctx + 1) * dim];
                                let l2 = &mut model.output[target * dim..(target + 1) * dim];
                                let g = (label - sigmoid(dot(l1, l2))) * alpha;
                                for k in 0..dim {
                                    grad[k] += g * l2[k];
                                    l2[k] += g * l1[k];
                                }
                            }
                            for (x, g) in model.input[ctx * dim..(ctx + 1) * dim].iter_mut().zip(&grad) {
                                *x += g;
                            }
                        }
                    }
                    Architecture::Cbow => {
                        hidden.iter_mut().for_each(|h| *h = 0.0);
                        let mut n_ctx = 0;
                        for c in lo..=hi {
                            if c == pos {
                                continue;
                            }
                            let ctx = sentence[c];
                            for (h, x) in hidden.iter_mut().zip(&model.input[ctx * dim..(ctx + 1) * dim]) {
                                *h += x;
                            }
                            n_ctx += 1;
                        }
                        if n_ctx == 0 {
                            continue;
                        }
                        hidden.iter_mut().for_each(|h| *h /= n_ctx as f32);
                        grad.iter_mut().for_each(|g| *g = 0.0);
                        for d in 0..=config.negatives {
                            let (target, label) = if d == 0 {
                                (centre, 1.0)
                            } else {
                                let t = noise.sample(&mut rng);
                                if t == centre {
                                    continue;
                                }
                                (t, 0.0)
                            };
                            let l2 = &mut model.output[target * dim..(target + 1) * dim];
                            let g = (label - sigmoid(dot(&hidden, l2))) * alpha;
                            for k in 0..dim {
                                grad[k] += g * l2[k];
                                l2[k] += g * hidden[k];
                            }
                        }
                        for c in lo..=hi {
                            if c == pos {
                                continue;
                            }
                            let ctx = sentence[c];
                            for (x, g) in model.input[ctx * dim..(ctx + 1) * dim].iter_mut().zip(&grad) {
                                *x += g;
                            }
                        }
                    }
                }
            }
        }
    }
    if model.input.iter().chain(&model.output).any(|x| !x.is_finite()) {
        return Err(Error::Validation("training produced non-finite vectors".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_table_follows_power_law() {
        let table = NoiseTable::new(&[16, 1, 0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut hits = [0usize; 3];
        for _ in 0..90_000 {
            hits[table.sample(&mut rng)] += 1;
        }
        // 16^0.75 = 8, so the split is 8:1 and the zero-count word never appears
        let share = hits[0] as f64 / 90_000.0;
        assert!((share - 8.0 / 9.0).abs() < 0.01, "{share}");
        assert_eq!(hits[2], 0);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig { dim: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { window: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { min_count: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
        assert_eq!("skip-gram".parse::<Architecture>().unwrap(), Architecture::Sgns);
    }
}
