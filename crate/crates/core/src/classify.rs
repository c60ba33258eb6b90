//! One-vs-rest linear classifier trained by SGD on the hinge loss, with
//! evaluation metrics and feature inspection.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Read access to word vectors, implemented by embedding models.
pub trait VectorLookup {
    fn dim(&self) -> usize;
    fn vector(&self, token: &str) -> Option<Vec<f64>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureVector {
    /// Term counts keyed by token.
    Sparse(BTreeMap<String, f64>),
    /// Mean embedding; `oov` marks documents with no known token.
    Dense { values: Vec<f64>, oov: bool },
}

pub fn featurize_counts<S: AsRef<str>>(tokens: &[S]) -> FeatureVector {
    let mut m = BTreeMap::new();
    for t in tokens {
        *m.entry(t.as_ref().to_string()).or_insert(0.0) += 1.0;
    }
    FeatureVector::Sparse(m)
}

/// Mean of the in-vocabulary token vectors; the zero vector when none is known.
pub fn featurize_embedding<S: AsRef<str>, E: VectorLookup + ?Sized>(tokens: &[S], embedding: &E) -> FeatureVector {
    let dim = embedding.dim();
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for t in tokens {
        if let Some(v) = embedding.vector(t.as_ref()) {
            for (s, x) in sum.iter_mut().zip(&v) {
                *s += x;
            }
            n += 1;
        }
    }
    if n > 0 {
        for s in &mut sum {
            *s /= n as f64;
        }
    }
    FeatureVector::Dense { values: sum, oov: n == 0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub eta0: f64,
    /// L2 penalty.
    pub alpha: f64,
    /// Scale each example to unit L2 norm before training and prediction.
    pub normalize: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            eta0: 0.1,
            alpha: 1e-4,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Featurizer {
    Counts,
    Embedding,
}

impl Featurizer {
    fn as_str(self) -> &'static str {
        match self {
            Featurizer::Counts => "counts",
            Featurizer::Embedding => "embedding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub classes: Vec<String>,
    /// Feature names; dense models use `d0`, `d1`, ...
    pub features: Vec<String>,
    /// One row per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub featurizer: Featurizer,
    pub config: ClassifierConfig,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

type Sparse = Vec<(usize, f64)>;

impl LinearModel {
    fn rebuild_index(&mut self) {
        self.index = self.features.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    fn encode(&self, x: &FeatureVector) -> Result<Sparse> {
        let mut v: Sparse = match (x, self.featurizer) {
            (FeatureVector::Sparse(m), Featurizer::Counts) => {
                m.iter().filter_map(|(k, w)| self.index.get(k).map(|&i| (i, *w))).collect()
            }
            (FeatureVector::Dense { values, .. }, Featurizer::Embedding) => {
                if values.len() != self.dim() {
                    return Err(Error::Validation(format!(
                        "dense vector of length {} for a {}-dim model",
                        values.len(),
                        self.dim()
                    )));
                }
                values.iter().copied().enumerate().filter(|(_, w)| *w != 0.0).collect()
            }
            _ => return Err(Error::Validation("feature vector kind does not match the model".into())),
        };
        if self.config.normalize {
            let norm = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, w) in &mut v {
                    *w /= norm;
                }
            }
        }
        Ok(v)
    }

    pub fn scores(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        let v = self.encode(x)?;
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| v.iter().map(|(i, x)| w[*i] * x).sum::<f64>() + b)
            .collect())
    }

    /// Highest-scoring class; ties go to the class listed first.
    pub fn predict(&self, x: &FeatureVector) -> Result<&str> {
        let s = self.scores(x)?;
        let mut best = 0;
        for k in 1..s.len() {
            if s[k] > s[best] {
                best = k;
            }
        }
        Ok(&self.classes[best])
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "classes\t{}", self.classes.join("\t"))?;
        writeln!(w, "dim\t{}", self.dim())?;
        writeln!(w, "featurizer\t{}", self.featurizer.as_str())?;
        let join = |vals: &mut dyn Iterator<Item = f64>| vals.map(|v| v.to_string()).collect::<Vec<_>>().join("\t");
        writeln!(w, "bias\t{}", join(&mut self.bias.iter().copied()))?;
        for (i, f) in self.features.iter().enumerate() {
            writeln!(w, "{f}\t{}", join(&mut self.weights.iter().map(|row| row[i])))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("model file: {m}"));
        let mut lines = reader.lines();
        let mut next = || -> Result<String> { lines.next().transpose()?.ok_or_else(|| bad("truncated")) };
        let head = |line: String, key: &str| -> Result<Vec<String>> {
            let mut parts = line.split('\t').map(String::from);
            if parts.next().as_deref() != Some(key) {
                return Err(bad(&format!("expected {key}")));
            }
            Ok(parts.collect())
        };
        let classes = head(next()?, "classes")?;
        let dim: usize = head(next()?, "dim")?
            .first()
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| bad("dim"))?;
        let featurizer = match head(next()?, "featurizer")?.first().map(String::as_str) {
            Some("counts") => Featurizer::Counts,
            Some("embedding") => Featurizer::Embedding,
            _ => return Err(bad("featurizer")),
        };
        let parse_row = |vals: Vec<String>| -> Result<Vec<f64>> {
            if vals.len() != classes.len() {
                return Err(bad("row width"));
            }
            vals.iter().map(|v| v.parse().map_err(|_| bad("number"))).collect()
        };
        let bias = parse_row(head(next()?, "bias")?)?;
        let mut features = Vec::with_capacity(dim);
        let mut weights = vec![Vec::with_capacity(dim); classes.len()];
        for _ in 0..dim {
            let line = next()?;
            let mut parts = line.split('\t').map(String::from);
            features.push(parts.next().ok_or_else(|| bad("feature name"))?);
            for (row, v) in weights.iter_mut().zip(parse_row(parts.collect())?) {
                row.push(v);
            }
        }
        let mut m = LinearModel {
            classes,
            features,
            weights,
            bias,
            featurizer,
            config: ClassifierConfig::default(),
            index: HashMap::new(),
        };
        m.rebuild_index();
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Trains one binary hinge-loss classifier per class by SGD with an L2
/// penalty and learning rate `eta0 / (1 + eta0·alpha·t)`.
pub fn train(examples: &[(FeatureVector, String)], config: &ClassifierConfig, seed: u64) -> Result<LinearModel> {
    let mut classes: Vec<String> = examples.iter().map(|(_, l)| l.clone()).collect();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InsufficientData("training needs at least two classes".into()));
    }
    if config.epochs == 0 || !(config.eta0 > 0.0) || config.alpha < 0.0 {
        return Err(Error::Validation("classifier needs epochs ≥ 1, eta0 > 0, alpha ≥ 0".into()));
    }
    let (featurizer, features) = match &examples[0].0 {
        FeatureVector::Sparse(_) => {
            let mut names: Vec<String> = Vec::new();
            for (x, _) in examples {
                match x {
                    FeatureVector::Sparse(m) => names.extend(m.keys().cloned()),
                    FeatureVector::Dense { .. } => return Err(Error::Validation("mixed feature kinds".into())),
                }
            }
            names.sort();
            names.dedup();
            (Featurizer::Counts, names)
        }
        FeatureVector::Dense { values, .. } => {
            let dim = values.len();
            if examples
                .iter()
                .any(|(x, _)| !matches!(x, FeatureVector::Dense { values, .. } if values.len() == dim))
            {
                return Err(Error::Validation("dense vectors differ in kind or length".into()));
            }
            (Featurizer::Embedding, (0..dim).map(|i| format!("d{i}")).collect())
        }
    };
    let mut model = LinearModel {
        weights: vec![vec![0.0; features.len()]; classes.len()],
        bias: vec![0.0; classes.len()],
        classes,
        features,
        featurizer,
        config: *config,
        index: HashMap::new(),
    };
    model.rebuild_index();

    let encoded: Vec<(Sparse, usize)> = examples
        .iter()
        .map(|(x, l)| Ok((model.encode(x)?, model.classes.binary_search(l).expect("label collected"))))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut orders = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        orders.push(order.clone());
    }

    for k in 0..model.classes.len() {
        // w = scale · v keeps the L2 shrink O(1) per step
        let mut v = vec![0.0; model.dim()];
        let mut scale = 1.0f64;
        let mut b = 0.0;
        let mut t = 0u64;
        for order in &orders {
            for &i in order {
                t += 1;
                let eta = config.eta0 / (1.0 + config.eta0 * config.alpha * t as f64);
                let (x, label) = &encoded[i];
                let y = if *label == k { 1.0 } else { -1.0 };
                let margin = y * (scale * x.iter().map(|(j, xv)| v[*j] * xv).sum::<f64>() + b);
                scale *= 1.0 - eta * config.alpha;
                if margin < 1.0 {
                    for (j, xv) in x {
                        v[*j] += eta * y * xv / scale;
                    }
                    b += eta * y;
                }
                if scale < 1e-9 {
                    for w in &mut v {
                        *w *= scale;
                    }
                    scale = 1.0;
                }
            }
        }
        model.weights[k] = v.iter().map(|w| w * scale).collect();
        model.bias[k] = b;
    }
    if model.weights.iter().flatten().chain(&model.bias).any(|w| !w.is_finite()) {
        return Err(Error::Validation("training diverged to non-finite weights".into()));
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub predicted: usize,
}

impl ClassMetrics {
    /// A class never seen and never predicted has no meaningful scores.
    pub fn is_defined(&self) -> bool {
        self.support > 0 || self.predicted > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub classes: Vec<String>,
    /// `confusion[true][predicted]`
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

impl Metrics {
    /// Per-class precision, recall and F1 from a confusion matrix; undefined
    /// ratios count as 0. Macro averages the defined rows; the weighted
    /// average uses support.
    pub fn from_confusion(classes: Vec<String>, confusion: Vec<Vec<usize>>) -> Result<Self> {
        let n = classes.len();
        if confusion.len() != n || confusion.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("confusion matrix shape does not match classes".into()));
        }
        let total: usize = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::InsufficientData("empty confusion matrix".into()));
        }
        let per_class: Vec<ClassMetrics> = (0..n)
            .map(|k| {
                let tp = confusion[k][k];
                let support: usize = confusion[k].iter().sum();
                let predicted: usize = confusion.iter().map(|r| r[k]).sum();
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                ClassMetrics {
                    class: classes[k].clone(),
                    precision,
                    recall,
                    f1: f1_score(precision, recall),
                    support,
                    predicted,
                }
            })
            .collect();
        let defined: Vec<&ClassMetrics> = per_class.iter().filter(|c| c.is_defined()).collect();
        let macro_f1 = defined.iter().map(|c| c.f1).sum::<f64>() / defined.len() as f64;
        let weighted_f1 = per_class.iter().map(|c| c.f1 * c.support as f64).sum::<f64>() / total as f64;
        let accuracy = (0..n).map(|k| confusion[k][k]).sum::<usize>() as f64 / total as f64;
        Ok(Self {
            classes,
            confusion,
            per_class,
            macro_f1,
            weighted_f1,
            accuracy,
        })
    }

    /// `class,precision,recall,f1,support`, then accuracy, macro and
    /// weighted summary rows. Undefined classes print `-`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["class", "precision", "recall", "f1", "support"])?;
        for c in &self.per_class {
            if c.is_defined() {
                out.write_record([
                    c.class.clone(),
                    format!("{:.4}", c.precision),
                    format!("{:.4}", c.recall),
                    format!("{:.4}", c.f1),
                    c.support.to_string(),
                ])?;
            } else {
                out.write_record([c.class.as_str(), "-", "-", "-", "0"])?;
            }
        }
        let total: usize = self.per_class.iter().map(|c| c.support).sum();
        out.write_record(["accuracy".to_string(), String::new(), String::new(), format!("{:.4}", self.accuracy), total.to_string()])?;
        out.write_record(["macro avg".to_string(), String::new(), String::new(), format!("{:.4}", self.macro_f1), total.to_string()])?;
        out.write_record(["weighted avg".to_string(), String::new(), String::new(), format!("{:.4}", self.weighted_f1), total.to_string()])?;
        out.flush()?;
        Ok(())
    }
}

/// Scores a model on labelled examples. Test labels unknown to the model
/// become extra classes that are never predicted.
pub fn evaluate(model: &LinearModel, test: &[(FeatureVector, String)]) -> Result<Metrics> {
    if test.is_empty() {
        return Err(Error::InsufficientData("empty test set".into()));
    }
    let mut classes = model.classes.clone();
    for (_, l) in test {
        if !classes.contains(l) {
            classes.push(l.clone());
        }
    }
    let pos: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut confusion = vec![vec![0; classes.len()]; classes.len()];
    for (x, l) in test {
        let p = model.predict(x)?;
        confusion[pos[l.as_str()]][pos[p]] += 1;
    }
    Metrics::from_confusion(classes, confusion)
}

/// The `k` largest weights for a class, descending; equal weights keep
/// feature order.
pub fn top_features(model: &LinearModel, class: &str, k: usize) -> Result<Vec<(String, f64)>> {
    if model.featurizer != Featurizer::Counts {
        return Err(Error::Validation("top features need a count-featurized model".into()));
    }
    let ci = model
        .classes
        .iter()
        .position(|c| c == class)
        .ok_or_else(|| Error::Validation(format!("unknown class {class}")))?;
    let mut ranked: Vec<(usize, f64)> = model.weights[ci].iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked
        .into_iter()
        .take(k)
        .map(|(i, w)| (model.features[i].clone(), w))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn dense(v: &[f64]) -> FeatureVector {
        FeatureVector::Dense {
            values: v.to_vec(),
            oov: false,
        }
    }

    struct Toy(HashMap<String, Vec<f64>>);

    impl VectorLookup for Toy {
        fn dim(&self) -> usize {
            2
        }
        fn vector(&self, t: &str) -> Option<Vec<f64>> {
            self.0.get(t).cloned()
        }
    }

    #[test]
    fn count_features() {
        let FeatureVector::Sparse(m) = featurize_counts(&["a", "b", "a"]) else { panic!() };
        assert_eq!(m, BTreeMap::from([("a".to_string(), 2.0), ("b".to_string(), 1.0)]));
    }

    #[test]
    fn embedding_features() {
        let toy = Toy(HashMap::from([
            ("x".to_string(), vec![1.0, 3.0]),
            ("y".to_string(), vec![2.0, -1.0]),
        ]));
        assert_eq!(
            featurize_embedding(&["x", "zzz", "y"], &toy),
            FeatureVector::Dense {
                values: vec![1.5, 1.0],
                oov: false
            }
        );
        assert_eq!(
            featurize_embedding(&["q"], &toy),
            FeatureVector::Dense {
                values: vec![0.0, 0.0],
                oov: true
            }
        );
    }

    #[test]
    fn separable_toy_fits() {
        let data: Vec<(FeatureVector, String)> = (0..40)
            .map(|i| {
                let x = i as f64 / 10.0 - 2.0 + if i < 20 { -0.5 } else { 0.5 };
                (dense(&[x, 1.0]), if i < 20 { "neg" } else { "pos" }.to_string())
            })
            .collect();
        let cfg = ClassifierConfig {
            normalize: false,
            epochs: 20,
            ..Default::default()
        };
        let m = train(&data, &cfg, 1).unwrap();
        let acc = evaluate(&m, &data).unwrap().accuracy;
        assert_eq!(acc, 1.0);
        let pos = m.classes.iter().position(|c| c == "pos").unwrap();
        assert!(m.weights[pos][0] > 0.0);
    }

    #[test]
    fn degenerate_dataset_rejected() {
        let one = vec![(dense(&[1.0]), "a".to_string())];
        assert!(train(&one, &ClassifierConfig::default(), 0).is_err());
    }

    #[test]
    fn blobs_three_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let centres = [[0.0, 5.0], [5.0, -3.0], [-5.0, -3.0]];
        let mut gen = |n: usize| -> Vec<(FeatureVector, String)> {
            (0..n)
                .map(|i| {
                    let c = i % 3;
                    let x = centres[c][0] + rng.random_range(-1.5..1.5);
                    let y = centres[c][1] + rng.random_range(-1.5..1.5);
                    (dense(&[x, y]), format!("c{c}"))
                })
                .collect()
        };
        let tr = gen(300);
        let te = gen(150);
        let m = train(&tr, &ClassifierConfig::default(), 9).unwrap();
        let met = evaluate(&m, &te).unwrap();
        assert!(met.weighted_f1 >= 0.95, "{}", met.weighted_f1);
        assert_eq!(train(&tr, &ClassifierConfig::default(), 9).unwrap(), m);
    }

    #[test]
    fn f1_formula() {
        assert_eq!(f1_score(1.0, 1.0), 1.0);
        assert_eq!(f1_score(0.5, 0.5), 0.5);
        assert_eq!(f1_score(0.0, 0.0), 0.0);
    }

    #[test]
    fn hand_worked_confusion() {
        // true rows A,B,C; predicted columns A,B,C
        let c = vec![vec![5, 1, 0], vec![2, 3, 1], vec![0, 0, 4]];
        let m = Metrics::from_confusion(vec!["A".into(), "B".into(), "C".into()], c).unwrap();
        // A: P 5/7 R 5/6; B: P 3/4 R 3/6; C: P 4/5 R 4/4
        let pa: f64 = 5.0 / 7.0;
        let ra: f64 = 5.0 / 6.0;
        let fa = 2.0 * pa * ra / (pa + ra);
        let (pb, rb) = (0.75, 0.5);
        let fb = 2.0 * pb * rb / (pb + rb);
        let (pc, rc) = (0.8, 1.0);
        let fc = 2.0 * pc * rc / (pc + rc);
        assert_eq!(m.per_class[0].precision, pa);
        assert_eq!(m.per_class[0].recall, ra);
        assert_eq!(m.per_class[1].f1, fb);
        assert_eq!(m.per_class[2].f1, fc);
        assert_eq!(m.macro_f1, (fa + fb + fc) / 3.0);
        assert_eq!(m.weighted_f1, (fa * 6.0 + fb * 6.0 + fc * 4.0) / 16.0);
        assert_eq!(m.accuracy, 12.0 / 16.0);
        for (k, row) in m.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<usize>(), m.per_class[k].support);
        }
    }

    #[test]
    fn undefined_rows_render_dash() {
        let m = Metrics::from_confusion(
            vec!["A".into(), "B".into(), "Z".into()],
            vec![vec![2, 0, 0], vec![1, 1, 0], vec![0, 0, 0]],
        )
        .unwrap();
        assert!(!m.per_class[2].is_defined());
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\nZ,-,-,-,0\n"), "{text}");
        let fa = 2.0 * (2.0 / 3.0) / (2.0 / 3.0 + 1.0);
        let fb = 2.0 * 0.5 / 1.5;
        assert_eq!(m.macro_f1, (fa + fb) / 2.0);
    }

    #[test]
    fn weighted_equals_macro_for_equal_support() {
        let m = Metrics::from_confusion(
            vec!["A".into(), "B".into()],
            vec![vec![7, 3], vec![1, 9]],
        )
        .unwrap();
        assert!((m.macro_f1 - m.weighted_f1).abs() < 1e-15);
    }

    #[test]
    fn planted_marker_ranks_first() {
        let mut data = Vec::new();
        for i in 0..30 {
            let filler = ["the", "and", "was", "good"][i % 4];
            data.push((featurize_counts(&["kiwi", filler, "day"]), "NZ".to_string()));
            data.push((featurize_counts(&["aussie", filler, "day"]), "AU".to_string()));
        }
        let m = train(&data, &ClassifierConfig::default(), 2).unwrap();
        assert_eq!(top_features(&m, "NZ", 3).unwrap()[0].0, "kiwi");
        assert_eq!(top_features(&m, "AU", 3).unwrap()[0].0, "aussie");
        assert_eq!(top_features(&m, "AU", 1000).unwrap().len(), m.dim());
    }

    #[test]
    fn equal_weights_keep_feature_order() {
        let mut m = LinearModel {
            classes: vec!["A".into(), "B".into()],
            features: vec!["a".into(), "b".into(), "c".into()],
            weights: vec![vec![1.0; 3], vec![0.0; 3]],
            bias: vec![0.0; 2],
            featurizer: Featurizer::Counts,
            config: ClassifierConfig::default(),
            index: HashMap::new(),
        };
        m.rebuild_index();
        let names: Vec<String> = top_features(&m, "A", 3).unwrap().into_iter().map(|x| x.0).collect();
        assert_eq!(names, ["a", "b", "c"]);
    }

    #[test]
    fn model_file_round_trip() {
        let data = vec![
            (featurize_counts(&["x", "y"]), "A".to_string()),
            (featurize_counts(&["z"]), "B".to_string()),
        ];
        let m = train(&data, &ClassifierConfig::default(), 1).unwrap();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = LinearModel::read(buf.as_slice()).unwrap();
        assert_eq!(back.weights, m.weights);
        assert_eq!(back.predict(&data[1].0).unwrap(), "B");
    }

    #[test]
    fn nested_samples_keep_separable_accuracy() {
        let all: Vec<(FeatureVector, String)> = (0..80)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                (dense(&[s * (1.0 + (i % 7) as f64 / 7.0), 0.3]), if s > 0.0 { "p" } else { "n" }.to_string())
            })
            .collect();
        let mut prev = 0.0;
        for n in [10, 20, 40, 80] {
            let m = train(&all[..n], &ClassifierConfig::default(), 4).unwrap();
            let acc = evaluate(&m, &all).unwrap().accuracy;
            assert!(acc >= prev, "n={n} acc={acc} prev={prev}");
            prev = acc;
        }
        assert_eq!(prev, 1.0);
    }
}
