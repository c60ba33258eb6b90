use std::path::{Path, PathBuf};

use dialign::classify::ClassifierConfig;
use dialign::corpus::TextType;
use dialign::cxg::{FeatureSet, MineConfig, DEFAULT_SEM_CLUSTERS};
use dialign::diachrone::TrainingMode;
use dialign::embed::{Architecture, TrainConfig};
use dialign::sampling::{Plan, DEFAULT_TEST_FRACTION};
use dialign::textprep::EntityLabel;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Raw record dumps (plain, gzip or zstd).
    pub inputs: Vec<PathBuf>,
    /// Text units written by `ingest`; used instead of `inputs` when set.
    pub units: Option<PathBuf>,
    pub communities: Vec<String>,
    pub text_types: Vec<String>,
    pub utc_offset: i32,
    /// Author name substrings to drop (e.g. "bot"); moderators go too.
    pub author_filters: Vec<String>,
    /// Local-hour window `[start, end)`.
    pub hours: Option<[u32; 2]>,
    pub gazetteers: Vec<GazetteerEntry>,
    /// Variable inventory; the built-in one when unset.
    pub variables: Option<PathBuf>,
    pub sampling: SamplingSection,
    pub classifier: ClassifierSection,
    pub embedding: EmbeddingSection,
    pub pairs: PairsSection,
    pub drift: DriftSection,
    pub cxg: CxgSection,
    pub network: NetworkSection,
    pub ols: OlsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            out: None,
            inputs: Vec::new(),
            units: None,
            communities: Vec::new(),
            text_types: Vec::new(),
            utc_offset: 12,
            author_filters: Vec::new(),
            hours: None,
            gazetteers: Vec::new(),
            variables: None,
            sampling: SamplingSection::default(),
            classifier: ClassifierSection::default(),
            embedding: EmbeddingSection::default(),
            pairs: PairsSection::default(),
            drift: DriftSection::default(),
            cxg: CxgSection::default(),
            network: NetworkSection::default(),
            ols: OlsSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GazetteerEntry {
    pub path: PathBuf,
    #[serde(default = "default_label")]
    pub label: Label,
}

fn default_label() -> Label {
    Label::Gpe
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Gpe,
    Loc,
}

impl From<Label> for EntityLabel {
    fn from(l: Label) -> Self {
        match l {
            Label::Gpe => EntityLabel::Gpe,
            Label::Loc => EntityLabel::Loc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub plan: Plan,
    /// Share of each class drawn by the proportional plan.
    pub fraction: Option<f64>,
    pub test_fraction: f64,
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            plan: Plan::Balanced,
            fraction: None,
            test_fraction: DEFAULT_TEST_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FeaturizerKind {
    Counts,
    Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub featurizer: FeaturizerKind,
    /// Word vectors for the embedding featurizer.
    pub vectors: Option<PathBuf>,
    pub mask_entities: bool,
    pub epochs: usize,
    pub eta0: f64,
    pub alpha: f64,
    pub normalize: bool,
    pub top_features: usize,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let c = ClassifierConfig::default();
        Self {
            featurizer: FeaturizerKind::Counts,
            vectors: None,
            mask_entities: false,
            epochs: c.epochs,
            eta0: c.eta0,
            alpha: c.alpha,
            normalize: c.normalize,
            top_features: 20,
        }
    }
}

impl ClassifierSection {
    pub fn config(&self) -> ClassifierConfig {
        ClassifierConfig {
            epochs: self.epochs,
            eta0: self.eta0,
            alpha: self.alpha,
            normalize: self.normalize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VectorFormat {
    Text,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub architecture: Architecture,
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub epochs: usize,
    pub alpha: f32,
    pub subsample: f64,
    pub format: VectorFormat,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            architecture: t.architecture,
            dim: t.dim,
            window: t.window,
            min_count: t.min_count,
            negatives: t.negatives,
            epochs: t.epochs,
            alpha: t.alpha,
            subsample: t.subsample,
            format: VectorFormat::Text,
        }
    }
}

impl EmbeddingSection {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            window: self.window,
            min_count: self.min_count,
            negatives: self.negatives,
            epochs: self.epochs,
            alpha: self.alpha,
            subsample: self.subsample,
            architecture: self.architecture,
            seed,
        }
    }

    pub fn file_name(&self) -> &'static str {
        match self.format {
            VectorFormat::Text => "vectors.txt",
            VectorFormat::Binary => "vectors.bin",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairsSection {
    /// Vectors to evaluate.
    pub vectors: Option<PathBuf>,
    /// Pair list; the built-in hypocoristic list when unset.
    pub list: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftQuery {
    pub source: String,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSection {
    pub periods: usize,
    pub mode: TrainingMode,
    pub queries: Vec<DriftQuery>,
}

impl Default for DriftSection {
    fn default() -> Self {
        Self {
            periods: 4,
            mode: TrainingMode::Incremental,
            queries: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GroupBy {
    Community,
    CommunityMonth,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSetName {
    Lex,
    Syn,
    Semplus,
}

impl From<FeatureSetName> for FeatureSet {
    fn from(f: FeatureSetName) -> Self {
        match f {
            FeatureSetName::Lex => FeatureSet::Lex,
            FeatureSetName::Syn => FeatureSet::Syn,
            FeatureSetName::Semplus => FeatureSet::SemPlus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CxgSection {
    pub constructicon: Option<PathBuf>,
    /// Word vectors for semantic clusters.
    pub vectors: Option<PathBuf>,
    pub sem_clusters: usize,
    pub group_by: GroupBy,
    pub feature_set: FeatureSetName,
    pub rounds: usize,
    pub min_freq: u64,
    pub association_threshold: f64,
    /// Cosine threshold for the group similarity graph; no graph when unset.
    pub similarity_threshold: Option<f64>,
}

impl Default for CxgSection {
    fn default() -> Self {
        let m = MineConfig::default();
        Self {
            constructicon: None,
            vectors: None,
            sem_clusters: DEFAULT_SEM_CLUSTERS,
            group_by: GroupBy::Community,
            feature_set: FeatureSetName::Semplus,
            rounds: m.rounds,
            min_freq: m.min_freq,
            association_threshold: m.association_threshold,
            similarity_threshold: None,
        }
    }
}

impl CxgSection {
    pub fn mine_config(&self) -> MineConfig {
        MineConfig {
            rounds: self.rounds,
            min_freq: self.min_freq,
            association_threshold: self.association_threshold,
            feature_set: self.feature_set.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub threshold: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self { threshold: 0.05 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OlsSection {
    pub data: Option<PathBuf>,
    pub response: Option<String>,
    pub predictors: Vec<String>,
}

impl RunConfig {
    /// Reads a TOML file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| {
            let field = e.span().map(|s| field_at(&text, s.start)).unwrap_or_default();
            CliError::config(if field.is_empty() { "config" } else { &field }, e.message().to_string())
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = &mut self.out {
            fix(p);
        }
        self.inputs.iter_mut().for_each(fix);
        let opts = [
            &mut self.units,
            &mut self.variables,
            &mut self.classifier.vectors,
            &mut self.pairs.vectors,
            &mut self.pairs.list,
            &mut self.cxg.constructicon,
            &mut self.cxg.vectors,
            &mut self.ols.data,
        ];
        for p in opts.into_iter().flatten() {
            fix(p);
        }
        for g in &mut self.gazetteers {
            fix(&mut g.path);
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::config("seed", "required; set `seed` in the config or pass --seed"))
    }

    pub fn text_types(&self) -> Result<Vec<TextType>, CliError> {
        self.text_types
            .iter()
            .map(|t| t.parse().map_err(|_| CliError::config("text_types", format!("unknown text type {t:?}"))))
            .collect()
    }

    /// Checks settings shared by every subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        self.seed()?;
        self.text_types()?;
        if let Some([a, b]) = self.hours {
            if a >= b || b > 24 {
                return Err(CliError::config("hours", format!("[{a}, {b}] is not a window within 0..24")));
            }
        }
        if !(-12..=14).contains(&self.utc_offset) {
            return Err(CliError::config("utc_offset", format!("{} is outside -12..=14", self.utc_offset)));
        }
        if let Some(p) = &self.units {
            require_file("units", p)?;
        }
        for (i, p) in self.inputs.iter().enumerate() {
            require_file(&format!("inputs[{i}]"), p)?;
        }
        for (i, g) in self.gazetteers.iter().enumerate() {
            require_file(&format!("gazetteers[{i}].path"), &g.path)?;
        }
        let opt_files = [
            ("variables", &self.variables),
            ("classifier.vectors", &self.classifier.vectors),
            ("pairs.vectors", &self.pairs.vectors),
            ("pairs.list", &self.pairs.list),
            ("cxg.constructicon", &self.cxg.constructicon),
            ("cxg.vectors", &self.cxg.vectors),
            ("ols.data", &self.ols.data),
        ];
        for (field, p) in opt_files {
            if let Some(p) = p {
                require_file(field, p)?;
            }
        }
        let tf = self.sampling.test_fraction;
        if !(0.0..1.0).contains(&tf) {
            return Err(CliError::config("sampling.test_fraction", format!("{tf} is outside [0, 1)")));
        }
        if let Some(f) = self.sampling.fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(CliError::config("sampling.fraction", format!("{f} is outside (0, 1]")));
            }
        }
        if self.sampling.plan == Plan::Proportional && self.sampling.fraction.is_none() {
            return Err(CliError::config("sampling.fraction", "required by the proportional plan"));
        }
        if self.embedding.dim == 0 || self.embedding.window == 0 || self.embedding.min_count == 0 {
            return Err(CliError::config("embedding", "dim, window and min_count must be at least 1"));
        }
        if self.drift.periods < 2 {
            return Err(CliError::config("drift.periods", "at least 2 periods required"));
        }
        if self.cxg.sem_clusters == 0 {
            return Err(CliError::config("cxg.sem_clusters", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.network.threshold) {
            return Err(CliError::config("network.threshold", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn require_input(&self) -> Result<(), CliError> {
        if self.units.is_none() && self.inputs.is_empty() {
            return Err(CliError::config("inputs", "no input; set `inputs`, `units` or pass --input/--units"));
        }
        Ok(())
    }

    /// Copy used for hashing: the output directory does not affect results.
    pub fn hashed(&self) -> RunConfig {
        RunConfig {
            out: None,
            ..self.clone()
        }
    }
}

pub fn require_file(field: &str, p: &Path) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("file not found: {}", p.display())))
    }
}

/// Best-effort dotted key for the TOML line containing `offset`.
fn field_at(text: &str, offset: usize) -> String {
    let mut table = String::new();
    let mut key = String::new();
    let mut pos = 0;
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        if pos + line.len() >= offset {
            if let Some((k, _)) = t.split_once('=') {
                key = k.trim().to_string();
            }
            break;
        }
        pos += line.len() + 1;
    }
    match (table.is_empty(), key.is_empty()) {
        (true, _) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig {
            seed: Some(3),
            ..RunConfig::default()
        };
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_names_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "seed = 1\n[embedding]\ndim = 10\nwidnow = 3\n").unwrap();
        let e = RunConfig::load(&p).unwrap_err();
        assert!(e.to_string().contains("embedding.widnow"), "{e}");
    }

    #[test]
    fn relative_paths_follow_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "seed = 1\ninputs = [\"d.jsonl\"]\n").unwrap();
        let cfg = RunConfig::load(&p).unwrap();
        assert_eq!(cfg.inputs[0], dir.path().join("d.jsonl"));
    }

    #[test]
    fn missing_seed_and_bad_fields_rejected() {
        let cfg = RunConfig::default();
        assert!(cfg.validate().unwrap_err().to_string().starts_with("seed:"));
        let cfg = RunConfig {
            seed: Some(1),
            text_types: vec!["tweet".into()],
            ..RunConfig::default()
        };
        assert!(cfg.validate().unwrap_err().to_string().starts_with("text_types:"));
        let cfg = RunConfig {
            seed: Some(1),
            units: Some("/nonexistent/units.jsonl".into()),
            ..RunConfig::default()
        };
        assert!(cfg.validate().unwrap_err().to_string().starts_with("units:"));
    }
}
