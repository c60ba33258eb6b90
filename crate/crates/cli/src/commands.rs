use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use dialign::classify::{self, featurize_counts, featurize_embedding, FeatureVector};
use dialign::corpus::{self, CorpusStats, Schema, TextUnit};
use dialign::cxg::{self, AnnotatedDoc, Constructicon, FeatureSet, SemClusters};
use dialign::diachrone::{self, TrainingMode};
use dialign::embed::{self, EmbeddingModel, WordPairList};
use dialign::netstats;
use dialign::sampling::{self, Plan, UnitsByClass};
use dialign::textprep::{mask_entities, normalize, pos_tag, tokenize, Gazetteer, Tagger, TokenizedDoc};
use dialign::variables::{self, YearMonth};
use serde::Serialize;

use crate::config::{FeaturizerKind, GroupBy, RunConfig};
use crate::error::CliError;
use crate::output::Outputs;

/// Resolved configuration plus the text units, loaded on first use.
pub struct Ctx {
    pub cfg: RunConfig,
    pub seed: u64,
    units: OnceCell<Vec<TextUnit>>,
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}/{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct IngestRow {
    input: String,
    lines: usize,
    skipped: usize,
    records: usize,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let seed = cfg.seed()?;
        Ok(Self {
            cfg,
            seed,
            units: OnceCell::new(),
        })
    }

    pub fn units(&self) -> Result<&[TextUnit], CliError> {
        if let Some(u) = self.units.get() {
            return Ok(u);
        }
        self.cfg.require_input()?;
        let raw = match &self.cfg.units {
            Some(p) => read_units(p)?,
            None => ingest_inputs(&self.cfg.inputs)?.1,
        };
        let units = filter_units(&self.cfg, raw)?;
        Ok(self.units.get_or_init(|| units))
    }

    fn gazetteers(&self) -> Result<Vec<Gazetteer>, CliError> {
        self.cfg
            .gazetteers
            .iter()
            .map(|g| Gazetteer::load(&g.path, g.label.into()).map_err(CliError::from))
            .collect()
    }
}

fn read_units(path: &Path) -> Result<Vec<TextUnit>, CliError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let u: TextUnit = serde_json::from_str(&line)
            .map_err(|e| CliError::data(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(u);
    }
    Ok(out)
}

fn ingest_inputs(inputs: &[PathBuf]) -> Result<(Vec<IngestRow>, Vec<TextUnit>), CliError> {
    let schema = Schema::default();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for p in inputs {
        let ing = corpus::ingest_path(p, &schema)?;
        rows.push(IngestRow {
            input: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            lines: ing.lines,
            skipped: ing.skipped,
            records: ing.records.len(),
        });
        records.extend(ing.records);
    }
    let units = corpus::clean(records).iter().flat_map(corpus::derive_text_units).collect();
    Ok((rows, units))
}

fn filter_units(cfg: &RunConfig, mut units: Vec<TextUnit>) -> Result<Vec<TextUnit>, CliError> {
    if !cfg.communities.is_empty() {
        let wanted: Vec<String> = cfg.communities.iter().map(|c| c.to_lowercase()).collect();
        units.retain(|u| wanted.contains(&u.community.to_lowercase()));
    }
    let types = cfg.text_types()?;
    if !types.is_empty() {
        units.retain(|u| types.contains(&u.text_type));
    }
    if !cfg.author_filters.is_empty() {
        units = corpus::filter_authors(units, &cfg.author_filters);
    }
    if let Some([a, b]) = cfg.hours {
        units = corpus::filter_local_hours(units, a, b, cfg.utc_offset)?;
    }
    if units.is_empty() {
        return Err(CliError::data("no text units left after filtering"));
    }
    Ok(units)
}

fn tokens_of(u: &TextUnit) -> Vec<String> {
    tokenize(&normalize(&u.text)).tokens
}

fn tagged_doc(u: &TextUnit) -> TokenizedDoc {
    pos_tag(tokenize(&normalize(&u.text)).with_origin(u.clone()), Tagger::seed())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

pub fn ingest(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    if ctx.cfg.inputs.is_empty() {
        return Err(CliError::config("inputs", "ingest needs raw inputs; set `inputs` or pass --input"));
    }
    let (rows, units) = ingest_inputs(&ctx.cfg.inputs)?;
    let units = filter_units(&ctx.cfg, units)?;
    out.write(&join(prefix, "ingest.csv"), |w| {
        let mut c = csv_writer(w);
        c.write_record(["input", "lines", "skipped", "records"])?;
        for r in &rows {
            c.write_record([r.input.clone(), r.lines.to_string(), r.skipped.to_string(), r.records.to_string()])?;
        }
        c.flush()?;
        Ok(())
    })?;
    out.write(&join(prefix, "units.jsonl"), |w| {
        for u in &units {
            serde_json::to_writer(&mut *w, u)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    let _ = ctx.units.set(units);
    Ok(())
}

fn by_community(units: &[TextUnit]) -> BTreeMap<String, Vec<TextUnit>> {
    let mut m: BTreeMap<String, Vec<TextUnit>> = BTreeMap::new();
    for u in units {
        m.entry(u.community.clone()).or_default().push(u.clone());
    }
    m
}

pub fn stats(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    let units = ctx.units()?;
    out.write(&join(prefix, "stats.csv"), |w| Ok(CorpusStats::compute(units).write_csv(w)?))?;
    let mut rows = Vec::new();
    for (community, group) in by_community(units) {
        let profile = corpus::hourly_profile(&group, ctx.cfg.utc_offset)?;
        rows.push((community, profile));
    }
    out.write(&join(prefix, "hourly.csv"), |w| {
        let mut c = csv_writer(w);
        c.write_record(["community", "hour", "share"])?;
        for (community, profile) in &rows {
            for (h, s) in profile.iter().enumerate() {
                c.write_record([community.clone(), h.to_string(), format!("{s:.6}")])?;
            }
        }
        c.flush()?;
        Ok(())
    })
}

pub fn variables(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    let specs = match &ctx.cfg.variables {
        Some(p) => variables::load_specs_path(p).map_err(|e| CliError::config("variables", e.to_string()))?,
        None => variables::default_specs(),
    };
    let docs: Vec<TokenizedDoc> = ctx.units()?.iter().map(tagged_doc).collect();
    let counts = variables::count_variants(&docs, &specs)?;
    let communities = if ctx.cfg.communities.is_empty() {
        counts.communities()
    } else {
        ctx.cfg.communities.clone()
    };
    out.write(&join(prefix, "variants.csv"), |w| Ok(counts.write_csv(&communities, w)?))?;
    out.write(&join(prefix, "patterns.csv"), |w| {
        let mut c = csv_writer(w);
        c.write_record(["variable", "pattern", "detail"])?;
        for var in counts.variants.keys() {
            let table = counts.table(var, &communities)?;
            let (pattern, detail) = match variables::classify_distribution(&table, &communities) {
                Ok(p) => (
                    p.pattern.to_string(),
                    p.detail
                        .map(|groups| groups.iter().map(|g| g.join("|")).collect::<Vec<_>>().join(";"))
                        .unwrap_or_default(),
                ),
                Err(_) => ("-".to_string(), String::new()),
            };
            c.write_record([var.as_str(), pattern.as_str(), detail.as_str()])?;
        }
        c.flush()?;
        Ok(())
    })
}

#[derive(Serialize)]
struct SampleRow<'a> {
    record_id: &'a str,
    text_type: &'a str,
    label: &'a str,
}

#[derive(Serialize)]
struct SampleFile<'a> {
    record: &'a sampling::PlanRecord,
    train: Vec<SampleRow<'a>>,
    test: Vec<SampleRow<'a>>,
}

fn sample_rows(rows: &[(TextUnit, String)]) -> Vec<SampleRow<'_>> {
    rows.iter()
        .map(|(u, l)| SampleRow {
            record_id: &u.record_id,
            text_type: u.text_type.as_str(),
            label: l,
        })
        .collect()
}

pub fn classify(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let gaz = if cfg.classifier.mask_entities {
        if cfg.gazetteers.is_empty() {
            return Err(CliError::config("classifier.mask_entities", "set but no gazetteers configured"));
        }
        ctx.gazetteers()?
    } else {
        Vec::new()
    };
    let vectors = match cfg.classifier.featurizer {
        FeaturizerKind::Counts => None,
        FeaturizerKind::Embedding => {
            let p = cfg
                .classifier
                .vectors
                .as_ref()
                .ok_or_else(|| CliError::config("classifier.vectors", "required by the embedding featurizer"))?;
            Some(EmbeddingModel::load(p)?)
        }
    };
    let units: UnitsByClass = by_community(ctx.units()?);
    let tf = cfg.sampling.test_fraction;
    let split = match cfg.sampling.plan {
        Plan::Balanced => sampling::balanced_sample(&units, ctx.seed, tf)?,
        Plan::Proportional => {
            let f = cfg.sampling.fraction.ok_or_else(|| CliError::config("sampling.fraction", "required"))?;
            sampling::proportional_sample(&units, f, ctx.seed, tf)?
        }
        Plan::Random => sampling::random_sample(&units, ctx.seed, tf)?,
    };
    let featurize = |u: &TextUnit| -> FeatureVector {
        let mut toks = tokens_of(u);
        if !gaz.is_empty() {
            toks = mask_entities(&toks, &gaz);
        }
        match &vectors {
            Some(m) => featurize_embedding(&toks, m),
            None => featurize_counts(&toks),
        }
    };
    let train: Vec<(FeatureVector, String)> = split.train.iter().map(|(u, l)| (featurize(u), l.clone())).collect();
    let test: Vec<(FeatureVector, String)> = split.test.iter().map(|(u, l)| (featurize(u), l.clone())).collect();
    let model = classify::train(&train, &cfg.classifier.config(), ctx.seed)?;
    let metrics = classify::evaluate(&model, &test)?;
    out.write(&join(prefix, "metrics.csv"), |w| Ok(metrics.write_csv(w)?))?;
    out.write(&join(prefix, "model.tsv"), |w| Ok(model.write(w)?))?;
    out.write(&join(prefix, "sample.json"), |w| {
        let file = SampleFile {
            record: &split.record,
            train: sample_rows(&split.train),
            test: sample_rows(&split.test),
        };
        serde_json::to_writer_pretty(&mut *w, &file)?;
        w.write_all(b"\n")?;
        Ok(())
    })?;
    out.write(&join(prefix, "top_features.csv"), |w| {
        let mut c = csv_writer(w);
        c.write_record(["class", "rank", "feature", "weight"])?;
        for class in &model.classes {
            for (i, (f, wt)) in classify::top_features(&model, class, cfg.classifier.top_features)?.iter().enumerate() {
                c.write_record([class.clone(), (i + 1).to_string(), f.clone(), format!("{wt:.6}")])?;
            }
        }
        c.flush()?;
        Ok(())
    })
}

pub fn embed_train(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<PathBuf, CliError> {
    let docs: Vec<Vec<String>> = ctx.units()?.iter().map(tokens_of).collect();
    let tc = ctx.cfg.embedding.train_config(ctx.seed);
    let model = embed::train(&docs, &tc, None)?;
    let path = out.path(&join(prefix, ctx.cfg.embedding.file_name()))?;
    model.save(&path)?;
    Ok(path)
}

pub fn embed_eval(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    let p = ctx
        .cfg
        .pairs
        .vectors
        .as_ref()
        .ok_or_else(|| CliError::config("pairs.vectors", "vectors to evaluate are required"))?;
    let model = EmbeddingModel::load(p)?;
    let list = match &ctx.cfg.pairs.list {
        Some(l) => WordPairList::load(l).map_err(|e| CliError::config("pairs.list", e.to_string()))?,
        None => WordPairList::hypocoristics(),
    };
    let scores: Vec<(String, String, Option<f64>)> = list
        .pairs
        .iter()
        .map(|pair| (pair.source.clone(), pair.target.clone(), model.cosine(&pair.source, &pair.target).ok()))
        .collect();
    let mean = match embed::evaluate_pairs(&model, &list) {
        Ok(e) => Some(e.mean),
        Err(dialign::Error::InsufficientData(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let oov = scores.iter().filter(|s| s.2.is_none()).count();
    out.write(&join(prefix, "pairs.csv"), |w| {
        let mut c = csv_writer(w);
        c.write_record(["source", "target", "cosine"])?;
        for (s, t, v) in &scores {
            c.write_record([s.clone(), t.clone(), v.map_or("OOV".to_string(), |v| format!("{v:.6}"))])?;
        }
        c.flush()?;
        Ok(())
    })?;
    out.write(&join(prefix, "pairs_summary.csv"), |w| {
        let mut c = csv_writer(w);
        c.write_record(["pairs", "scored", "oov", "mean"])?;
        c.write_record([
            scores.len().to_string(),
            (scores.len() - oov).to_string(),
            oov.to_string(),
            mean.map_or("NA".to_string(), |m| format!("{m:.6}")),
        ])?;
        c.flush()?;
        Ok(())
    })
}

pub fn drift(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    if cfg.drift.queries.is_empty() {
        return Err(CliError::config("drift.queries", "at least one source/targets query is required"));
    }
    let partition = diachrone::partition_equal_words(ctx.units()?.to_vec(), cfg.drift.periods)?;
    out.write(&join(prefix, "periods.csv"), |w| Ok(partition.write_manifest(w)?))?;
    let periods: Vec<Vec<Vec<String>>> =
        partition.periods.iter().map(|p| p.items.iter().map(tokens_of).collect()).collect();
    let tc = cfg.embedding.train_config(ctx.seed);
    let models = match cfg.drift.mode {
        TrainingMode::Incremental => diachrone::train_incremental(&periods, &tc)?,
        TrainingMode::Sequential => diachrone::train_sequential(&periods, &tc)?,
    };
    let mut series = Vec::new();
    for q in &cfg.drift.queries {
        series.extend(diachrone::shift_series(&models, &q.source, &q.targets, cfg.drift.mode)?);
    }
    out.write(&join(prefix, "series.csv"), |w| Ok(diachrone::write_series_csv(&series, w)?))?;
    out.write(&join(prefix, "vocab.csv"), |w| {
        let mut c = csv_writer(w);
        c.write_record(["period", "vocab_size"])?;
        for (i, m) in models.iter().enumerate() {
            c.write_record([(i + 1).to_string(), m.len().to_string()])?;
        }
        c.flush()?;
        Ok(())
    })
}

fn sem_clusters(ctx: &Ctx, field: &str, needed: bool) -> Result<Option<SemClusters>, CliError> {
    let Some(p) = &ctx.cfg.cxg.vectors else {
        if needed {
            return Err(CliError::config(field, "semantic slots need `cxg.vectors`"));
        }
        return Ok(None);
    };
    let model = EmbeddingModel::load(p)?;
    let k = ctx.cfg.cxg.sem_clusters.min(model.len());
    Ok(Some(cxg::induce_sem_clusters(&model, k, ctx.seed)?))
}

fn group_key(by: GroupBy, u: &TextUnit) -> Result<Option<String>, CliError> {
    Ok(match by {
        GroupBy::Community => Some(u.community.clone()),
        GroupBy::CommunityMonth => Some(format!("{}:{}", u.community, YearMonth::from_timestamp(u.created_utc)?)),
        GroupBy::User => (!u.moderator).then(|| u.author.clone()),
    })
}

fn annotated(units: &[TextUnit], sem: Option<&SemClusters>) -> Result<Vec<AnnotatedDoc>, CliError> {
    units
        .iter()
        .map(|u| {
            let d = tagged_doc(u);
            let tags = d.tags.clone().unwrap_or_default();
            let mut a = AnnotatedDoc::new(d.tokens).with_tags(tags)?;
            if let Some(s) = sem {
                a = a.with_sem(s);
            }
            Ok(a)
        })
        .collect()
}

pub fn cxg_mine(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<PathBuf, CliError> {
    let mc = ctx.cfg.cxg.mine_config();
    let sem = sem_clusters(ctx, "cxg.vectors", mc.feature_set == FeatureSet::SemPlus)?;
    let docs = annotated(ctx.units()?, sem.as_ref())?;
    let constructicon = cxg::mine_constructions(&docs, &mc)?;
    if let Some(s) = &sem {
        out.write(&join(prefix, "sem_clusters.tsv"), |w| Ok(s.write(w)?))?;
    }
    let path = out.path(&join(prefix, "constructicon.tsv"))?;
    constructicon.save(&path)?;
    Ok(path)
}

pub fn cxg_parse(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    let cfg = &ctx.cfg.cxg;
    let p = cfg
        .constructicon
        .as_ref()
        .ok_or_else(|| CliError::config("cxg.constructicon", "a constructicon file is required"))?;
    let constructicon =
        Constructicon::load(p).map_err(|e| CliError::config("cxg.constructicon", e.to_string()))?;
    let needs_sem = constructicon.constructions.iter().any(|c| c.feature_set() == FeatureSet::SemPlus);
    let sem = sem_clusters(ctx, "cxg.vectors", needs_sem)?;
    let mut groups = Vec::new();
    let mut kept = Vec::new();
    for u in ctx.units()? {
        if let Some(g) = group_key(cfg.group_by, u)? {
            groups.push(g);
            kept.push(u.clone());
        }
    }
    let docs = annotated(&kept, sem.as_ref())?;
    let table = cxg::parse_counts(groups.iter().map(String::as_str).zip(docs.iter()), &constructicon)?;
    out.write(&join(prefix, "counts.csv"), |w| Ok(table.write_csv(w, false)?))?;
    out.write(&join(prefix, "counts_norm.csv"), |w| Ok(table.write_csv(w, true)?))?;
    if let Some(t) = cfg.similarity_threshold {
        let g = cxg::similarity_network(&table.vectors(), t)?;
        let part = netstats::louvain(&g, ctx.seed);
        out.write(&join(prefix, "similarity_edges.csv"), |w| Ok(g.write_edges(w)?))?;
        out.write(&join(prefix, "similarity_partition.csv"), |w| Ok(part.write_csv(&g, w)?))?;
    }
    Ok(())
}

pub fn network(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    let sets = netstats::community_users(ctx.units()?);
    let g = netstats::overlap_graph(&sets, ctx.cfg.network.threshold)?;
    let part = netstats::louvain(&g, ctx.seed);
    let q = netstats::modularity(&g, &part);
    out.write(&join(prefix, "edges.csv"), |w| Ok(g.write_edges(w)?))?;
    out.write(&join(prefix, "partition.csv"), |w| Ok(part.write_csv(&g, w)?))?;
    out.write(&join(prefix, "network.csv"), |w| {
        let mut c = csv_writer(w);
        c.write_record(["nodes", "edges", "communities", "modularity"])?;
        c.write_record([
            g.node_count().to_string(),
            g.edge_count().to_string(),
            part.n_communities().to_string(),
            format!("{q:.6}"),
        ])?;
        c.flush()?;
        Ok(())
    })
}

pub fn cohorts(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    let mut profiles = netstats::build_profiles(ctx.units()?);
    netstats::assign_deciles(&mut profiles)?;
    out.write(&join(prefix, "profiles.csv"), |w| Ok(netstats::write_profiles_csv(&profiles, w)?))
}

pub fn ols(ctx: &Ctx, out: &mut Outputs, prefix: &str) -> Result<(), CliError> {
    let cfg = &ctx.cfg.ols;
    let data = cfg.data.as_ref().ok_or_else(|| CliError::config("ols.data", "a CSV data file is required"))?;
    let response = cfg.response.as_ref().ok_or_else(|| CliError::config("ols.response", "required"))?;
    if cfg.predictors.is_empty() {
        return Err(CliError::config("ols.predictors", "at least one predictor is required"));
    }
    let mut reader = csv::Reader::from_path(data)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str, field: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::config(field, format!("column {name:?} not in {}", data.display())))
    };
    let yi = col(response, "ols.response")?;
    let xi: Vec<usize> = cfg.predictors.iter().map(|p| col(p, "ols.predictors")).collect::<Result<_, _>>()?;
    let mut y = Vec::new();
    let mut xs = vec![Vec::new(); xi.len()];
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64, CliError> {
            let s = rec.get(i).unwrap_or("");
            s.trim()
                .parse()
                .map_err(|_| CliError::data(format!("row {}: {:?} in column {:?} is not a number", row + 2, s, &headers[i])))
        };
        y.push(num(yi)?);
        for (x, &i) in xs.iter_mut().zip(&xi) {
            x.push(num(i)?);
        }
    }
    let columns: Vec<(String, Vec<f64>)> = cfg.predictors.iter().cloned().zip(xs).collect();
    let fit = netstats::ols(&y, &columns)?;
    out.write(&join(prefix, "ols.csv"), |w| Ok(fit.write_csv(w)?))
}

/// Every analysis over one corpus, each in its own subdirectory. Later
/// steps read the files written by earlier ones.
pub fn report(ctx: &mut Ctx, out: &mut Outputs) -> Result<(), CliError> {
    stats(ctx, out, "stats")?;
    variables(ctx, out, "variables")?;
    network(ctx, out, "network")?;
    cohorts(ctx, out, "cohorts")?;
    classify(ctx, out, "classify")?;
    let vectors = embed_train(ctx, out, "embed")?;
    if ctx.cfg.pairs.vectors.is_none() {
        ctx.cfg.pairs.vectors = Some(vectors.clone());
    }
    embed_eval(ctx, out, "embed")?;
    if ctx.cfg.cxg.vectors.is_none() {
        ctx.cfg.cxg.vectors = Some(vectors);
    }
    let mined = cxg_mine(ctx, out, "cxg")?;
    if ctx.cfg.cxg.constructicon.is_none() {
        ctx.cfg.cxg.constructicon = Some(mined);
    }
    cxg_parse(ctx, out, "cxg")?;
    if !ctx.cfg.drift.queries.is_empty() {
        drift(ctx, out, "drift")?;
    }
    if ctx.cfg.ols.data.is_some() {
        ols(ctx, out, "ols")?;
    }
    Ok(())
}
