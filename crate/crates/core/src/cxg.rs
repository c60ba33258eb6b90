//! Construction-grammar features: slot-constraint sequences over lexical,
//! syntactic and semantic layers, corpus parsing into frequency vectors,
//! a ΔP-scored construction miner and similarity networks.
//!
//! The miner is a small association-based stand-in, not a reimplementation
//! of any published grammar induction pipeline. Constructicons produced by
//! other tools can be loaded from file and parsed the same way.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::embed::EmbeddingModel;
use crate::error::{Error, Result};
use crate::netstats::{self, Graph};
use crate::textprep::{Tag, TokenizedDoc};

pub const DEFAULT_SEM_CLUSTERS: usize = 256;

/// A POS class a syntactic slot accepts: one tag or a named group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SynClass {
    Tag(Tag),
    /// Any verb tag.
    V,
    /// Any noun tag.
    N,
    /// Particle-like words: adverbs and prepositions.
    Prt,
}

impl SynClass {
    pub fn accepts(self, tag: Tag) -> bool {
        match self {
            Self::Tag(t) => t == tag,
            Self::V => tag.is_verb(),
            Self::N => tag.is_noun(),
            Self::Prt => matches!(tag, Tag::RB | Tag::IN),
        }
    }
}

impl fmt::Display for SynClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tag(t) => write!(f, "{t}"),
            Self::V => f.write_str("V"),
            Self::N => f.write_str("N"),
            Self::Prt => f.write_str("PRT"),
        }
    }
}

impl FromStr for SynClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "V" => Self::V,
            "N" => Self::N,
            "PRT" => Self::Prt,
            other => Self::Tag(other.parse()?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotConstraint {
    Lex(String),
    Syn(SynClass),
    Sem(u32),
}

impl fmt::Display for SlotConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Lex(w) => write!(f, "lex:{w}"),
            Self::Syn(c) => write!(f, "syn:{c}"),
            Self::Sem(id) => write!(f, "sem:{id}"),
        }
    }
}

impl FromStr for SlotConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("slot {s:?} lacks a kind prefix")))?;
        if value.is_empty() || value.contains(char::is_whitespace) {
            return Err(Error::Format(format!("bad slot value in {s:?}")));
        }
        match kind.to_ascii_lowercase().as_str() {
            "lex" => Ok(Self::Lex(value.to_string())),
            "syn" => Ok(Self::Syn(value.parse()?)),
            "sem" => value
                .trim_matches(|c| c == '<' || c == '>')
                .parse()
                .map(Self::Sem)
                .map_err(|_| Error::Format(format!("bad cluster id in {s:?}"))),
            _ => Err(Error::Format(format!("unknown slot kind in {s:?}"))),
        }
    }
}

/// Which slot kinds a construction uses. `Syn` admits lexical and
/// syntactic slots; `SemPlus` admits all three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureSet {
    Lex,
    Syn,
    SemPlus,
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lex" => Ok(Self::Lex),
            "syn" => Ok(Self::Syn),
            "sem" | "sem+" | "semplus" | "all" => Ok(Self::SemPlus),
            other => Err(Error::Validation(format!("unknown feature set {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Construction {
    pub id: String,
    pub slots: Vec<SlotConstraint>,
}

impl Construction {
    pub fn new(id: impl Into<String>, slots: Vec<SlotConstraint>) -> Result<Self> {
        if !(2..=4).contains(&slots.len()) {
            return Err(Error::Validation(format!("construction length {} outside 2..=4", slots.len())));
        }
        Ok(Self { id: id.into(), slots })
    }

    pub fn parse(id: &str, slots: &str) -> Result<Self> {
        let slots = slots
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(id, slots)
    }

    pub fn feature_set(&self) -> FeatureSet {
        if self.slots.iter().any(|s| matches!(s, SlotConstraint::Sem(_))) {
            FeatureSet::SemPlus
        } else if self.slots.iter().any(|s| matches!(s, SlotConstraint::Syn(_))) {
            FeatureSet::Syn
        } else {
            FeatureSet::Lex
        }
    }

    pub fn pattern(&self) -> String {
        self.slots.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.slots.iter().map(ToString::to_string).collect();
        write!(f, "[ {} ]", inner.join(" -- "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Mined,
    Loaded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constructicon {
    pub constructions: Vec<Construction>,
    pub provenance: Provenance,
}

impl Constructicon {
    pub fn new(constructions: Vec<Construction>, provenance: Provenance) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(dup) = constructions.iter().find(|c| !seen.insert(c.id.as_str())) {
            return Err(Error::Validation(format!("duplicate construction id {}", dup.id)));
        }
        Ok(Self {
            constructions,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.constructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constructions.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.constructions.iter().map(|c| c.id.clone()).collect()
    }

    pub fn by_feature_set(&self, set: FeatureSet) -> impl Iterator<Item = &Construction> {
        self.constructions.iter().filter(move |c| c.feature_set() == set)
    }

    /// One `id<TAB>slot;slot` line per construction.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut out = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, slots) = line
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("constructicon line {}: missing tab", n + 1)))?;
            out.push(Construction::parse(id.trim(), slots)?);
        }
        Self::new(out, Provenance::Loaded)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.constructions {
            writeln!(w, "{}\t{}", c.id, c.pattern())?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Tokens with optional POS and semantic-cluster layers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotatedDoc {
    pub tokens: Vec<String>,
    pub tags: Option<Vec<Tag>>,
    /// Cluster id per token; `None` for tokens outside the clustered vocabulary.
    pub sem: Option<Vec<Option<u32>>>,
}

impl AnnotatedDoc {
    pub fn new(tokens: Vec<String>) -> Self {
        Self {
            tokens,
            tags: None,
            sem: None,
        }
    }

    pub fn with_tags(mut self, tags: Vec<Tag>) -> Result<Self> {
        if tags.len() != self.tokens.len() {
            return Err(Error::Validation("tag layer length differs from tokens".into()));
        }
        self.tags = Some(tags);
        Ok(self)
    }

    pub fn with_sem(mut self, clusters: &SemClusters) -> Self {
        self.sem = Some(self.tokens.iter().map(|t| clusters.get(t)).collect());
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn slot_holds(&self, slot: &SlotConstraint, i: usize) -> bool {
        match slot {
            SlotConstraint::Lex(w) => self.tokens[i] == *w,
            SlotConstraint::Syn(c) => self.tags.as_ref().is_some_and(|t| c.accepts(t[i])),
            SlotConstraint::Sem(id) => self.sem.as_ref().is_some_and(|s| s[i] == Some(*id)),
        }
    }

    /// Every constraint a position satisfies, in slot order.
    fn alternatives(&self, i: usize, set: FeatureSet) -> Vec<SlotConstraint> {
        let mut out = vec![SlotConstraint::Lex(self.tokens[i].clone())];
        if set >= FeatureSet::Syn {
            if let Some(t) = &self.tags {
                out.push(SlotConstraint::Syn(SynClass::Tag(t[i])));
            }
        }
        if set == FeatureSet::SemPlus {
            if let Some(Some(id)) = self.sem.as_ref().map(|s| s[i]) {
                out.push(SlotConstraint::Sem(id));
            }
        }
        out
    }

    fn require_layers(&self, slots: &[SlotConstraint]) -> Result<()> {
        for s in slots {
            match s {
                SlotConstraint::Syn(_) if self.tags.is_none() => return Err(Error::MissingLayer("pos")),
                SlotConstraint::Sem(_) if self.sem.is_none() => return Err(Error::MissingLayer("sem")),
                _ => {}
            }
        }
        Ok(())
    }

    fn match_starts(&self, slots: &[SlotConstraint]) -> Vec<usize> {
        if slots.len() > self.len() {
            return Vec::new();
        }
        (0..=self.len() - slots.len())
            .filter(|&i| slots.iter().enumerate().all(|(j, s)| self.slot_holds(s, i + j)))
            .collect()
    }
}

impl From<TokenizedDoc> for AnnotatedDoc {
    fn from(d: TokenizedDoc) -> Self {
        Self {
            tokens: d.tokens,
            tags: d.tags,
            sem: None,
        }
    }
}

/// Number of (possibly overlapping) windows where every slot holds.
pub fn match_count(doc: &AnnotatedDoc, cx: &Construction) -> Result<usize> {
    doc.require_layers(&cx.slots)?;
    Ok(doc.match_starts(&cx.slots).len())
}

/// Token → semantic cluster id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemClusters {
    pub k: usize,
    map: HashMap<String, u32>,
}

impl SemClusters {
    pub fn get(&self, token: &str) -> Option<u32> {
        self.map.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Sorted `token<TAB>cluster` lines.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let sorted: BTreeMap<&String, &u32> = self.map.iter().collect();
        for (t, c) in sorted {
            writeln!(w, "{t}\t{c}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut map = HashMap::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (t, c) = line
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("bad cluster line {line:?}")))?;
            let c: u32 = c.trim().parse().map_err(|_| Error::Format(format!("bad cluster id {c:?}")))?;
            map.insert(t.to_string(), c);
        }
        let k = map.values().collect::<BTreeSet<_>>().len();
        Ok(Self { k, map })
    }
}

/// Clusters the embedding vocabulary into `k` semantic categories with
/// k-means over unit-length vectors.
pub fn induce_sem_clusters(model: &EmbeddingModel, k: usize, seed: u64) -> Result<SemClusters> {
    if k == 0 || k > model.len() {
        return Err(Error::Validation(format!("k = {k} for a vocabulary of {}", model.len())));
    }
    let words = model.vocab().words();
    let points: Vec<Vec<f64>> = words
        .iter()
        .map(|w| {
            let v: Vec<f64> = model.get(w).expect("vocab word").iter().map(|x| f64::from(*x)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter().map(|x| x / norm).collect()
            } else {
                v
            }
        })
        .collect();
    let km = netstats::kmeans(&points, k, seed)?;
    Ok(SemClusters {
        k,
        map: words.iter().cloned().zip(km.assignment.iter().map(|&c| c as u32)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupCounts {
    pub counts: Vec<u64>,
    pub tokens: u64,
}

/// Construction frequencies per group.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub ids: Vec<String>,
    pub groups: BTreeMap<String, GroupCounts>,
}

impl CountTable {
    pub fn new(ids: Vec<String>) -> Self {
        Self {
            ids,
            groups: BTreeMap::new(),
        }
    }

    /// Registers a group so it appears even without documents.
    pub fn ensure_group(&mut self, name: &str) -> &mut GroupCounts {
        let n = self.ids.len();
        self.groups.entry(name.to_string()).or_insert_with(|| GroupCounts {
            counts: vec![0; n],
            tokens: 0,
        })
    }

    /// Counts per 1,000 tokens; all zeros for a group without tokens.
    pub fn normalized(&self, group: &str) -> Option<Vec<f64>> {
        self.groups.get(group).map(|g| {
            g.counts
                .iter()
                .map(|&c| if g.tokens == 0 { 0.0 } else { c as f64 * 1000.0 / g.tokens as f64 })
                .collect()
        })
    }

    pub fn merge(&mut self, other: &CountTable) -> Result<()> {
        if self.ids != other.ids {
            return Err(Error::Validation("count tables use different constructicons".into()));
        }
        for (name, g) in &other.groups {
            let mine = self.ensure_group(name);
            mine.tokens += g.tokens;
            for (a, b) in mine.counts.iter_mut().zip(&g.counts) {
                *a += b;
            }
        }
        Ok(())
    }

    /// Normalized vectors keyed by group.
    pub fn vectors(&self) -> BTreeMap<String, Vec<f64>> {
        self.groups
            .keys()
            .map(|g| (g.clone(), self.normalized(g).expect("group exists")))
            .collect()
    }

    /// Wide CSV `group,tokens,<id>...`; raw counts or per-1,000 rates.
    pub fn write_csv<W: Write>(&self, w: W, normalized: bool) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["group".to_string(), "tokens".to_string()];
        header.extend(self.ids.iter().cloned());
        out.write_record(&header)?;
        for (name, g) in &self.groups {
            let mut row = vec![name.clone(), g.tokens.to_string()];
            if normalized {
                row.extend(self.normalized(name).expect("group").iter().map(|v| format!("{v:.4}")));
            } else {
                row.extend(g.counts.iter().map(u64::to_string));
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Parses grouped documents into construction counts.
pub fn parse_counts<'a, I>(docs: I, constructicon: &Constructicon) -> Result<CountTable>
where
    I: IntoIterator<Item = (&'a str, &'a AnnotatedDoc)>,
{
    let mut table = CountTable::new(constructicon.ids());
    for (group, doc) in docs {
        let mut row = vec![0u64; constructicon.len()];
        for (j, cx) in constructicon.constructions.iter().enumerate() {
            row[j] = match_count(doc, cx)? as u64;
        }
        let g = table.ensure_group(group);
        g.tokens += doc.len() as u64;
        for (a, b) in g.counts.iter_mut().zip(row) {
            *a += b;
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MineConfig {
    pub rounds: usize,
    pub min_freq: u64,
    /// Minimum ΔP of the final slot given the rest.
    pub association_threshold: f64,
    pub feature_set: FeatureSet,
}

impl Default for MineConfig {
    fn default() -> Self {
        Self {
            rounds: 5,
            min_freq: 5,
            association_threshold: 0.1,
            feature_set: FeatureSet::SemPlus,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedConstruction {
    pub slots: Vec<SlotConstraint>,
    pub delta_p: f64,
    pub freq: u64,
}

/// ΔP(last | prefix) = P(last | prefix) − P(last | ¬prefix) over all
/// windows of the candidate's length.
pub fn delta_p(n_both: u64, n_prefix: u64, n_last: u64, windows: u64) -> f64 {
    let with = if n_prefix == 0 { 0.0 } else { n_both as f64 / n_prefix as f64 };
    let rest = windows - n_prefix;
    let without = if rest == 0 { 0.0 } else { (n_last - n_both) as f64 / rest as f64 };
    with - without
}

/// Keeps the best-scoring candidate among those matching exactly the same
/// windows. Ties go to the candidate that sorts first.
fn prune_subsumed(docs: &[AnnotatedDoc], mut cands: Vec<MinedConstruction>) -> Vec<MinedConstruction> {
    cands.sort_by(|a, b| b.delta_p.total_cmp(&a.delta_p).then_with(|| a.slots.cmp(&b.slots)));
    let mut seen: HashSet<Vec<(usize, usize)>> = HashSet::new();
    cands
        .into_iter()
        .filter(|c| {
            let cover: Vec<(usize, usize)> = docs
                .iter()
                .enumerate()
                .flat_map(|(d, doc)| doc.match_starts(&c.slots).into_iter().map(move |i| (d, i)))
                .collect();
            seen.insert(cover)
        })
        .collect()
}

/// Mines constructions level by level: round one scores every observed
/// two-slot sequence, and each later round extends the previous round's
/// survivors by one slot, up to four slots.
pub fn mine_candidates(docs: &[AnnotatedDoc], config: &MineConfig) -> Result<Vec<MinedConstruction>> {
    if config.min_freq == 0 {
        return Err(Error::Validation("min_freq must be at least 1".into()));
    }
    let needs = match config.feature_set {
        FeatureSet::Lex => vec![],
        FeatureSet::Syn => vec![SlotConstraint::Syn(SynClass::V)],
        FeatureSet::SemPlus => vec![SlotConstraint::Syn(SynClass::V), SlotConstraint::Sem(0)],
    };
    for d in docs {
        d.require_layers(&needs)?;
    }
    let mut all = Vec::new();
    let mut survivors: Option<BTreeSet<Vec<SlotConstraint>>> = None;
    for round in 0..config.rounds {
        let len = round + 2;
        if len > 4 || survivors.as_ref().is_some_and(BTreeSet::is_empty) {
            break;
        }
        let mut n_prefix: HashMap<Vec<SlotConstraint>, u64> = HashMap::new();
        let mut n_last: HashMap<SlotConstraint, u64> = HashMap::new();
        let mut n_both: HashMap<Vec<SlotConstraint>, u64> = HashMap::new();
        let mut windows = 0u64;
        for doc in docs {
            if doc.len() < len {
                continue;
            }
            for i in 0..=doc.len() - len {
                windows += 1;
                let last_alts = doc.alternatives(i + len - 1, config.feature_set);
                for a in &last_alts {
                    *n_last.entry(a.clone()).or_default() += 1;
                }
                let prefixes: Vec<Vec<SlotConstraint>> = match &survivors {
                    None => doc.alternatives(i, config.feature_set).into_iter().map(|a| vec![a]).collect(),
                    Some(s) => s
                        .iter()
                        .filter(|p| p.iter().enumerate().all(|(j, slot)| doc.slot_holds(slot, i + j)))
                        .cloned()
                        .collect(),
                };
                for p in prefixes {
                    for a in &last_alts {
                        let mut full = p.clone();
                        full.push(a.clone());
                        *n_both.entry(full).or_default() += 1;
                    }
                    *n_prefix.entry(p).or_default() += 1;
                }
            }
        }
        let kept: Vec<MinedConstruction> = n_both
            .into_iter()
            .filter(|(_, f)| *f >= config.min_freq)
            .map(|(slots, f)| {
                let np = n_prefix[&slots[..len - 1]];
                let nl = n_last[&slots[len - 1]];
                MinedConstruction {
                    delta_p: delta_p(f, np, nl, windows),
                    freq: f,
                    slots,
                }
            })
            .filter(|c| c.delta_p >= config.association_threshold)
            .collect();
        let kept = prune_subsumed(docs, kept);
        survivors = Some(kept.iter().map(|c| c.slots.clone()).collect());
        all.extend(kept);
    }
    Ok(all)
}

/// Mined candidates as a constructicon with ids `cx0001`, … in the order
/// of [`mine_candidates`].
pub fn mine_constructions(docs: &[AnnotatedDoc], config: &MineConfig) -> Result<Constructicon> {
    let mined = mine_candidates(docs, config)?;
    let constructions = mined
        .into_iter()
        .enumerate()
        .map(|(i, m)| Construction::new(format!("cx{:04}", i + 1), m.slots))
        .collect::<Result<Vec<_>>>()?;
    Constructicon::new(constructions, Provenance::Mined)
}

/// Nodes are groups; edges join groups whose vectors have cosine at least
/// `threshold`, weighted by that cosine.
pub fn similarity_network(vectors: &BTreeMap<String, Vec<f64>>, threshold: f64) -> Result<Graph> {
    if vectors.len() < 2 {
        return Err(Error::InsufficientData("similarity network needs two vectors".into()));
    }
    let vs: Vec<&Vec<f64>> = vectors.values().collect();
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 { 0.0 } else { dot / (na * nb) }
    };
    let mut g = Graph::new(vectors.keys().cloned().collect());
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let c = cos(vs[i], vs[j]);
            if c >= threshold {
                g.add_edge(i, j, c)?;
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn cx(slots: &str) -> Construction {
        Construction::parse("t", slots).unwrap()
    }

    #[test]
    fn overlapping_lexical_matches() {
        let d = AnnotatedDoc::new(toks("of the of the"));
        assert_eq!(match_count(&d, &cx("lex:of;lex:the")).unwrap(), 2);
        let aa = AnnotatedDoc::new(toks("a a a"));
        assert_eq!(match_count(&aa, &cx("lex:a;lex:a")).unwrap(), 2);
    }

    #[test]
    fn verb_particle() {
        let d = AnnotatedDoc::new(toks("it breaks down")).with_tags(vec![Tag::PRP, Tag::VB, Tag::RB]).unwrap();
        assert_eq!(match_count(&d, &cx("syn:V;syn:PRT")).unwrap(), 1);
        let tagger = crate::textprep::Tagger::seed();
        let words = toks("the car breaks down often");
        let tagged = AnnotatedDoc::new(words.clone()).with_tags(tagger.tag(&words)).unwrap();
        assert_eq!(match_count(&tagged, &cx("syn:V;syn:PRT")).unwrap(), 1);
    }

    #[test]
    fn missing_layers() {
        let d = AnnotatedDoc::new(toks("kia ora"));
        assert!(matches!(match_count(&d, &cx("syn:N;lex:ora")), Err(Error::MissingLayer("pos"))));
        assert!(matches!(match_count(&d, &cx("sem:3;lex:ora")), Err(Error::MissingLayer("sem"))));
    }

    #[test]
    fn slot_syntax() {
        let c = cx("lex:of;syn:DET;sem:<1089>");
        assert_eq!(c.pattern(), "lex:of;syn:DET;sem:1089");
        assert_eq!(c.to_string(), "[ lex:of -- syn:DET -- sem:1089 ]");
        assert_eq!(c.feature_set(), FeatureSet::SemPlus);
        assert_eq!(cx("lex:of;lex:the").feature_set(), FeatureSet::Lex);
        assert!(Construction::parse("x", "lex:a").is_err());
        assert!(Construction::parse("x", "lex:a;lex:b;lex:c;lex:d;lex:e").is_err());
        assert!(Construction::parse("x", "pos:a;lex:b").is_err());
        assert!(Construction::parse("x", "syn:QQ;lex:b").is_err());
    }

    #[test]
    fn constructicon_file() {
        let text = "a\tlex:of;lex:the\nb\tsyn:V;syn:PRT\n";
        let c = Constructicon::from_reader(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.provenance, Provenance::Loaded);
        let mut buf = Vec::new();
        c.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
        assert!(Constructicon::from_reader("a\tlex:x;lex:y\na\tlex:y;lex:z\n".as_bytes()).is_err());
    }

    #[test]
    fn counts_and_normalization() {
        let c = Constructicon::from_reader("a\tlex:kia;lex:ora\n".as_bytes()).unwrap();
        let d1 = AnnotatedDoc::new(toks("kia ora bro kia ora"));
        let d2 = AnnotatedDoc::new(toks("hello there"));
        let empty = AnnotatedDoc::new(vec![]);
        let t = parse_counts([("nz", &d1), ("au", &d2), ("none", &empty)], &c).unwrap();
        assert_eq!(t.groups["nz"].counts, vec![2]);
        assert_eq!(t.groups["au"].counts, vec![0]);
        assert_eq!(t.normalized("nz").unwrap(), vec![400.0]);
        assert_eq!(t.normalized("none").unwrap(), vec![0.0]);
    }

    #[test]
    fn counts_additive() {
        let c = Constructicon::from_reader("a\tlex:kia;lex:ora\nb\tlex:ora;lex:bro\n".as_bytes()).unwrap();
        let a = AnnotatedDoc::new(toks("kia ora bro"));
        let b = AnnotatedDoc::new(toks("ora bro kia ora"));
        let mut ta = parse_counts([("g", &a)], &c).unwrap();
        let tb = parse_counts([("g", &b)], &c).unwrap();
        let pooled = parse_counts([("g", &a), ("g", &b)], &c).unwrap();
        ta.merge(&tb).unwrap();
        assert_eq!(ta, pooled);
    }

    #[test]
    fn planted_collocation_mined() {
        let docs: Vec<AnnotatedDoc> = (0..20)
            .map(|i| AnnotatedDoc::new(toks(&format!("kia ora w{i} and more"))))
            .collect();
        let cfg = MineConfig {
            min_freq: 5,
            association_threshold: 0.5,
            feature_set: FeatureSet::Lex,
            ..MineConfig::default()
        };
        let c = mine_constructions(&docs, &cfg).unwrap();
        assert!(c.constructions.iter().any(|x| x.pattern() == "lex:kia;lex:ora"));
        let none = mine_constructions(&docs, &MineConfig { association_threshold: f64::INFINITY, ..cfg }).unwrap();
        assert!(none.is_empty());
        assert!(mine_constructions(&[], &cfg).unwrap().is_empty());
    }

    #[test]
    fn networks() {
        let mut v = BTreeMap::new();
        v.insert("a".to_string(), vec![1.0, 2.0]);
        v.insert("b".to_string(), vec![1.0, 2.0]);
        v.insert("c".to_string(), vec![2.0, 4.0]);
        assert_eq!(similarity_network(&v, 0.99).unwrap().edge_count(), 3);
        let mut o = BTreeMap::new();
        o.insert("x".to_string(), vec![1.0, 0.0]);
        o.insert("y".to_string(), vec![0.0, 1.0]);
        assert_eq!(similarity_network(&o, 0.99).unwrap().edge_count(), 0);
        o.remove("y");
        assert!(similarity_network(&o, 0.5).is_err());
    }

    #[test]
    fn two_block_network() {
        let mut v = BTreeMap::new();
        for i in 0..4 {
            v.insert(format!("a{i}"), vec![1.0, 0.01 * i as f64, 0.0]);
            v.insert(format!("b{i}"), vec![0.0, 0.01 * i as f64, 1.0]);
        }
        let g = similarity_network(&v, 0.9).unwrap();
        assert_eq!(g.components().len(), 2);
    }

    proptest! {
        #[test]
        fn prefix_never_decreases_count(
            doc in proptest::collection::vec(0u8..4, 0..30),
            prefix in proptest::collection::vec(0u8..6, 0..10),
            pat in proptest::collection::vec(0u8..4, 2..4),
        ) {
            let w = |x: &u8| format!("w{x}");
            let c = Construction::new("p", pat.iter().map(|x| SlotConstraint::Lex(w(x))).collect()).unwrap();
            let base = AnnotatedDoc::new(doc.iter().map(w).collect());
            let longer = AnnotatedDoc::new(prefix.iter().chain(doc.iter()).map(w).collect());
            prop_assert!(match_count(&longer, &c).unwrap() >= match_count(&base, &c).unwrap());
        }

        #[test]
        fn higher_threshold_subset(
            vecs in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), 2..10),
            t1 in -1.0f64..1.0,
            dt in 0.0f64..1.0,
        ) {
            let v: BTreeMap<String, Vec<f64>> = vecs.into_iter().enumerate().map(|(i, x)| (format!("g{i}"), x)).collect();
            let g1 = similarity_network(&v, t1).unwrap();
            let g2 = similarity_network(&v, t1 + dt).unwrap();
            let e1: BTreeSet<(usize, usize)> = g1.edges().map(|e| (e.0, e.1)).collect();
            prop_assert!(g2.edges().all(|e| e1.contains(&(e.0, e.1))));
        }
    }
}
