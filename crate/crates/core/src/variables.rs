//! Sociolinguistic variable inventory, variant counting, proportion tables
//! and distributional pattern labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Serialize};

use crate::corpus::local_hour;
use crate::error::{Error, Result};
use crate::textprep::{Tag, TokenizedDoc};

const DEFAULT_INVENTORY: &str = include_str!("../data/variables.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Lexical,
    Morphosyntactic,
    Semantic,
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lexical" => Ok(Self::Lexical),
            "morphosyntactic" => Ok(Self::Morphosyntactic),
            "semantic" => Ok(Self::Semantic),
            other => Err(Error::Validation(format!("unknown variable category {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Conservative,
    Innovative,
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "conservative" => Ok(Self::Conservative),
            "innovative" => Ok(Self::Innovative),
            other => Err(Error::Validation(format!("unknown variant role {other:?}"))),
        }
    }
}

/// Parses `NN`, `VB|VBD`, or the groups `V` (any verb) and `N` (any noun).
pub fn parse_pos_constraint(s: &str) -> Result<Vec<Tag>> {
    let mut tags = BTreeSet::new();
    for part in s.split('|').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "V" => tags.extend([Tag::VB, Tag::VBD, Tag::VBN, Tag::VBG]),
            "N" => tags.extend([Tag::NN, Tag::NNS]),
            p => {
                tags.insert(p.parse()?);
            }
        }
    }
    Ok(tags.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub label: String,
    pub role: Role,
    /// Each form is one token or an adjacent token pair.
    pub surface_forms: Vec<Vec<String>>,
    /// Allowed tags for the last token of a match.
    pub pos_constraint: Option<Vec<Tag>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub id: String,
    pub category: Category,
    pub variants: Vec<Variant>,
}

impl VariableSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Validation(format!("variable {}: {msg}", self.id)));
        if self.variants.len() < 2 {
            return fail("needs at least two variants");
        }
        if !self.variants.iter().any(|v| v.role == Role::Conservative) {
            return fail("no conservative variant");
        }
        if !self.variants.iter().any(|v| v.role == Role::Innovative) {
            return fail("no innovative variant");
        }
        for v in &self.variants {
            for form in &v.surface_forms {
                if form.is_empty() || form.len() > 2 {
                    return fail("surface forms must have one or two tokens");
                }
                if form.iter().any(|t| t.to_lowercase() != *t) {
                    return fail("surface forms must be lowercase");
                }
            }
        }
        Ok(())
    }

    pub fn needs_tags(&self) -> bool {
        self.variants.iter().any(|v| v.pos_constraint.is_some())
    }

    pub fn labels(&self) -> Vec<String> {
        self.variants.iter().map(|v| v.label.clone()).collect()
    }

    pub fn roles(&self) -> Vec<Role> {
        self.variants.iter().map(|v| v.role).collect()
    }

    /// Variant indices matched in a token stream. At each position the
    /// longest surface form of any variant wins; matches do not overlap.
    pub fn match_tokens(&self, tokens: &[String], tags: Option<&[Tag]>) -> Result<Vec<usize>> {
        if self.needs_tags() && tags.is_none() {
            return Err(Error::MissingLayer("pos tags"));
        }
        let mut hits = Vec::new();
        let mut i = 0;
        'scan: while i < tokens.len() {
            for len in [2usize, 1] {
                if i + len > tokens.len() {
                    continue;
                }
                let span = &tokens[i..i + len];
                for (vi, v) in self.variants.iter().enumerate() {
                    if !v.surface_forms.iter().any(|f| f.as_slice() == span) {
                        continue;
                    }
                    if let (Some(allowed), Some(tags)) = (&v.pos_constraint, tags) {
                        if !allowed.contains(&tags[i + len - 1]) {
                            continue;
                        }
                    }
                    hits.push(vi);
                    i += len;
                    continue 'scan;
                }
            }
            i += 1;
        }
        Ok(hits)
    }
}

#[derive(Debug, Deserialize)]
struct SpecRow {
    variable: String,
    category: String,
    variant_label: String,
    role: String,
    surface_form: String,
    #[serde(default)]
    pos: Option<String>,
}

/// Reads a `variable,category,variant_label,role,surface_form,pos` table.
/// Rows of one variable must be contiguous; a variable id that reappears
/// after another variable is reported as a duplicate.
pub fn load_specs<R: Read>(reader: R) -> Result<Vec<VariableSpec>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut specs: Vec<VariableSpec> = Vec::new();
    let mut seen = BTreeSet::new();
    for row in rdr.deserialize() {
        let row: SpecRow = row?;
        let category: Category = row.category.parse()?;
        let role: Role = row.role.parse()?;
        let pos = match row.pos.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(p) => Some(parse_pos_constraint(p)?),
        };
        let form: Vec<String> = row.surface_form.split_whitespace().map(String::from).collect();
        let current = specs.last_mut().filter(|s| s.id == row.variable);
        let spec = match current {
            Some(s) => s,
            None => {
                if !seen.insert(row.variable.clone()) {
                    return Err(Error::Validation(format!("duplicate variable id {}", row.variable)));
                }
                specs.push(VariableSpec {
                    id: row.variable.clone(),
                    category,
                    variants: Vec::new(),
                });
                specs.last_mut().expect("just pushed")
            }
        };
        if spec.category != category {
            return Err(Error::Validation(format!("variable {} mixes categories", spec.id)));
        }
        match spec.variants.iter_mut().find(|v| v.label == row.variant_label) {
            Some(v) => {
                if v.role != role || v.pos_constraint != pos {
                    return Err(Error::Validation(format!(
                        "variant {}/{} has inconsistent role or pos",
                        spec.id, v.label
                    )));
                }
                v.surface_forms.push(form);
            }
            None => spec.variants.push(Variant {
                label: row.variant_label,
                role,
                surface_forms: vec![form],
                pos_constraint: pos,
            }),
        }
    }
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

pub fn load_specs_path(path: impl AsRef<Path>) -> Result<Vec<VariableSpec>> {
    load_specs(std::fs::File::open(path)?)
}

/// The shipped inventory of lexical, morphosyntactic and semantic variables.
pub fn default_specs() -> Vec<VariableSpec> {
    load_specs(DEFAULT_INVENTORY.as_bytes()).expect("shipped inventory is valid")
}

fn doc_community(doc: &TokenizedDoc) -> &str {
    doc.origin.as_ref().map(|u| u.community.as_str()).unwrap_or("")
}

/// Token frequencies per community, variable and variant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VariantCounts {
    /// variable id → variant labels and roles, in inventory order
    pub variants: BTreeMap<String, Vec<(String, Role)>>,
    /// (community, variable id) → count per variant
    pub counts: BTreeMap<(String, String), Vec<u64>>,
}

impl VariantCounts {
    fn register(&mut self, spec: &VariableSpec) {
        self.variants.entry(spec.id.clone()).or_insert_with(|| {
            spec.variants.iter().map(|v| (v.label.clone(), v.role)).collect()
        });
    }

    pub fn communities(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.counts.keys().map(|(c, _)| c).collect();
        set.into_iter().cloned().collect()
    }

    pub fn get(&self, community: &str, variable: &str) -> Option<&[u64]> {
        self.counts
            .get(&(community.to_string(), variable.to_string()))
            .map(Vec::as_slice)
    }

    pub fn n(&self, community: &str, variable: &str, label: &str) -> u64 {
        let Some(labels) = self.variants.get(variable) else {
            return 0;
        };
        let Some(idx) = labels.iter().position(|(l, _)| l == label) else {
            return 0;
        };
        self.get(community, variable).map_or(0, |c| c[idx])
    }

    pub fn total(&self, community: &str, variable: &str) -> u64 {
        self.get(community, variable).map_or(0, |c| c.iter().sum())
    }

    /// Percentages per variant, `None` when the variable never occurs.
    pub fn proportions(&self, community: &str, variable: &str) -> Option<Vec<f64>> {
        let counts = self.get(community, variable)?;
        let total: u64 = counts.iter().sum();
        (total > 0).then(|| counts.iter().map(|&c| 100.0 * c as f64 / total as f64).collect())
    }

    /// Adds another set of counts; counting disjoint partitions and merging
    /// gives the same result as counting their union.
    pub fn merge(&mut self, other: &VariantCounts) {
        for (k, v) in &other.variants {
            self.variants.entry(k.clone()).or_insert_with(|| v.clone());
        }
        for (k, v) in &other.counts {
            let e = self.counts.entry(k.clone()).or_insert_with(|| vec![0; v.len()]);
            for (a, b) in e.iter_mut().zip(v) {
                *a += b;
            }
        }
    }

    pub fn table(&self, variable: &str, communities: &[String]) -> Result<ProportionTable> {
        let variants = self
            .variants
            .get(variable)
            .ok_or_else(|| Error::Validation(format!("unknown variable {variable}")))?
            .clone();
        let rows = communities
            .iter()
            .map(|c| {
                let p = self.proportions(c, variable);
                let row = (0..variants.len())
                    .map(|i| p.as_ref().map(|p| p[i]))
                    .collect();
                (c.clone(), row)
            })
            .collect();
        Ok(ProportionTable {
            variable: variable.to_string(),
            variants,
            rows,
        })
    }

    /// Thesis-style table: `variable,variant,<community...>,n` with
    /// percentages to one decimal and `-` for zero counts.
    pub fn write_csv<W: Write>(&self, communities: &[String], w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["variable".to_string(), "variant".to_string()];
        header.extend(communities.iter().cloned());
        header.push("n".to_string());
        out.write_record(&header)?;
        for (var, labels) in &self.variants {
            for (i, (label, _)) in labels.iter().enumerate() {
                let mut rec = vec![var.clone(), label.clone()];
                let mut n = 0;
                for c in communities {
                    let count = self.get(c, var).map_or(0, |v| v[i]);
                    n += count;
                    rec.push(match self.proportions(c, var) {
                        Some(p) if count > 0 => format!("{:.1}", p[i]),
                        _ => "-".to_string(),
                    });
                }
                rec.push(n.to_string());
                out.write_record(&rec)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Counts exact surface-form matches per community. Semantic variables are
/// anchors for embedding work and are not counted here.
pub fn count_variants(docs: &[TokenizedDoc], specs: &[VariableSpec]) -> Result<VariantCounts> {
    let mut counts = VariantCounts::default();
    let countable: Vec<&VariableSpec> = specs.iter().filter(|s| s.category != Category::Semantic).collect();
    for spec in &countable {
        counts.register(spec);
    }
    for doc in docs {
        let community = doc_community(doc);
        for spec in &countable {
            let hits = spec.match_tokens(&doc.tokens, doc.tags.as_deref())?;
            let entry = counts
                .counts
                .entry((community.to_string(), spec.id.clone()))
                .or_insert_with(|| vec![0; spec.variants.len()]);
            for vi in hits {
                entry[vi] += 1;
            }
        }
    }
    Ok(counts)
}

/// Per-community percentages for one variable; `None` cells are zero counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionTable {
    pub variable: String,
    pub variants: Vec<(String, Role)>,
    pub rows: BTreeMap<String, Vec<Option<f64>>>,
}

impl ProportionTable {
    /// Share held by the conservative variants, or `None` if the community
    /// has no data at all.
    pub fn conservative_share(&self, community: &str) -> Option<f64> {
        let row = self.rows.get(community)?;
        if row.iter().all(Option::is_none) {
            return None;
        }
        Some(
            row.iter()
                .zip(&self.variants)
                .filter(|(_, (_, r))| *r == Role::Conservative)
                .map(|(p, _)| p.unwrap_or(0.0))
                .sum(),
        )
    }

    fn top_variant(&self, community: &str) -> Option<&str> {
        let row = self.rows.get(community)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in row.iter().enumerate() {
            let p = p.unwrap_or(0.0);
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((i, p));
            }
        }
        best.map(|(i, _)| self.variants[i].0.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    ConservativeDominant,
    InnovativeDominant,
    CommunityGrouping,
    CommunityOutlier,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::ConservativeDominant => "conservative_dominant",
            Pattern::InnovativeDominant => "innovative_dominant",
            Pattern::CommunityGrouping => "community_grouping",
            Pattern::CommunityOutlier => "community_outlier",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionPattern {
    pub variable: String,
    pub pattern: Pattern,
    /// Outlier: the deviating community. Grouping: communities sharing a
    /// top variant, each group sorted, groups sorted.
    pub detail: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Conservative,
    Tied,
    Innovative,
}

/// Assigns one of the four distributional patterns from the conservative
/// share in each community. Communities with no data are ignored.
pub fn classify_distribution(table: &ProportionTable, communities: &[String]) -> Result<DistributionPattern> {
    let mut sides: BTreeMap<&str, Side> = BTreeMap::new();
    for c in communities {
        if let Some(s) = table.conservative_share(c) {
            let side = if s > 50.0 {
                Side::Conservative
            } else if s < 50.0 {
                Side::Innovative
            } else {
                Side::Tied
            };
            sides.insert(c.as_str(), side);
        }
    }
    if sides.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{}: proportions needed for at least two communities",
            table.variable
        )));
    }
    let result = |pattern, detail| DistributionPattern {
        variable: table.variable.clone(),
        pattern,
        detail,
    };
    if sides.values().all(|s| *s == Side::Conservative) {
        return Ok(result(Pattern::ConservativeDominant, None));
    }
    if sides.values().all(|s| *s == Side::Innovative) {
        return Ok(result(Pattern::InnovativeDominant, None));
    }
    if sides.len() >= 3 {
        let mut tally: BTreeMap<Side, Vec<&str>> = BTreeMap::new();
        for (c, s) in &sides {
            tally.entry(*s).or_default().push(c);
        }
        if tally.len() == 2 {
            let minority = tally.values().find(|v| v.len() == 1);
            let majority_uniform = tally.values().any(|v| v.len() == sides.len() - 1);
            if let (Some(m), true) = (minority, majority_uniform) {
                if sides[m[0]] != Side::Tied {
                    return Ok(result(Pattern::CommunityOutlier, Some(vec![vec![m[0].to_string()]])));
                }
            }
        }
    }
    let mut groups: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for c in sides.keys() {
        if let Some(top) = table.top_variant(c) {
            groups.entry(top).or_default().push(c.to_string());
        }
    }
    let mut detail: Vec<Vec<String>> = groups.into_values().collect();
    detail.sort();
    Ok(result(Pattern::CommunityGrouping, Some(detail)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourBin {
    pub hour: u32,
    pub conservative: u64,
    pub innovative: u64,
}

impl HourBin {
    pub fn innovative_pct(&self) -> f64 {
        100.0 * self.innovative as f64 / (self.conservative + self.innovative) as f64
    }

    pub fn conservative_pct(&self) -> f64 {
        100.0 - self.innovative_pct()
    }
}

/// Conservative and innovative token counts per local hour for one
/// community. Hours without tokens are left out, so gaps stay visible.
pub fn hourly_variant_profile(
    spec: &VariableSpec,
    community: &str,
    docs: &[TokenizedDoc],
    utc_offset_hours: i32,
) -> Result<Vec<HourBin>> {
    let mut bins = [(0u64, 0u64); 24];
    for doc in docs {
        let Some(origin) = &doc.origin else { continue };
        if origin.community != community {
            continue;
        }
        let hour = local_hour(origin.created_utc, utc_offset_hours) as usize;
        for vi in spec.match_tokens(&doc.tokens, doc.tags.as_deref())? {
            match spec.variants[vi].role {
                Role::Conservative => bins[hour].0 += 1,
                Role::Innovative => bins[hour].1 += 1,
            }
        }
    }
    Ok(bins
        .iter()
        .enumerate()
        .filter(|(_, (c, i))| c + i > 0)
        .map(|(h, &(c, i))| HourBin {
            hour: h as u32,
            conservative: c,
            innovative: i,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn from_timestamp(ts: i64) -> Result<Self> {
        let dt = DateTime::from_timestamp(ts, 0).ok_or_else(|| Error::Validation(format!("timestamp {ts} out of range")))?;
        Ok(Self {
            year: dt.year(),
            month: dt.month(),
        })
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Monthly counts per orthographic variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergenceSeries {
    pub labels: Vec<String>,
    pub months: Vec<YearMonth>,
    /// `counts[v][m]`: occurrences of variant `v` in month `m`.
    pub counts: Vec<Vec<u64>>,
}

impl EmergenceSeries {
    pub fn combined(&self) -> Vec<u64> {
        (0..self.months.len())
            .map(|m| self.counts.iter().map(|c| c[m]).sum())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["month".to_string()];
        header.extend(self.labels.iter().cloned());
        out.write_record(&header)?;
        for (m, ym) in self.months.iter().enumerate() {
            let mut rec = vec![ym.to_string()];
            rec.extend(self.counts.iter().map(|c| c[m].to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Counts each variant pattern per calendar month (UTC). The month axis
/// runs without gaps from the earliest to the latest document.
pub fn emergence_series(patterns: &[(String, Vec<Vec<String>>)], docs: &[TokenizedDoc]) -> Result<EmergenceSeries> {
    let labels: Vec<String> = patterns.iter().map(|(l, _)| l.clone()).collect();
    let spec = VariableSpec {
        id: "emergence".into(),
        category: Category::Lexical,
        variants: patterns
            .iter()
            .map(|(l, forms)| Variant {
                label: l.clone(),
                role: Role::Innovative,
                surface_forms: forms.clone(),
                pos_constraint: None,
            })
            .collect(),
    };
    let mut by_month: BTreeMap<YearMonth, Vec<u64>> = BTreeMap::new();
    for doc in docs {
        let Some(origin) = &doc.origin else { continue };
        let ym = YearMonth::from_timestamp(origin.created_utc)?;
        let row = by_month.entry(ym).or_insert_with(|| vec![0; labels.len()]);
        for vi in spec.match_tokens(&doc.tokens, None)? {
            row[vi] += 1;
        }
    }
    let mut months = Vec::new();
    if let (Some(&first), Some(&last)) = (by_month.keys().next(), by_month.keys().next_back()) {
        let mut m = first;
        while m <= last {
            months.push(m);
            m = m.next();
        }
    }
    let counts = (0..labels.len())
        .map(|v| months.iter().map(|m| by_month.get(m).map_or(0, |r| r[v])).collect())
        .collect();
    Ok(EmergenceSeries { labels, months, counts })
}
