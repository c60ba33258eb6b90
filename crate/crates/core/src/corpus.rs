//! Archive ingestion, cleaning and text-unit derivation.
//!
//! Input is newline-delimited JSON as found in public archive dumps, one
//! submission or comment per line, optionally gzip or zstd compressed.
//! Field names are configurable through [`Schema`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::textprep;

/// Author/text values the platform substitutes for deleted content.
pub const DELETION_SENTINELS: [&str; 2] = ["[deleted]", "[removed]"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Submission,
    Comment,
}

/// One archived submission or comment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedditRecord {
    pub id: String,
    pub author: String,
    pub subreddit: String,
    pub created_utc: i64,
    pub kind: RecordKind,
    pub title: Option<String>,
    pub selftext: Option<String>,
    pub body: Option<String>,
    pub score: i64,
    pub url: Option<String>,
    /// Moderator/admin marker (`"moderator"`, `"admin"`), absent for ordinary users.
    pub distinguished: Option<String>,
}

impl RedditRecord {
    /// The field that carries the record's main text: the body for comments,
    /// the selftext (falling back to the title) for submissions.
    pub fn main_text(&self) -> Option<&str> {
        match self.kind {
            RecordKind::Comment => self.body.as_deref(),
            RecordKind::Submission => match self.selftext.as_deref() {
                Some(s) if !s.trim().is_empty() => Some(s),
                _ => self.title.as_deref(),
            },
        }
    }

    pub fn is_moderator(&self) -> bool {
        self.distinguished
            .as_deref()
            .is_some_and(|d| !d.is_empty() && d != "null")
    }
}

/// Maps logical record fields onto the keys used by a particular dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schema {
    pub id: String,
    pub author: String,
    pub subreddit: String,
    pub created_utc: String,
    pub title: String,
    pub selftext: String,
    pub body: String,
    pub score: String,
    pub url: String,
    pub distinguished: String,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            id: "id".into(),
            author: "author".into(),
            subreddit: "subreddit".into(),
            created_utc: "created_utc".into(),
            title: "title".into(),
            selftext: "selftext".into(),
            body: "body".into(),
            score: "score".into(),
            url: "url".into(),
            distinguished: "distinguished".into(),
        }
    }
}

/// Result of reading a dump: the parsed records plus bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub records: Vec<RedditRecord>,
    /// Non-blank lines that could not be turned into a record.
    pub skipped: usize,
    /// Non-blank lines seen.
    pub lines: usize,
}

/// Opens a dump file, transparently decompressing gzip or zstd content.
pub fn open_input(path: impl AsRef<Path>) -> Result<Box<dyn BufRead>> {
    let mut reader = BufReader::new(File::open(path.as_ref())?);
    let magic = reader.fill_buf()?;
    let boxed: Box<dyn BufRead> = if magic.starts_with(&[0x1f, 0x8b]) {
        Box::new(BufReader::new(flate2::bufread::MultiGzDecoder::new(reader)))
    } else if magic.starts_with(&[0x28, 0xb5, 0x2f, 0xfd]) {
        let mut dec = zstd::stream::read::Decoder::with_buffer(reader)?;
        // archive dumps are written with long-distance windows
        dec.window_log_max(31)?;
        Box::new(BufReader::new(dec))
    } else {
        Box::new(reader)
    };
    Ok(boxed)
}

/// Reads newline-delimited records. Malformed lines are counted and skipped;
/// the call fails only on I/O errors or when more than half of the lines
/// are malformed.
pub fn ingest<R: BufRead>(reader: R, schema: &Schema) -> Result<Ingested> {
    let mut out = Ingested::default();
    for line in reader.split(b'\n') {
        let line = line?;
        let Ok(text) = std::str::from_utf8(&line) else {
            out.lines += 1;
            out.skipped += 1;
            continue;
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        out.lines += 1;
        match serde_json::from_str::<Value>(text)
            .ok()
            .and_then(|v| parse_record(&v, schema))
        {
            Some(rec) => out.records.push(rec),
            None => out.skipped += 1,
        }
    }
    if out.skipped * 2 > out.lines {
        return Err(Error::Format(format!(
            "{} of {} lines malformed",
            out.skipped, out.lines
        )));
    }
    Ok(out)
}

/// Convenience wrapper around [`open_input`] and [`ingest`].
pub fn ingest_path(path: impl AsRef<Path>, schema: &Schema) -> Result<Ingested> {
    ingest(open_input(path)?, schema)
}

fn parse_record(v: &Value, schema: &Schema) -> Option<RedditRecord> {
    let obj = v.as_object()?;
    let string = |key: &str| -> Option<String> {
        match obj.get(key)? {
            Value::String(s) => Some(s.clone()),
            Value::Null => None,
            other => Some(other.to_string()),
        }
    };
    let integer = |key: &str| -> Option<i64> {
        match obj.get(key)? {
            Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f as i64)),
            Value::String(s) => s
                .parse::<i64>()
                .ok()
                .or_else(|| s.parse::<f64>().ok().map(|f| f as i64)),
            _ => None,
        }
    };

    let id = string(&schema.id)?;
    let created_utc = integer(&schema.created_utc)?;
    if id.is_empty() || created_utc <= 0 {
        return None;
    }
    let title = string(&schema.title);
    let body = string(&schema.body);
    let kind = if title.is_some() {
        RecordKind::Submission
    } else if body.is_some() {
        RecordKind::Comment
    } else {
        return None;
    };
    Some(RedditRecord {
        id,
        author: string(&schema.author).unwrap_or_default(),
        subreddit: string(&schema.subreddit).unwrap_or_default(),
        created_utc,
        kind,
        title,
        selftext: string(&schema.selftext),
        body,
        score: integer(&schema.score).unwrap_or(0),
        url: string(&schema.url),
        distinguished: string(&schema.distinguished),
    })
}

fn is_sentinel(s: &str) -> bool {
    DELETION_SENTINELS.contains(&s.trim())
}

/// Drops deleted/removed records and duplicate ids (first occurrence wins).
pub fn clean(records: Vec<RedditRecord>) -> Vec<RedditRecord> {
    let mut seen = HashSet::with_capacity(records.len());
    records
        .into_iter()
        .filter(|r| !is_sentinel(&r.author) && !r.main_text().is_some_and(is_sentinel))
        .filter(|r| seen.insert(r.id.clone()))
        .collect()
}

/// Text types: link-post titles, selfpost titles, selfpost bodies, comments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextType {
    Rpost,
    Rstitle,
    Rstext,
    Rcomm,
}

impl TextType {
    pub const ALL: [TextType; 4] = [Self::Rpost, Self::Rstitle, Self::Rstext, Self::Rcomm];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rpost => "rpost",
            Self::Rstitle => "rstitle",
            Self::Rstext => "rstext",
            Self::Rcomm => "rcomm",
        }
    }
}

impl fmt::Display for TextType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TextType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s.trim())
            .ok_or_else(|| Error::Validation(format!("unknown text type {s:?}")))
    }
}

/// One piece of text with its community and temporal metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextUnit {
    pub record_id: String,
    pub community: String,
    pub text_type: TextType,
    pub text: String,
    pub created_utc: i64,
    pub author: String,
    pub score: i64,
    /// Set when the originating record is moderator-distinguished.
    #[serde(default)]
    pub moderator: bool,
}

impl TextUnit {
    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

/// Splits a cleaned record into typed text units.
///
/// Selfposts (non-empty selftext) yield a title unit and a body unit. Every
/// other submission, with or without an external url, yields a single
/// link-post title unit. Units whose text is blank are not emitted.
pub fn derive_text_units(record: &RedditRecord) -> Vec<TextUnit> {
    let unit = |text_type, text: &str| TextUnit {
        record_id: record.id.clone(),
        community: record.subreddit.clone(),
        text_type,
        text: text.to_string(),
        created_utc: record.created_utc,
        author: record.author.clone(),
        score: record.score,
        moderator: record.is_moderator(),
    };
    let mut out = Vec::with_capacity(2);
    match record.kind {
        RecordKind::Comment => out.push(unit(TextType::Rcomm, record.body.as_deref().unwrap_or(""))),
        RecordKind::Submission => {
            let title = record.title.as_deref().unwrap_or("");
            match record.selftext.as_deref() {
                Some(body) if !body.trim().is_empty() => {
                    out.push(unit(TextType::Rstitle, title));
                    out.push(unit(TextType::Rstext, body));
                }
                _ => out.push(unit(TextType::Rpost, title)),
            }
        }
    }
    out.retain(|u| !u.text.trim().is_empty());
    out
}

/// Type-token ratio: distinct tokens over total tokens.
pub fn ttr<S: AsRef<str>>(tokens: &[S]) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::UndefinedInput("type-token ratio of an empty sequence"));
    }
    let types: HashSet<&str> = tokens.iter().map(AsRef::as_ref).collect();
    Ok(types.len() as f64 / tokens.len() as f64)
}

/// Local hour (0..24) of a UTC timestamp under a fixed whole-hour offset.
pub fn local_hour(created_utc: i64, utc_offset_hours: i32) -> u32 {
    (created_utc.div_euclid(3600) + i64::from(utc_offset_hours)).rem_euclid(24) as u32
}

/// Share of units falling in each local hour.
pub fn hourly_profile(units: &[TextUnit], utc_offset_hours: i32) -> Result<[f64; 24]> {
    if units.is_empty() {
        return Err(Error::UndefinedInput("hourly profile of no units"));
    }
    let mut bins = [0usize; 24];
    for u in units {
        bins[local_hour(u.created_utc, utc_offset_hours) as usize] += 1;
    }
    let total = units.len() as f64;
    Ok(bins.map(|c| c as f64 / total))
}

/// Removes units by moderators or by authors whose name contains any of the
/// patterns (case-insensitive substring match, so "Robotham" matches "bot").
pub fn filter_authors<S: AsRef<str>>(units: Vec<TextUnit>, patterns: &[S]) -> Vec<TextUnit> {
    let patterns: Vec<String> = patterns
        .iter()
        .map(|p| p.as_ref().to_lowercase())
        .filter(|p| !p.is_empty())
        .collect();
    units
        .into_iter()
        .filter(|u| {
            let author = u.author.to_lowercase();
            !u.moderator && !patterns.iter().any(|p| author.contains(p.as_str()))
        })
        .collect()
}

/// Keeps units whose local hour h satisfies `start <= h < end`.
pub fn filter_local_hours(
    units: Vec<TextUnit>,
    start_hour: u32,
    end_hour: u32,
    utc_offset_hours: i32,
) -> Result<Vec<TextUnit>> {
    if start_hour >= end_hour || end_hour > 24 {
        return Err(Error::Validation(format!(
            "invalid hour window [{start_hour}, {end_hour})"
        )));
    }
    Ok(units
        .into_iter()
        .filter(|u| {
            let h = local_hour(u.created_utc, utc_offset_hours);
            h >= start_hour && h < end_hour
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub community: String,
    pub text_type: TextType,
    pub n: usize,
    pub words: usize,
    pub mean: f64,
    pub max: usize,
    pub ttr: f64,
}

/// Per community and text type: observation count, word totals and TTR.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStats {
    pub rows: Vec<StatsRow>,
}

impl CorpusStats {
    pub fn compute(units: &[TextUnit]) -> Self {
        #[derive(Default)]
        struct Acc {
            n: usize,
            words: usize,
            max: usize,
            types: BTreeSet<String>,
        }
        let mut cells: BTreeMap<(String, TextType), Acc> = BTreeMap::new();
        for u in units {
            let tokens = textprep::tokenize(&u.text.to_lowercase()).tokens;
            let acc = cells.entry((u.community.clone(), u.text_type)).or_default();
            acc.n += 1;
            acc.words += tokens.len();
            acc.max = acc.max.max(tokens.len());
            acc.types.extend(tokens);
        }
        let rows = cells
            .into_iter()
            .map(|((community, text_type), acc)| StatsRow {
                community,
                text_type,
                n: acc.n,
                words: acc.words,
                mean: acc.words as f64 / acc.n as f64,
                max: acc.max,
                ttr: if acc.words == 0 {
                    0.0
                } else {
                    acc.types.len() as f64 / acc.words as f64
                },
            })
            .collect();
        Self { rows }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["community", "text_type", "n", "words", "mean", "max", "ttr"])?;
        for r in &self.rows {
            w.write_record([
                r.community.clone(),
                r.text_type.to_string(),
                r.n.to_string(),
                r.words.to_string(),
                format!("{:.4}", r.mean),
                r.max.to_string(),
                format!("{:.6}", r.ttr),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads every line of a plain or compressed file into memory.
pub fn read_to_string(path: impl AsRef<Path>) -> Result<String> {
    let mut s = String::new();
    open_input(path)?.read_to_string(&mut s)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comment(id: &str, author: &str, body: &str, ts: i64) -> RedditRecord {
        RedditRecord {
            id: id.into(),
            author: author.into(),
            subreddit: "newzealand".into(),
            created_utc: ts,
            kind: RecordKind::Comment,
            title: None,
            selftext: None,
            body: Some(body.into()),
            score: 1,
            url: None,
            distinguished: None,
        }
    }

    fn submission(id: &str, title: &str, selftext: Option<&str>, url: Option<&str>) -> RedditRecord {
        RedditRecord {
            id: id.into(),
            author: "a".into(),
            subreddit: "newzealand".into(),
            created_utc: 1_600_000_000,
            kind: RecordKind::Submission,
            title: Some(title.into()),
            selftext: selftext.map(Into::into),
            body: None,
            score: 3,
            url: url.map(Into::into),
            distinguished: None,
        }
    }

    fn unit_at(ts: i64) -> TextUnit {
        TextUnit {
            record_id: ts.to_string(),
            community: "c".into(),
            text_type: TextType::Rcomm,
            text: "x".into(),
            created_utc: ts,
            author: "u".into(),
            score: 0,
            moderator: false,
        }
    }

    #[test]
    fn ingest_counts_valid_lines() {
        let data = r#"{"id":"a","author":"x","subreddit":"nz","created_utc":1600000000,"body":"hi","score":2}
{"id":"b","author":"y","subreddit":"nz","created_utc":"1600000001","title":"t","selftext":"","url":"https://e.x"}
{"id":"c","author":"z","subreddit":"nz","created_utc":1600000002.0,"body":"yo","extra":[1,2]}
"#;
        let got = ingest(data.as_bytes(), &Schema::default()).unwrap();
        assert_eq!(got.records.len(), 3);
        assert_eq!(got.skipped, 0);
        assert_eq!(got.records[1].kind, RecordKind::Submission);
        assert_eq!(got.records[1].created_utc, 1_600_000_001);
    }

    #[test]
    fn ingest_skips_malformed() {
        let data = "{\"id\":\"a\",\"created_utc\":5,\"body\":\"x\"}\nnot json\n{\"id\":\"b\",\"created_utc\":6,\"body\":\"y\"}\n";
        let got = ingest(data.as_bytes(), &Schema::default()).unwrap();
        assert_eq!((got.records.len(), got.skipped), (2, 1));
    }

    #[test]
    fn ingest_rejects_mostly_malformed() {
        let data = "{\"id\":\"a\",\"created_utc\":5,\"body\":\"x\"}\nnope\n{}\n";
        assert!(matches!(
            ingest(data.as_bytes(), &Schema::default()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn ingest_respects_schema_map() {
        let schema = Schema {
            id: "name".into(),
            created_utc: "ts".into(),
            body: "text".into(),
            ..Schema::default()
        };
        let got = ingest(r#"{"name":"q","ts":10,"text":"hello"}"#.as_bytes(), &schema).unwrap();
        assert_eq!(got.records[0].id, "q");
        assert_eq!(got.records[0].body.as_deref(), Some("hello"));
    }

    #[test]
    fn invalid_records_are_malformed() {
        // empty id, non-positive timestamp, neither title nor body
        let data = "{\"id\":\"\",\"created_utc\":5,\"body\":\"x\"}\n{\"id\":\"a\",\"created_utc\":0,\"body\":\"x\"}\n{\"id\":\"b\",\"created_utc\":5}\n{\"id\":\"c\",\"created_utc\":5,\"body\":\"ok\"}\n{\"id\":\"d\",\"created_utc\":5,\"body\":\"ok\"}\n{\"id\":\"e\",\"created_utc\":5,\"body\":\"ok\"}\n";
        let got = ingest(data.as_bytes(), &Schema::default()).unwrap();
        assert_eq!((got.records.len(), got.skipped), (3, 3));
    }

    #[test]
    fn clean_drops_sentinels_and_duplicates() {
        let recs = vec![
            comment("1", "a", "hello", 10),
            comment("2", "[deleted]", "hello", 10),
            comment("3", "b", "[removed]", 10),
            comment("1", "c", "again", 11),
            comment("4", "d", "fine", 12),
        ];
        let ids: Vec<_> = clean(recs).into_iter().map(|r| (r.id, r.author)).collect();
        assert_eq!(
            ids,
            vec![("1".to_string(), "a".to_string()), ("4".into(), "d".into())]
        );
    }

    #[test]
    fn clean_is_identity_without_noise() {
        let recs = vec![comment("1", "a", "x", 1), comment("2", "b", "y", 2)];
        assert_eq!(clean(recs.clone()), recs);
    }

    #[test]
    fn text_unit_derivation() {
        let c = derive_text_units(&comment("1", "a", "sweet as", 5));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].text_type, TextType::Rcomm);

        let link = derive_text_units(&submission("2", "a link", Some(""), Some("https://x.nz")));
        assert_eq!(link.iter().map(|u| u.text_type).collect::<Vec<_>>(), [TextType::Rpost]);

        let selfpost = derive_text_units(&submission("3", "title", Some("the body"), None));
        assert_eq!(
            selfpost.iter().map(|u| u.text_type).collect::<Vec<_>>(),
            [TextType::Rstitle, TextType::Rstext]
        );
        assert_eq!(selfpost[0].text, "title");
        assert_eq!(selfpost[1].text, "the body");

        let bare = derive_text_units(&submission("4", "title only", None, None));
        assert_eq!(bare[0].text_type, TextType::Rpost);
    }

    #[test]
    fn ttr_examples() {
        assert_eq!(ttr(&["a", "b", "c"]).unwrap(), 1.0);
        assert_eq!(ttr(&["a", "a", "a", "a"]).unwrap(), 0.25);
        assert!(ttr::<&str>(&[]).is_err());
    }

    #[test]
    fn noon_utc_is_midnight_nzst() {
        let noon = 1_356_998_400 + 12 * 3600; // 2013-01-01 12:00 UTC
        let p = hourly_profile(&[unit_at(noon)], 12).unwrap();
        assert_eq!(p[0], 1.0);
        assert_eq!(local_hour(noon, 0), 12);
    }

    #[test]
    fn negative_offsets_wrap() {
        assert_eq!(local_hour(0, -5), 19);
        assert_eq!(local_hour(-3600, 0), 23);
    }

    #[test]
    fn author_filter_is_substring_based() {
        let mk = |a: &str| TextUnit {
            author: a.into(),
            ..unit_at(1)
        };
        let units = vec![mk("spambot99"), mk("Robotham"), mk("kiwi_sam"), mk("SPAMMER")];
        let kept = filter_authors(units.clone(), &["spam", "bot"]);
        assert_eq!(kept.iter().map(|u| u.author.as_str()).collect::<Vec<_>>(), ["kiwi_sam"]);
        assert_eq!(filter_authors::<&str>(units.clone(), &[]), units);

        let mut m = mk("modperson");
        m.moderator = true;
        assert!(filter_authors::<&str>(vec![m], &[]).is_empty());
    }

    #[test]
    fn local_hour_window() {
        let units: Vec<_> = (0..48).map(|h| unit_at(h * 3600)).collect();
        assert_eq!(filter_local_hours(units.clone(), 6, 24, 0).unwrap().len(), 36);
        assert_eq!(filter_local_hours(units.clone(), 0, 24, 0).unwrap().len(), 48);
        // 15:00 UTC is 03:00 NZST
        let early = unit_at(15 * 3600);
        assert!(filter_local_hours(vec![early], 6, 24, 12).unwrap().is_empty());
        assert!(filter_local_hours(units, 6, 6, 0).is_err());
    }

    #[test]
    fn stats_csv_layout() {
        let mut units = derive_text_units(&comment("1", "a", "sweet as bro", 5));
        units.extend(derive_text_units(&comment("2", "b", "as as", 5)));
        let stats = CorpusStats::compute(&units);
        assert_eq!(stats.rows.len(), 1);
        let r = &stats.rows[0];
        assert_eq!((r.n, r.words, r.max), (2, 5, 3));
        assert!((r.ttr - 3.0 / 5.0).abs() < 1e-12);
        let mut buf = Vec::new();
        stats.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "community,text_type,n,words,mean,max,ttr\nnewzealand,rcomm,2,5,2.5000,3,0.600000\n"
        );
    }
}
