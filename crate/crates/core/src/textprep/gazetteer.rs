use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityLabel {
    /// Geopolitical entity: countries, cities, towns.
    Gpe,
    /// Non-GPE location: parks, mountains, rivers.
    Loc,
}

impl EntityLabel {
    pub fn placeholder(self) -> &'static str {
        match self {
            Self::Gpe => "<gpe>",
            Self::Loc => "<loc>",
        }
    }
}

impl fmt::Display for EntityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gpe => "GPE",
            Self::Loc => "LOC",
        })
    }
}

/// A set of lowercase (possibly multi-word) place names sharing one label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gazetteer {
    entries: BTreeSet<Vec<String>>,
    label: EntityLabel,
    max_len: usize,
}

impl Gazetteer {
    /// Builds a gazetteer from raw names. Names are lowercased and tokenized
    /// the same way documents are, and each name also contributes its
    /// macron-free spelling.
    pub fn new<I, S>(names: I, label: EntityLabel) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut entries = BTreeSet::new();
        for name in names {
            for variant in expand_macron_variants(&name.as_ref().trim().to_lowercase()) {
                let toks = tokenize(&variant).tokens;
                if !toks.is_empty() {
                    entries.insert(toks);
                }
            }
        }
        if entries.is_empty() {
            return Err(Error::Validation("gazetteer has no entries".into()));
        }
        let max_len = entries.iter().map(Vec::len).max().unwrap_or(1);
        Ok(Self {
            entries,
            label,
            max_len,
        })
    }

    /// Reads a UTF-8 file with one name per line. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn from_reader<R: BufRead>(reader: R, label: EntityLabel) -> Result<Self> {
        let mut names = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                names.push(line.to_string());
            }
        }
        Self::new(names, label)
    }

    pub fn load(path: impl AsRef<Path>, label: EntityLabel) -> Result<Self> {
        Self::from_reader(std::io::BufReader::new(std::fs::File::open(path)?), label)
    }

    pub fn label(&self) -> EntityLabel {
        self.label
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn contains(&self, tokens: &[String]) -> bool {
        self.entries.contains(tokens)
    }
}

fn strip_macron(c: char) -> char {
    match c {
        'ā' => 'a',
        'ē' => 'e',
        'ī' => 'i',
        'ō' => 'o',
        'ū' => 'u',
        'Ā' => 'A',
        'Ē' => 'E',
        'Ī' => 'I',
        'Ō' => 'O',
        'Ū' => 'U',
        other => other,
    }
}

/// The name itself plus, when it carries macrons, its macron-free spelling.
pub fn expand_macron_variants(name: &str) -> BTreeSet<String> {
    let plain: String = name.chars().map(strip_macron).collect();
    BTreeSet::from([name.to_string(), plain])
}

/// Replaces gazetteer names with `<gpe>`/`<loc>` placeholders, scanning left
/// to right and preferring the longest match at each position. When two
/// gazetteers match the same span length, the earlier one in the slice wins.
pub fn mask_entities(tokens: &[String], gazetteers: &[Gazetteer]) -> Vec<String> {
    let max_len = gazetteers.iter().map(Gazetteer::max_len).max().unwrap_or(0);
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    'outer: while i < tokens.len() {
        let longest = max_len.min(tokens.len() - i);
        for len in (1..=longest).rev() {
            let span = &tokens[i..i + len];
            if let Some(g) = gazetteers.iter().find(|g| g.contains(span)) {
                out.push(g.label().placeholder().to_string());
                i += len;
                continue 'outer;
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn macron_variants() {
        assert_eq!(
            expand_macron_variants("ōtautahi"),
            BTreeSet::from(["ōtautahi".to_string(), "otautahi".to_string()])
        );
        assert_eq!(expand_macron_variants("dunedin"), BTreeSet::from(["dunedin".to_string()]));
        assert_eq!(
            expand_macron_variants("pāpāmoa"),
            BTreeSet::from(["pāpāmoa".to_string(), "papamoa".to_string()])
        );
    }

    #[test]
    fn masks_single_and_multiword() {
        let gpe = Gazetteer::new(["wellington", "palmerston north", "palmerston"], EntityLabel::Gpe).unwrap();
        assert_eq!(
            mask_entities(&t("i live in wellington"), std::slice::from_ref(&gpe)),
            t("i live in <gpe>")
        );
        assert_eq!(mask_entities(&t("palmerston north"), std::slice::from_ref(&gpe)), t("<gpe>"));
        assert_eq!(
            mask_entities(&t("palmerston is not palmerston north"), &[gpe]),
            t("<gpe> is not <gpe>")
        );
    }

    #[test]
    fn macron_free_spelling_is_masked() {
        let gpe = Gazetteer::new(["Ōtautahi"], EntityLabel::Gpe).unwrap();
        let loc = Gazetteer::new(["hagley park"], EntityLabel::Loc).unwrap();
        assert_eq!(
            mask_entities(&t("otautahi and ōtautahi near hagley park"), &[gpe, loc]),
            t("<gpe> and <gpe> near <loc>")
        );
    }

    #[test]
    fn empty_gazetteer_rejected() {
        assert!(Gazetteer::new(Vec::<String>::new(), EntityLabel::Gpe).is_err());
        assert!(Gazetteer::from_reader("# comment\n\n".as_bytes(), EntityLabel::Loc).is_err());
    }

    #[test]
    fn planted_names_all_masked() {
        // brute-force oracle: every planted position must end up as a placeholder
        let names = ["auckland", "new plymouth", "mount maunganui", "taupō", "hutt valley", "nelson"];
        let gpe = Gazetteer::new(names, EntityLabel::Gpe).unwrap();
        let filler = t("we went to the beach and then drove home past the shops");
        let mut doc = Vec::new();
        let mut planted = 0;
        for k in 0..12 {
            doc.extend(filler[..(k % filler.len()) + 1].iter().cloned());
            doc.extend(t(names[k % names.len()]));
            planted += 1;
        }
        let masked = mask_entities(&doc, &[gpe]);
        assert_eq!(masked.iter().filter(|x| *x == "<gpe>").count(), planted);
        let expected: Vec<String> = {
            let mut v = Vec::new();
            for k in 0..12 {
                v.extend(filler[..(k % filler.len()) + 1].iter().cloned());
                v.push("<gpe>".to_string());
            }
            v
        };
        assert_eq!(masked, expected);
    }

    proptest! {
        #[test]
        fn tokens_outside_gazetteer_untouched(words in proptest::collection::vec("[a-e]{1,3}", 0..40)) {
            let gpe = Gazetteer::new(["zz top", "qq"], EntityLabel::Gpe).unwrap();
            let toks: Vec<String> = words.clone();
            prop_assert_eq!(mask_entities(&toks, &[gpe]), toks);
        }
    }
}
