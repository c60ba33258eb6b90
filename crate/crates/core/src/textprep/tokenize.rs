use serde::{Deserialize, Serialize};

use super::tagger::Tag;
use crate::corpus::TextUnit;

/// A token sequence with optional parallel POS tags and its source unit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub tokens: Vec<String>,
    pub tags: Option<Vec<Tag>>,
    pub origin: Option<TextUnit>,
}

impl TokenizedDoc {
    pub fn new(tokens: Vec<String>) -> Self {
        Self {
            tokens,
            tags: None,
            origin: None,
        }
    }

    pub fn with_origin(mut self, origin: TextUnit) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Replaces the tokens, dropping tags that no longer line up.
    pub fn map_tokens(self, tokens: Vec<String>) -> Self {
        let tags = self.tags.filter(|t| t.len() == tokens.len());
        Self {
            tokens,
            tags,
            origin: self.origin,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizeOptions {
    pub remove_stopwords: bool,
    pub lemmatize: bool,
}

/// Placeholder tokens emitted by entity masking pass through untouched.
const PLACEHOLDERS: [&str; 2] = ["<gpe>", "<loc>"];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || ('\u{0300}'..='\u{036F}').contains(&c)
}

/// Splits on whitespace and punctuation. Apostrophes and hyphens are kept
/// when they sit between word characters ("don't", "wash-cloth").
pub fn tokenize(text: &str) -> TokenizedDoc {
    tokenize_with(text, TokenizeOptions::default())
}

pub fn tokenize_with(text: &str, opts: TokenizeOptions) -> TokenizedDoc {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        if PLACEHOLDERS.contains(&chunk) {
            tokens.push(chunk.to_string());
            continue;
        }
        let chars: Vec<char> = chunk.chars().collect();
        let mut cur = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let joiner = (c == '\'' || c == '-')
                && !cur.is_empty()
                && chars.get(i + 1).is_some_and(|&n| is_word_char(n));
            if is_word_char(c) || joiner {
                cur.push(c);
            } else if !cur.is_empty() {
                tokens.push(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            tokens.push(cur);
        }
    }
    if opts.remove_stopwords {
        tokens.retain(|t| !is_stopword(t));
    }
    if opts.lemmatize {
        for t in &mut tokens {
            *t = light_lemma(t);
        }
    }
    TokenizedDoc::new(tokens)
}

const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Words the suffix rules must leave alone.
const LEMMA_EXCEPTIONS: &[&str] = &[
    "always", "anything", "bed", "bring", "building", "bus", "ceiling", "during", "evening",
    "everything", "feed", "gas", "has", "his", "hundred", "is", "king", "morning", "naked",
    "need", "news", "nothing", "red", "ring", "sacred", "seed", "series", "shed", "sing",
    "something", "species", "speed", "spring", "thing", "this", "was", "wedding", "wicked", "yes",
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Restores a stem after an -ing/-ed strip: undoubles a final consonant
/// ("runn" → "run") or re-adds a silent e to short CVC stems ("hik" → "hike").
fn repair_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if (3..=4).contains(&n)
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'w' | b'x' | b'y')
        && is_vowel(b[n - 2])
        && !is_vowel(b[n - 3])
    {
        return format!("{stem}e");
    }
    stem.to_string()
}

/// Light suffix normalization standing in for lemmatization: plural -s/-es
/// and -ing/-ed endings are stripped, subject to an exception list.
pub fn light_lemma(token: &str) -> String {
    if token.len() <= 3 || !token.is_ascii() || LEMMA_EXCEPTIONS.binary_search(&token).is_ok() {
        return token.to_string();
    }
    if let Some(stem) = token.strip_suffix("ies") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = token.strip_suffix("ing") {
        if stem.len() >= 3 && stem.bytes().any(is_vowel) {
            return repair_stem(stem);
        }
    }
    if let Some(stem) = token.strip_suffix("ed") {
        if stem.len() >= 3 && stem.bytes().any(is_vowel) {
            if let Some(base) = stem.strip_suffix('i') {
                return format!("{base}y");
            }
            return repair_stem(stem);
        }
    }
    for suffix in ["sses", "ches", "shes", "xes", "zes"] {
        if token.ends_with(suffix) {
            return token[..token.len() - 2].to_string();
        }
    }
    if token.ends_with('s') && !token.ends_with("ss") && !token.ends_with("us") && !token.ends_with("is") {
        return token[..token.len() - 1].to_string();
    }
    token.to_string()
}
