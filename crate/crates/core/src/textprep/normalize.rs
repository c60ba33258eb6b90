use std::sync::LazyLock;

use regex::Regex;

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(?:https?://|www\.)\S+").expect("valid url pattern"));

/// Letters of the Latin script, including precomposed diacritics and
/// combining marks. ASCII is handled separately.
fn is_latin_extended(c: char) -> bool {
    matches!(c,
        '\u{00C0}'..='\u{00D6}'
        | '\u{00D8}'..='\u{00F6}'
        | '\u{00F8}'..='\u{024F}'
        | '\u{0300}'..='\u{036F}'
        | '\u{1E00}'..='\u{1EFF}')
}

/// Lowercases text and strips urls, `u/` and `r/` references and any
/// character outside the Latin script. Diacritics such as macrons survive.
pub fn normalize(text: &str) -> String {
    let text = URL.replace_all(text, " ");
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        let bare = word.trim_start_matches('/');
        let lower = bare.to_lowercase();
        if lower.starts_with("u/") || lower.starts_with("r/") {
            continue;
        }
        let kept: String = word
            .chars()
            .map(|c| match c {
                '\u{2018}' | '\u{2019}' => '\'',
                _ => c,
            })
            .filter(|&c| (c.is_ascii() && !c.is_ascii_control()) || is_latin_extended(c))
            .flat_map(char::to_lowercase)
            .collect();
        if kept.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&kept);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_references_and_urls() {
        assert_eq!(
            normalize("Kia ora u/someone see r/chch https://x.y"),
            "kia ora see"
        );
        assert_eq!(normalize("check /r/newzealand and www.stuff.co.nz ok"), "check and ok");
    }

    #[test]
    fn keeps_macrons_drops_other_scripts() {
        assert_eq!(normalize("Ōtautahi"), "ōtautahi");
        assert_eq!(normalize("Māori café привет 你好 😀 done"), "māori café done");
    }

    #[test]
    fn empty_is_empty() {
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("   "), "");
    }

    #[test]
    fn curly_apostrophes_become_ascii() {
        assert_eq!(normalize("Don’t"), "don't");
    }
}
