//! Text normalization, tokenization, gazetteer masking, phrase merging,
//! part-of-speech tagging and chunking.

mod chunk;
mod gazetteer;
mod normalize;
mod phrases;
mod tagger;
mod tokenize;

pub use chunk::chunk;
pub use gazetteer::{expand_macron_variants, mask_entities, EntityLabel, Gazetteer};
pub use normalize::normalize;
pub use phrases::{apply_phrases, learn_phrases, learn_phrases_pass, learn_phrases_two_pass, PhraseModel};
pub use tagger::{parse_tagged, pos_tag, suffix_rule, Tag, Tagger};
pub use tokenize::{is_stopword, light_lemma, tokenize, tokenize_with, TokenizeOptions, TokenizedDoc};
