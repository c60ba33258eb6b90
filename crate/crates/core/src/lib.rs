//! Dialect alignment toolkit: corpus ingestion, variant counting, sampling,
//! dialect classification, embeddings, diachronic drift, construction
//! grammar features and network statistics.

pub mod classify;
pub mod corpus;
pub mod cxg;
pub mod diachrone;
pub mod embed;
pub mod error;
pub mod netstats;
pub mod sampling;
pub mod synth;
pub mod textprep;
pub mod variables;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
