//! Detection of over-translation (OT) and under-translation (UT) in subtitle
//! translations without reference translations.
//!
//! The pipeline has four stages:
//!
//! * [`corpus`]: ingest parallel subtitle pairs and keep only clean seeds
//!   (length bounds plus cross-lingual similarity).
//! * [`synthesis`]: corrupt the English source side to create labelled
//!   OT/UT negatives, subtle (1 to 5 tokens) and gross (a whole sentence).
//! * [`models`]: sentence-pair classifier heads (GRU, GRU+CNN, CNN, hybrid)
//!   trained over frozen contextual token embeddings.
//! * [`evaluation`]: accuracy, weighted F1, error recall, annotation
//!   collation and per-language reports.
//!
//! All embedding backends live behind the traits in [`encoders`]. The
//! reference backends are deterministic and training-free so the whole
//! pipeline runs offline; [`desk`] generates synthetic corpora for them.

pub mod corpus;
pub mod desk;
pub mod encoders;
pub mod evaluation;
pub mod hashing;
pub mod models;
pub mod synthesis;

pub use corpus::{SubtitlePair, Token, TokenSequence};
pub use models::ClassLabel;

/// Version string written into every manifest.
pub const TOOL_VERSION: &str = concat!("otut ", env!("CARGO_PKG_VERSION"));
