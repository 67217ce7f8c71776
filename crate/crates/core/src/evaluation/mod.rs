//! Metrics, annotation collation and per-language reports.

mod collate;
mod io;
mod metrics;
mod report;

use thiserror::Error;

pub use collate::{collate_unanimous, AnnotationRecord, Collation, ExclusionReason};
pub use io::{
    load_annotations, read_annotations, read_jsonl, write_annotations, write_jsonl, GoldRecord, PredictionRecord,
};
pub use metrics::{accuracy, error_recall, weighted_f1, Confusion};
pub use report::{normalize_language, per_language_report, EvalItem, EvalReport, LanguageRow, OTHER_LANGUAGE, POOLED_ROW};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold has {gold} labels but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("no labels to evaluate")]
    Empty,
    #[error("error recall is undefined without gold OT/UT labels")]
    NoGoldErrors,
    #[error("pair {pair_id:?} annotated twice by {annotator_id:?}")]
    DuplicateAnnotation { pair_id: String, annotator_id: String },
    #[error("{0}")]
    Config(String),
    #[error("{path}: {message} at line {line}")]
    Record { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl EvalError {
    fn record(path: &str, line: usize, message: impl Into<String>) -> Self {
        EvalError::Record {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}
