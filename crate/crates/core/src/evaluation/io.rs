use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnnotationRecord, EvalError};
use crate::models::{ClassLabel, Prediction};

/// A labeled pair for evaluation. Synthesized sample lines parse as these;
/// extra fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub id: String,
    pub src: String,
    pub tgt: String,
    pub tgt_lang: String,
    pub label: ClassLabel,
}

/// One line of predictions output: either a verdict or an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ClassLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictionRecord {
    pub fn ok(id: impl Into<String>, p: &Prediction) -> Self {
        PredictionRecord {
            id: id.into(),
            label: Some(p.label),
            probs: Some(p.probs),
            error: None,
        }
    }

    pub fn failed(id: impl Into<String>, error: impl Into<String>) -> Self {
        PredictionRecord {
            id: id.into(),
            label: None,
            probs: None,
            error: Some(error.into()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_mark(s: &str) -> Result<Option<ClassLabel>, String> {
    match s.trim() {
        "" => Ok(None),
        other => other.parse::<ClassLabel>().map(Some).map_err(|e| e.to_string()),
    }
}

/// Reads `pair_id,annotator_id,mark` rows; an empty mark is an abstention.
pub fn read_annotations<R: Read>(reader: R, origin: &str) -> Result<Vec<AnnotationRecord>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| EvalError::record(origin, 1, e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| EvalError::record(origin, 1, format!("missing column {name:?}")))
    };
    let (pi, ai, mi) = (col("pair_id")?, col("annotator_id")?, col("mark")?);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| EvalError::record(origin, line, e.to_string()))?;
        let get = |k: usize| row.get(k).unwrap_or("").to_string();
        let (pair_id, annotator_id) = (get(pi), get(ai));
        if pair_id.is_empty() || annotator_id.is_empty() {
            return Err(EvalError::record(origin, line, "empty pair_id or annotator_id"));
        }
        let mark = parse_mark(&get(mi)).map_err(|m| EvalError::record(origin, line, m))?;
        out.push(AnnotationRecord {
            pair_id,
            annotator_id,
            mark,
        });
    }
    Ok(out)
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>, EvalError> {
    let f = std::fs::File::open(path).map_err(io_err(path))?;
    read_annotations(f, &path.display().to_string())
}

pub fn write_annotations<W: Write>(writer: W, records: &[AnnotationRecord]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| EvalError::Config(e.to_string());
    w.write_record(["pair_id", "annotator_id", "mark"]).map_err(csv_err)?;
    for r in records {
        let mark = r.mark.map_or("", ClassLabel::as_str);
        w.write_record([r.pair_id.as_str(), r.annotator_id.as_str(), mark])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|source| EvalError::Io {
        path: "<annotations>".into(),
        source,
    })
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, EvalError> {
    let f = std::fs::File::open(path).map_err(io_err(path))?;
    let origin = path.display().to_string();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| EvalError::record(&origin, i + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), EvalError> {
    let mut buf = Vec::new();
    for it in items {
        serde_json::to_writer(&mut buf, it).expect("record serializes");
        buf.push(b'\n');
    }
    std::fs::write(path, buf).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotations_round_trip_with_abstentions() {
        let recs = vec![
            AnnotationRecord::new("p1", "a", Some(ClassLabel::Ne)),
            AnnotationRecord::new("p1", "b", None),
            AnnotationRecord::new("p,2", "c", Some(ClassLabel::Ut)),
        ];
        let mut buf = Vec::new();
        write_annotations(&mut buf, &recs).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("pair_id,annotator_id,mark\n"));
        assert_eq!(read_annotations(buf.as_slice(), "mem").unwrap(), recs);
    }

    #[test]
    fn bad_mark_names_the_line() {
        let csv = "pair_id,annotator_id,mark\np,a,NE\np,b,maybe\n";
        let err = read_annotations(csv.as_bytes(), "x.csv").unwrap_err().to_string();
        assert!(err.contains("x.csv") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn prediction_lines() {
        let p = Prediction {
            label: ClassLabel::Ut,
            probs: [0.1, 0.2, 0.7],
        };
        let line = serde_json::to_string(&PredictionRecord::ok("x", &p)).unwrap();
        assert_eq!(line, r#"{"id":"x","label":"UT","probs":[0.1,0.2,0.7]}"#);
        let err = serde_json::to_string(&PredictionRecord::failed("y", "too long")).unwrap();
        assert_eq!(err, r#"{"id":"y","error":"too long"}"#);
    }
}
