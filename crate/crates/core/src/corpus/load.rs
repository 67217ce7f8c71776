use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use super::{CorpusError, SubtitlePair, SOURCE_LANG};

/// Input layouts accepted by [`load_corpus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON object per line: `{"id"?, "src", "tgt", "src_lang"?, "tgt_lang"}`.
    Jsonl,
    /// Two SubRip files aligned by cue ordinal; the loaded path is the
    /// English source file.
    SrtPair { target: PathBuf, tgt_lang: String },
}

/// Streaming reader over a corpus. Record errors are yielded in place and
/// the stream continues; a fatal error ends it.
pub struct CorpusReader {
    inner: Box<dyn Iterator<Item = Result<SubtitlePair, CorpusError>> + Send>,
    done: bool,
}

impl Iterator for CorpusReader {
    type Item = Result<SubtitlePair, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.inner.next();
        if matches!(&item, Some(Err(e)) if e.is_fatal()) {
            self.done = true;
        }
        item
    }
}

pub fn load_corpus(path: &Path, format: &CorpusFormat) -> Result<CorpusReader, CorpusError> {
    match format {
        CorpusFormat::Jsonl => load_jsonl(path),
        CorpusFormat::SrtPair { target, tgt_lang } => load_srt_pair(path, target, tgt_lang),
    }
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn io_error(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_jsonl(path: &Path) -> Result<CorpusReader, CorpusError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let label = file_label(path);
    let display = path.display().to_string();
    let path_buf = path.to_path_buf();
    let lines = BufReader::new(file).lines().enumerate();
    let inner = lines.filter_map(move |(idx, line)| {
        let line_no = idx + 1;
        match line {
            Err(e) => Some(Err(io_error(&path_buf, e))),
            Ok(line) if line.trim().is_empty() => None,
            Ok(line) => Some(parse_jsonl_record(&line, &label, line_no).map_err(|message| {
                CorpusError::Record {
                    path: display.clone(),
                    line: line_no,
                    message,
                }
            })),
        }
    });
    Ok(CorpusReader {
        inner: Box::new(inner),
        done: false,
    })
}

fn take_string(obj: &mut Map<String, Value>, key: &str) -> Result<Option<String>, String> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(format!("field {key} is not a string")),
    }
}

fn parse_jsonl_record(line: &str, label: &str, line_no: usize) -> Result<SubtitlePair, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON ({e})"))?;
    let Value::Object(mut obj) = value else {
        return Err("record is not a JSON object".to_string());
    };
    let id = take_string(&mut obj, "id")?.unwrap_or_else(|| format!("{label}:{line_no}"));
    let src = take_string(&mut obj, "src")?.ok_or("missing field src")?;
    let tgt = take_string(&mut obj, "tgt")?.ok_or("missing field tgt")?;
    let src_lang = take_string(&mut obj, "src_lang")?.unwrap_or_else(|| SOURCE_LANG.to_string());
    let tgt_lang = take_string(&mut obj, "tgt_lang")?.ok_or("missing field tgt_lang")?;
    if src.trim().is_empty() {
        return Err("empty field src".to_string());
    }
    if tgt.trim().is_empty() {
        return Err("empty field tgt".to_string());
    }
    Ok(SubtitlePair {
        id,
        source_text: src,
        target_text: tgt,
        src_lang,
        tgt_lang,
        extra: obj,
    })
}

/// One SubRip cue. `text` joins the cue's lines with single spaces and has
/// formatting tags removed.
#[derive(Debug, Clone, PartialEq)]
pub struct SrtCue {
    pub ordinal: usize,
    pub line: usize,
    pub text: String,
}

/// Parses SubRip content into cues. A malformed block is returned as an
/// `Err((line, message))` in its ordinal slot.
pub fn parse_srt(content: &str) -> Vec<Result<SrtCue, (usize, String)>> {
    let content = content.trim_start_matches('\u{feff}');
    let mut blocks: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut current: Option<(usize, Vec<&str>)> = None;
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(block) = current.take() {
                blocks.push(block);
            }
        } else {
            current.get_or_insert_with(|| (idx + 1, Vec::new())).1.push(line);
        }
    }
    blocks.extend(current);

    blocks
        .into_iter()
        .enumerate()
        .map(|(i, (line, lines))| {
            let index_ok = lines[0].trim().parse::<usize>().is_ok();
            let timing_ok = lines.get(1).is_some_and(|l| l.contains("-->"));
            if !index_ok || !timing_ok {
                return Err((line, "malformed cue header".to_string()));
            }
            let text = lines[2..]
                .iter()
                .map(|l| strip_tags(l))
                .collect::<Vec<_>>()
                .join(" ");
            let text = super::normalize_whitespace(&text);
            if text.is_empty() {
                return Err((line, "empty cue text".to_string()));
            }
            Ok(SrtCue {
                ordinal: i + 1,
                line,
                text,
            })
        })
        .collect()
}

/// Removes `<i>`-style and `{\an8}`-style markup.
fn strip_tags(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut depth: Option<char> = None;
    for c in line.chars() {
        match (depth, c) {
            (None, '<') => depth = Some('>'),
            (None, '{') => depth = Some('}'),
            (Some(close), c) if c == close => depth = None,
            (Some(_), _) => {}
            (None, c) => out.push(c),
        }
    }
    out
}

pub fn load_srt_pair(source: &Path, target: &Path, tgt_lang: &str) -> Result<CorpusReader, CorpusError> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| io_error(p, e));
    let src_cues = parse_srt(&read(source)?);
    let tgt_cues = parse_srt(&read(target)?);
    if src_cues.len() != tgt_cues.len() {
        return Err(CorpusError::CueCountMismatch {
            source_path: source.display().to_string(),
            source_count: src_cues.len(),
            target_path: target.display().to_string(),
            target_count: tgt_cues.len(),
        });
    }
    let label = file_label(source);
    let src_display = source.display().to_string();
    let tgt_display = target.display().to_string();
    let tgt_lang = tgt_lang.to_string();
    let records: Vec<_> = src_cues
        .into_iter()
        .zip(tgt_cues)
        .map(|(s, t)| match (s, t) {
            (Ok(s), Ok(t)) => Ok(SubtitlePair {
                id: format!("{label}:{}", s.line),
                source_text: s.text,
                target_text: t.text,
                src_lang: SOURCE_LANG.to_string(),
                tgt_lang: tgt_lang.clone(),
                extra: Map::new(),
            }),
            (Err((line, message)), _) => Err(CorpusError::Record {
                path: src_display.clone(),
                line,
                message,
            }),
            (_, Err((line, message))) => Err(CorpusError::Record {
                path: tgt_display.clone(),
                line,
                message,
            }),
        })
        .collect();
    Ok(CorpusReader {
        inner: Box::new(records.into_iter()),
        done: false,
    })
}
