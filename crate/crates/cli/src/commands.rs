use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::{info, warn};
use otut_core::corpus::{load_corpus, seed_filter, CorpusError, CorpusFormat, FilterDecision};
use otut_core::encoders::EncoderBundle;
use otut_core::evaluation::{
    collate_unanimous, load_annotations, per_language_report, read_jsonl, EvalItem, GoldRecord, PredictionRecord,
};
use otut_core::models::{build_head, predict_many, train, Arch, Checkpoint, Head};
use otut_core::synthesis::{assemble_dataset, LabeledSample, SampleRecord};
use otut_core::{ClassLabel, SubtitlePair};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{resolve, PipelineConfig};
use crate::manifest::{jsonl, pretty, RunManifest};

pub const TRAIN_FILE: &str = "train.jsonl";
pub const VALIDATION_FILE: &str = "validation.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

/// Reads a whole corpus. Malformed records are returned separately; a
/// fatal error aborts before anything is written.
fn read_corpus(path: &Path, format: &CorpusFormat) -> anyhow::Result<(Vec<SubtitlePair>, Vec<CorpusError>)> {
    let mut pairs = Vec::new();
    let mut bad = Vec::new();
    for item in load_corpus(path, format)? {
        match item {
            Ok(p) => pairs.push(p),
            Err(e) if e.is_fatal() => return Err(e.into()),
            Err(e) => {
                warn!("{e}");
                bad.push(e);
            }
        }
    }
    Ok((pairs, bad))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn build_bundle(cfg: &PipelineConfig, mask_corpus: Option<&[otut_core::TokenSequence]>) -> anyhow::Result<EncoderBundle> {
    cfg.encoder.build(mask_corpus).context("cannot build encoders")
}

pub struct FilterArgs {
    pub input: Option<PathBuf>,
    pub srt_target: Option<PathBuf>,
    pub tgt_lang: Option<String>,
    pub out: PathBuf,
}

pub fn filter(cfg: &PipelineConfig, args: FilterArgs) -> anyhow::Result<()> {
    let input = resolve(args.input, &cfg.paths.corpus, "input")?;
    let format = match (args.srt_target, args.tgt_lang) {
        (None, _) => CorpusFormat::Jsonl,
        (Some(target), Some(tgt_lang)) => CorpusFormat::SrtPair { target, tgt_lang },
        (Some(_), None) => return Err(crate::UsageError("--srt-target needs --tgt-lang".into()).into()),
    };
    let (pairs, bad) = read_corpus(&input, &format)?;
    let bundle = build_bundle(cfg, None)?;
    let decisions: Vec<FilterDecision> = pairs
        .par_iter()
        .map(|p| seed_filter(p, &cfg.filter, bundle.xsim.as_ref()))
        .collect::<Result<_, _>>()?;

    let mut accepted = Vec::new();
    let mut log_lines = Vec::new();
    let mut by_reason: BTreeMap<String, usize> = BTreeMap::new();
    for e in &bad {
        log_lines.push(json!({"id": null, "reason": "malformed", "detail": e.to_string()}));
        *by_reason.entry("malformed".into()).or_default() += 1;
    }
    for (p, d) in pairs.iter().zip(&decisions) {
        match d {
            FilterDecision::Accept { .. } => accepted.push(p),
            FilterDecision::Reject { reason, detail } => {
                log_lines.push(json!({"id": p.id, "reason": reason, "detail": detail}));
                *by_reason.entry(reason.to_string()).or_default() += 1;
            }
        }
    }
    info!("filter: {} accepted, {} rejected", accepted.len(), log_lines.len());

    create_dir(&args.out)?;
    let mut m = RunManifest::new("filter", cfg.hash());
    m.input("corpus", &input)?;
    if let CorpusFormat::SrtPair { target, .. } = &format {
        m.input("target", target)?;
    }
    m.encoder_fingerprint = Some(bundle.fingerprint());
    m.output(&args.out, "accepted.jsonl", &jsonl(&accepted))?;
    m.output(&args.out, "rejected.jsonl", &jsonl(&log_lines))?;
    m.details = json!({
        "read": pairs.len() + bad.len(),
        "accepted": accepted.len(),
        "rejected": by_reason,
    });
    m.finish(&args.out)
}

pub fn synthesize(cfg: &PipelineConfig, input: Option<PathBuf>, out: PathBuf) -> anyhow::Result<()> {
    let input = resolve(input, &cfg.paths.corpus, "input")?;
    let (pairs, bad) = read_corpus(&input, &CorpusFormat::Jsonl)?;
    if !bad.is_empty() {
        warn!("skipped {} malformed records", bad.len());
    }
    let sources: Vec<_> = pairs.iter().map(SubtitlePair::source_tokens).collect();
    let bundle = build_bundle(cfg, Some(&sources))?;
    let ds = assemble_dataset(pairs, &bundle, &cfg.synthesis)?;
    info!("synthesize: {} train, {} validation", ds.train.len(), ds.validation.len());

    create_dir(&out)?;
    let mut m = RunManifest::new("synthesize", cfg.hash());
    m.input("corpus", &input)?;
    m.seed = Some(cfg.synthesis.seed);
    m.encoder_fingerprint = Some(bundle.fingerprint());
    m.output(&out, TRAIN_FILE, &jsonl(ds.train.iter().map(LabeledSample::to_record)))?;
    m.output(&out, VALIDATION_FILE, &jsonl(ds.validation.iter().map(LabeledSample::to_record)))?;
    m.details = serde_json::to_value(&ds.manifest)?;
    m.finish(&out)
}

fn read_samples(path: &Path) -> anyhow::Result<Vec<LabeledSample>> {
    let recs: Vec<SampleRecord> = read_jsonl(path)?;
    Ok(recs.into_iter().map(LabeledSample::from).collect())
}

pub fn train_cmd(cfg: &PipelineConfig, dataset: Option<PathBuf>, out: Option<PathBuf>) -> anyhow::Result<()> {
    let dataset = resolve(dataset, &cfg.paths.dataset, "dataset")?;
    let out = resolve(out, &cfg.paths.checkpoint, "out")?;
    let (tr_path, va_path) = (dataset.join(TRAIN_FILE), dataset.join(VALIDATION_FILE));
    let train_set = read_samples(&tr_path)?;
    let validation_set = read_samples(&va_path)?;
    let bundle = build_bundle(cfg, None)?;
    let head = build_head(&cfg.head, bundle.contextual.dim(), cfg.train.seed)?;
    info!(
        "train: {} head, {} parameters, {} train / {} validation samples",
        head.arch(),
        head.param_count(),
        train_set.len(),
        validation_set.len()
    );
    let (head, history) = train(head, &train_set, &validation_set, &bundle, &cfg.train)?;
    let ckpt = Checkpoint::from_head(&head, &bundle.fingerprint())?;

    create_dir(&out)?;
    let mut m = RunManifest::new("train", cfg.hash());
    m.input("train", &tr_path)?;
    m.input("validation", &va_path)?;
    m.seed = Some(cfg.train.seed);
    m.encoder_fingerprint = Some(bundle.fingerprint());
    m.output(&out, CHECKPOINT_FILE, &pretty(&ckpt))?;
    m.output(&out, "history.json", &pretty(&history))?;
    let last = history.epochs.last().expect("at least one epoch");
    m.details = json!({
        "arch": head.arch(),
        "epochs_run": history.epochs.len(),
        "best_epoch": history.best_epoch,
        "best_validation_accuracy": history.best_validation_accuracy,
        "final_train_accuracy": last.train_accuracy,
        "stopped_early": history.stopped_early,
        "loss_weights": history.loss_weights,
    });
    m.finish(&out)
}

/// Loads a checkpoint against the configured encoders, refusing a
/// fingerprint mismatch.
fn load_model(cfg: &PipelineConfig, checkpoint: &Path) -> anyhow::Result<(Head, EncoderBundle)> {
    let bundle = build_bundle(cfg, None)?;
    let ckpt = Checkpoint::load(checkpoint)?;
    let head = ckpt.into_head(&bundle.fingerprint())?;
    Ok((head, bundle))
}

fn checkpoint_path(cfg: &PipelineConfig, flag: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    let p = resolve(flag, &cfg.paths.checkpoint, "checkpoint")?;
    Ok(if p.is_dir() { p.join(CHECKPOINT_FILE) } else { p })
}

pub struct EvaluateArgs {
    pub checkpoint: Option<PathBuf>,
    pub input: PathBuf,
    pub annotations: Option<PathBuf>,
    pub annotators: usize,
    pub out: Option<PathBuf>,
}

pub fn evaluate(cfg: &PipelineConfig, args: EvaluateArgs) -> anyhow::Result<()> {
    let ckpt_path = checkpoint_path(cfg, args.checkpoint)?;
    let out = resolve(args.out, &cfg.paths.reports, "out")?;
    let (head, bundle) = load_model(cfg, &ckpt_path)?;

    let mut warnings = Vec::new();
    let gold: Vec<(SubtitlePair, ClassLabel)> = match &args.annotations {
        None => read_jsonl::<GoldRecord>(&args.input)?
            .into_iter()
            .map(|r| (SubtitlePair::new(r.id, r.src, r.tgt, r.tgt_lang), r.label))
            .collect(),
        Some(ann) => {
            let collation = collate_unanimous(&load_annotations(ann)?, args.annotators)?;
            info!(
                "collate: {} unanimous, {} excluded",
                collation.included.len(),
                collation.excluded.len()
            );
            let (pairs, bad) = read_corpus(&args.input, &CorpusFormat::Jsonl)?;
            warnings.extend(bad.iter().map(ToString::to_string));
            let mut by_id: HashMap<String, SubtitlePair> = pairs.into_iter().map(|p| (p.id.clone(), p)).collect();
            let mut out = Vec::new();
            for (id, label) in collation.included {
                match by_id.remove(&id) {
                    Some(p) => out.push((p, label)),
                    None => warnings.push(format!("annotated pair {id:?} not found in input")),
                }
            }
            out
        }
    };
    if gold.is_empty() {
        bail!("no labeled pairs to evaluate in {}", args.input.display());
    }
    let pairs: Vec<SubtitlePair> = gold.iter().map(|(p, _)| p.clone()).collect();
    let preds = predict_many(&head, &pairs, &bundle);

    let mut items = Vec::with_capacity(gold.len());
    let mut lines = Vec::with_capacity(gold.len());
    for ((pair, label), pred) in gold.iter().zip(&preds) {
        match pred {
            Ok(p) => {
                items.push(EvalItem {
                    tgt_lang: pair.tgt_lang.clone(),
                    gold: *label,
                    pred: p.label,
                });
                lines.push(PredictionRecord::ok(&pair.id, p));
            }
            Err(e) => {
                warnings.push(format!("{}: {e}", pair.id));
                lines.push(PredictionRecord::failed(&pair.id, e.to_string()));
            }
        }
    }
    let mut report = per_language_report(&items)?;
    report.warnings.splice(0..0, warnings);
    for w in &report.warnings {
        warn!("{w}");
    }
    let table = report.to_table();
    print!("{table}");

    create_dir(&out)?;
    let mut m = RunManifest::new("evaluate", cfg.hash());
    m.input("checkpoint", &ckpt_path)?;
    m.input("eval", &args.input)?;
    if let Some(a) = &args.annotations {
        m.input("annotations", a)?;
    }
    m.encoder_fingerprint = Some(bundle.fingerprint());
    m.output(&out, "predictions.jsonl", &jsonl(&lines))?;
    m.output(&out, "report.json", &pretty(&report))?;
    m.output(&out, "report.txt", table.as_bytes())?;
    m.details = json!({
        "arch": head.arch(),
        "evaluated": items.len(),
        "failed": lines.len() - items.len(),
        "accuracy": report.pooled.accuracy,
        "weighted_f1": report.pooled.weighted_f1,
        "error_recall": report.pooled.error_recall,
    });
    m.finish(&out)
}

pub fn flag(cfg: &PipelineConfig, checkpoint: Option<PathBuf>, input: PathBuf, out: PathBuf) -> anyhow::Result<()> {
    let ckpt_path = checkpoint_path(cfg, checkpoint)?;
    let (head, bundle) = load_model(cfg, &ckpt_path)?;
    let mut records: Vec<Result<SubtitlePair, CorpusError>> = Vec::new();
    for item in load_corpus(&input, &CorpusFormat::Jsonl)? {
        if let Err(e) = &item {
            if e.is_fatal() {
                bail!("{e}");
            }
        }
        records.push(item);
    }
    let lines: Vec<PredictionRecord> = records
        .par_iter()
        .map(|r| match r {
            Ok(p) => match otut_core::models::predict(&head, p, &bundle) {
                Ok(pred) => PredictionRecord::ok(&p.id, &pred),
                Err(e) => PredictionRecord::failed(&p.id, e.to_string()),
            },
            Err(e @ CorpusError::Record { line, .. }) => PredictionRecord::failed(format!("line-{line}"), e.to_string()),
            Err(e) => PredictionRecord::failed("", e.to_string()),
        })
        .collect();
    let failed = lines.iter().filter(|l| l.error.is_some()).count();
    if failed > 0 {
        warn!("{failed} of {} records could not be scored", lines.len());
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &lines {
        *counts.entry(l.label.map_or("error", ClassLabel::as_str)).or_default() += 1;
    }

    create_dir(&out)?;
    let mut m = RunManifest::new("flag", cfg.hash());
    m.input("checkpoint", &ckpt_path)?;
    m.input("pairs", &input)?;
    m.encoder_fingerprint = Some(bundle.fingerprint());
    m.output(&out, "predictions.jsonl", &jsonl(&lines))?;
    m.details = json!({ "arch": head.arch(), "records": lines.len(), "by_label": counts });
    m.finish(&out)
}

pub fn collate(cfg: &PipelineConfig, annotations: PathBuf, annotators: usize, out: PathBuf) -> anyhow::Result<()> {
    let records = load_annotations(&annotations)?;
    let c = collate_unanimous(&records, annotators)?;
    let counts: BTreeMap<&str, usize> = ClassLabel::ALL.iter().map(|&l| (l.as_str(), c.count(l))).collect();
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for (_, r) in &c.excluded {
        *reasons.entry(r.to_string()).or_default() += 1;
    }
    println!(
        "{} pairs, {} unanimous ({} NE, {} OT, {} UT), {} excluded",
        c.included.len() + c.excluded.len(),
        c.included.len(),
        counts["NE"],
        counts["OT"],
        counts["UT"],
        c.excluded.len()
    );

    create_dir(&out)?;
    let mut m = RunManifest::new("collate", cfg.hash());
    m.input("annotations", &annotations)?;
    let included = c.included.iter().map(|(id, l)| json!({"id": id, "label": l}));
    let excluded = c.excluded.iter().map(|(id, r)| json!({"id": id, "reason": r}));
    m.output(&out, "collated.jsonl", &jsonl(included))?;
    m.output(&out, "excluded.jsonl", &jsonl(excluded))?;
    m.details = json!({
        "annotators_required": annotators,
        "records": records.len(),
        "unanimous": counts,
        "excluded": reasons,
    });
    m.finish(&out)
}

pub fn parse_arch(s: &str) -> Result<Arch, String> {
    s.parse::<Arch>().map_err(|e| e.to_string())
}
