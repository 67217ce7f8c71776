use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    make_gross, make_ot_subtle, make_ut_subtle, Granularity, GrossDirection, LabeledSample, SynthesisConfig,
    SynthesisError,
};
use crate::corpus::{split_sentences, SubtitlePair};
use crate::encoders::{cosine, sentence_vector, EncoderBundle, EncoderError};
use crate::hashing::{child_rng, derive_seed, sha256_hex};
use crate::models::ClassLabel;
use crate::TOOL_VERSION;

const DONOR_ATTEMPTS: usize = 8;

/// Sample counts per (label, granularity) bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketTargets {
    pub ot_gross: usize,
    pub ot_subtle: usize,
    pub ut_gross: usize,
    pub ut_subtle: usize,
    pub ne: usize,
}

impl BucketTargets {
    pub fn total(&self) -> usize {
        self.ot_gross + self.ot_subtle + self.ut_gross + self.ut_subtle + self.ne
    }

    fn as_array(&self) -> [usize; 5] {
        [self.ot_gross, self.ot_subtle, self.ut_gross, self.ut_subtle, self.ne]
    }

    fn fits_within(&self, produced: &[usize; 5]) -> bool {
        self.as_array().iter().zip(produced).all(|(t, p)| t <= p)
    }
}

/// Rounded bucket sizes for `n` samples.
///
/// OT and UT each get `round(mix · n)` with NE taking the remainder; within
/// an error class `round(subtle_fraction · n_class)` are subtle.
pub fn class_targets(n: usize, cfg: &SynthesisConfig) -> BucketTargets {
    let round = |x: f64| x.round() as usize;
    let n_ot = round(cfg.class_mix.ot * n as f64).min(n);
    let n_ut = round(cfg.class_mix.ut * n as f64).min(n - n_ot);
    let ot_subtle = round(cfg.subtle_fraction_of_errors * n_ot as f64);
    let ut_subtle = round(cfg.subtle_fraction_of_errors * n_ut as f64);
    BucketTargets {
        ot_gross: n_ot - ot_subtle,
        ot_subtle,
        ut_gross: n_ut - ut_subtle,
        ut_subtle,
        ne: n - n_ot - n_ut,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bucket {
    OtGross,
    OtSubtle,
    UtGross,
    UtSubtle,
    Ne,
}

impl Bucket {
    const FILL_ORDER: [Bucket; 5] = [Bucket::OtGross, Bucket::OtSubtle, Bucket::UtGross, Bucket::UtSubtle, Bucket::Ne];

    fn tag(self) -> &'static str {
        match self {
            Bucket::OtGross => "ot_gross",
            Bucket::OtSubtle => "ot_subtle",
            Bucket::UtGross => "ut_gross",
            Bucket::UtSubtle => "ut_subtle",
            Bucket::Ne => "ne",
        }
    }
}

/// One row of the manifest count table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub label: ClassLabel,
    pub granularity: Granularity,
    pub tgt_lang: String,
    pub train: usize,
    pub validation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: SynthesisConfig,
    pub encoder_fingerprint: String,
    pub corpus_pairs: usize,
    pub targets: BucketTargets,
    pub counts: Vec<CountRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<LabeledSample>,
    pub validation: Vec<LabeledSample>,
    pub manifest: DatasetManifest,
}

/// Builds the mixed, split dataset from seed-filtered pairs.
///
/// Pairs are visited in a seed-derived order and each is used at most once.
/// Buckets fill in turn (OT gross, OT subtle, UT gross, UT subtle, NE); a
/// pair that cannot serve one bucket stays available for the next. Every
/// attempt draws from a generator keyed on (seed, pair id, bucket), so the
/// result does not depend on the rayon worker count.
pub fn assemble_dataset(
    corpus: Vec<SubtitlePair>,
    bundle: &EncoderBundle,
    cfg: &SynthesisConfig,
) -> Result<Dataset, SynthesisError> {
    cfg.validate()?;
    let mut ids = HashSet::with_capacity(corpus.len());
    for p in &corpus {
        if !ids.insert(p.id.as_str()) {
            return Err(SynthesisError::DuplicateId(p.id.clone()));
        }
    }
    drop(ids);
    let n = cfg.num_samples;
    let targets = class_targets(n, cfg);
    if corpus.len() < n {
        let achievable = largest_fitting(n, cfg, &[corpus.len(); 5], corpus.len());
        return Err(SynthesisError::CorpusTooSmall { requested: n, achievable });
    }

    let mut order: Vec<(u64, usize)> = corpus
        .iter()
        .enumerate()
        .map(|(i, p)| (derive_seed(cfg.seed, &["order", &p.id]), i))
        .collect();
    order.sort_unstable_by(|a, b| a.0.cmp(&b.0).then_with(|| corpus[a.1].id.cmp(&corpus[b.1].id)));
    let pool: Vec<usize> = order.into_iter().map(|(_, i)| i).collect();

    let mut used = vec![false; corpus.len()];
    let mut samples: Vec<LabeledSample> = Vec::with_capacity(n);
    let mut produced = [0usize; 5];
    for (b_idx, (&bucket, &want)) in Bucket::FILL_ORDER.iter().zip(targets.as_array().iter()).enumerate() {
        let open: Vec<usize> = pool.iter().copied().filter(|&i| !used[i]).collect();
        let mut cursor = 0;
        while produced[b_idx] < want && cursor < open.len() {
            let need = want - produced[b_idx];
            let chunk_len = (need + need / 4 + 8).min(open.len() - cursor);
            let chunk = &open[cursor..cursor + chunk_len];
            cursor += chunk_len;
            let results: Vec<Result<Option<LabeledSample>, SynthesisError>> = chunk
                .par_iter()
                .map(|&i| attempt(&corpus, i, bucket, bundle, cfg))
                .collect();
            for (&i, r) in chunk.iter().zip(results) {
                if produced[b_idx] == want {
                    break;
                }
                if let Some(s) = r? {
                    used[i] = true;
                    produced[b_idx] += 1;
                    samples.push(s);
                }
            }
        }
    }
    if produced != targets.as_array() {
        let achievable = largest_fitting(n, cfg, &produced, corpus.len());
        return Err(SynthesisError::CorpusTooSmall { requested: n, achievable });
    }

    let (train, validation) = stratified_split(samples, cfg);
    let counts = count_table(&train, &validation);
    let config_json = serde_json::to_vec(cfg).expect("config serializes");
    let manifest = DatasetManifest {
        tool_version: TOOL_VERSION.to_string(),
        seed: cfg.seed,
        config_hash: sha256_hex(&config_json),
        config: cfg.clone(),
        encoder_fingerprint: bundle.fingerprint(),
        corpus_pairs: corpus.len(),
        targets,
        counts,
    };
    Ok(Dataset {
        train,
        validation,
        manifest,
    })
}

fn largest_fitting(n: usize, cfg: &SynthesisConfig, produced: &[usize; 5], pairs: usize) -> usize {
    (0..=n.min(pairs))
        .rev()
        .find(|&m| class_targets(m, cfg).fits_within(produced))
        .unwrap_or(0)
}

fn attempt(
    corpus: &[SubtitlePair],
    i: usize,
    bucket: Bucket,
    bundle: &EncoderBundle,
    cfg: &SynthesisConfig,
) -> Result<Option<LabeledSample>, SynthesisError> {
    let pair = &corpus[i];
    let mut rng = child_rng(cfg.seed, &[&pair.id, bucket.tag()]);
    let out = match bucket {
        Bucket::Ne => Ok(Some(LabeledSample::no_error(pair.clone()))),
        Bucket::OtSubtle => make_ot_subtle(pair, bundle, cfg, &mut rng),
        Bucket::UtSubtle => make_ut_subtle(pair, bundle, cfg, &mut rng),
        Bucket::OtGross => make_gross(pair, GrossDirection::Ot, None, &mut rng).map(Some),
        Bucket::UtGross => gross_ut(corpus, i, &mut rng),
    };
    let sample = match out {
        Ok(s) => s,
        Err(SynthesisError::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    match sample {
        Some(mut s) if s.granularity == Granularity::Gross => {
            s.similarity_to_original = source_similarity(&s, bundle)?;
            Ok(Some(s))
        }
        other => Ok(other),
    }
}

fn gross_ut<R: Rng + ?Sized>(
    corpus: &[SubtitlePair],
    i: usize,
    rng: &mut R,
) -> Result<Option<LabeledSample>, SynthesisError> {
    if corpus.len() < 2 {
        return Ok(None);
    }
    for _ in 0..DONOR_ATTEMPTS {
        let mut j = rng.gen_range(0..corpus.len() - 1);
        if j >= i {
            j += 1;
        }
        let sentences = split_sentences(&corpus[j].source_text);
        let Some(donor) = sentences.choose(rng) else {
            continue;
        };
        match make_gross(&corpus[i], GrossDirection::Ut, Some(donor), rng) {
            Ok(s) => return Ok(Some(s)),
            Err(SynthesisError::NotApplicable(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn source_similarity(s: &LabeledSample, bundle: &EncoderBundle) -> Result<Option<f64>, SynthesisError> {
    let wv = bundle.word_vectors.as_ref();
    let a = sentence_vector(&crate::corpus::tokenize(&s.original_source, &s.pair.src_lang), wv)?;
    let b = sentence_vector(&s.pair.source_tokens(), wv)?;
    match cosine(&a, &b) {
        Ok(c) => Ok(Some(c)),
        Err(EncoderError::ZeroVector) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn stratified_split(samples: Vec<LabeledSample>, cfg: &SynthesisConfig) -> (Vec<LabeledSample>, Vec<LabeledSample>) {
    let mut by_class: BTreeMap<ClassLabel, Vec<LabeledSample>> = BTreeMap::new();
    for s in samples {
        by_class.entry(s.label).or_default().push(s);
    }
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for (label, mut group) in by_class {
        group.sort_by(|a, b| a.pair.id.cmp(&b.pair.id));
        group.shuffle(&mut child_rng(cfg.seed, &["split", label.as_str()]));
        let n_train = (cfg.train_fraction * group.len() as f64).round() as usize;
        let rest = group.split_off(n_train);
        train.extend(group);
        validation.extend(rest);
    }
    train.sort_by(|a, b| a.pair.id.cmp(&b.pair.id));
    validation.sort_by(|a, b| a.pair.id.cmp(&b.pair.id));
    (train, validation)
}

fn count_table(train: &[LabeledSample], validation: &[LabeledSample]) -> Vec<CountRow> {
    let mut table: BTreeMap<(ClassLabel, Granularity, String), (usize, usize)> = BTreeMap::new();
    for s in train {
        table.entry((s.label, s.granularity, s.pair.tgt_lang.clone())).or_default().0 += 1;
    }
    for s in validation {
        table.entry((s.label, s.granularity, s.pair.tgt_lang.clone())).or_default().1 += 1;
    }
    table
        .into_iter()
        .map(|((label, granularity, tgt_lang), (train, validation))| CountRow {
            label,
            granularity,
            tgt_lang,
            train,
            validation,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_for_one_thousand() {
        let t = class_targets(1000, &SynthesisConfig::default());
        assert_eq!(t.ot_subtle + t.ot_gross, 300);
        assert_eq!(t.ut_subtle + t.ut_gross, 300);
        assert_eq!(t.ne, 400);
        // 0.83 * 300 = 249
        assert_eq!((t.ot_subtle, t.ot_gross), (249, 51));
        assert_eq!(t.total(), 1000);
    }

    #[test]
    fn targets_always_sum_to_n() {
        let cfg = SynthesisConfig::default();
        for n in 0..500 {
            assert_eq!(class_targets(n, &cfg).total(), n, "n={n}");
        }
    }

    #[test]
    fn largest_fitting_is_monotone_bound() {
        let cfg = SynthesisConfig::default();
        let produced = [10, 60, 10, 60, 1000];
        let m = largest_fitting(1000, &cfg, &produced, 5000);
        assert!(class_targets(m, &cfg).fits_within(&produced));
        assert!(!class_targets(m + 1, &cfg).fits_within(&produced));
    }
}
