use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::head::{argmax, Arch, Head};
use super::{ClassLabel, ModelError};
use crate::encoders::EncoderBundle;
use crate::hashing::child_rng;
use crate::synthesis::LabeledSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation-accuracy gain before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            max_epochs: 30,
            patience: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) || !(self.epsilon > 0.0) {
            return bad("learning_rate and epsilon must be positive".into());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must be in [0, 1)".into());
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return bad("batch_size, max_epochs and patience must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_loss: f64,
    pub validation_accuracy: f64,
    /// Lowest validation loss so far.
    pub best_validation_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub arch: Arch,
    pub epochs: Vec<EpochStats>,
    /// Epoch (1-based) whose parameters were kept.
    pub best_epoch: usize,
    pub best_validation_accuracy: f64,
    pub loss_weights: [f64; 3],
    pub stopped_early: bool,
}

/// One sample as the heads see it.
pub type Encoded = (Array2<f64>, ClassLabel);

/// Runs the frozen contextual encoder over every sample.
pub fn encode_samples(samples: &[LabeledSample], bundle: &EncoderBundle) -> Result<Vec<Encoded>, ModelError> {
    samples
        .par_iter()
        .map(|s| {
            let x = bundle
                .contextual
                .encode_pair(&s.pair.source_tokens(), &s.pair.target_tokens())
                .map_err(|e| ModelError::Sample {
                    id: s.pair.id.clone(),
                    source: e,
                })?;
            Ok((x, s.label))
        })
        .collect()
}

/// Inverse class frequency, `n / (3 · n_c)`; absent classes get 1.
pub fn inverse_frequency_weights(labels: impl IntoIterator<Item = ClassLabel>) -> [f64; 3] {
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.index()] += 1;
    }
    let n: usize = counts.iter().sum();
    counts.map(|c| if c == 0 { 1.0 } else { n as f64 / (3.0 * c as f64) })
}

struct Adam {
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: i32,
}

impl Adam {
    fn new(head: &Head) -> Self {
        let zeros: Vec<Array2<f64>> = head.params().iter().map(|p| Array2::zeros(p.value.dim())).collect();
        Adam {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, head: &mut Head, grads: &[Array2<f64>], cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for (((p, g), m), v) in head.params_mut().into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            m.zip_mut_with(g, |m, &g| *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g);
            v.zip_mut_with(g, |v, &g| *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g);
            ndarray::Zip::from(&mut p.value).and(&*m).and(&*v).for_each(|w, &m, &v| {
                *w -= cfg.learning_rate * (m / c1) / ((v / c2).sqrt() + cfg.epsilon);
            });
        }
    }
}

/// Weighted loss and accuracy in inference mode.
fn evaluate(head: &Head, data: &[Encoded], weights: &[f64; 3]) -> (f64, f64) {
    let per: Vec<(f64, f64, bool)> = data
        .par_iter()
        .map(|(x, y)| {
            let (nll, correct) = head.sample_loss(x.view(), *y, None, None);
            let w = weights[y.index()];
            (w * nll, w, correct)
        })
        .collect();
    let (mut loss, mut wsum, mut hits) = (0.0, 0.0, 0usize);
    for (l, w, c) in per {
        loss += l;
        wsum += w;
        hits += c as usize;
    }
    (loss / wsum.max(f64::MIN_POSITIVE), hits as f64 / data.len() as f64)
}

/// Trains `head` on labeled samples, encoding them once up front.
pub fn train(
    head: Head,
    train_set: &[LabeledSample],
    validation_set: &[LabeledSample],
    bundle: &EncoderBundle,
    cfg: &TrainConfig,
) -> Result<(Head, TrainHistory), ModelError> {
    if head.input_dim() != bundle.contextual.dim() {
        return Err(ModelError::DimMismatch {
            expected: head.input_dim(),
            found: bundle.contextual.dim(),
        });
    }
    if train_set.is_empty() {
        return Err(ModelError::EmptyDataset("training set"));
    }
    if validation_set.is_empty() {
        return Err(ModelError::EmptyDataset("validation set"));
    }
    let tr = encode_samples(train_set, bundle)?;
    let va = encode_samples(validation_set, bundle)?;
    train_encoded(head, &tr, &va, cfg)
}

/// Adam on shuffled mini-batches with early stopping on validation
/// accuracy; the best epoch's parameters are returned.
///
/// `weighted_gru` uses class-weighted loss, the other heads plain
/// cross-entropy. Per-sample gradients run in parallel and are summed in
/// sample order, so results do not depend on the thread count.
pub fn train_encoded(
    mut head: Head,
    train_set: &[Encoded],
    validation_set: &[Encoded],
    cfg: &TrainConfig,
) -> Result<(Head, TrainHistory), ModelError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(ModelError::EmptyDataset("training set"));
    }
    if validation_set.is_empty() {
        return Err(ModelError::EmptyDataset("validation set"));
    }
    let weights = match head.arch() {
        Arch::WeightedGru => head
            .config()
            .class_weights
            .unwrap_or_else(|| inverse_frequency_weights(train_set.iter().map(|(_, y)| *y))),
        _ => [1.0; 3],
    };
    head.loss_weights = weights;
    let mut adam = Adam::new(&head);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epochs = Vec::new();
    let mut best: Option<(usize, f64, Head)> = None;
    let mut best_loss = f64::INFINITY;
    let mut since_best = 0;
    let mut stopped_early = false;
    for epoch in 1..=cfg.max_epochs {
        let tag = epoch.to_string();
        order.shuffle(&mut child_rng(cfg.seed, &["shuffle", &tag]));
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch_tag = b.to_string();
            let mut rng = child_rng(cfg.seed, &["dropout", &tag, &batch_tag]);
            let batch: Vec<Encoded> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            let masks: Vec<Option<Array1<f64>>> = chunk.iter().map(|_| head.dropout_mask(&mut rng)).collect();
            let (loss, grads) = head.batch_gradients_inner(&batch, &weights, Some(masks))?;
            let grads = grads.expect("gradients requested");
            if !loss.is_finite() || grads.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
                return Err(ModelError::Diverged { epoch, batch: b, loss });
            }
            adam.step(&mut head, &grads, cfg);
        }
        let (train_loss, train_accuracy) = evaluate(&head, train_set, &weights);
        let (validation_loss, validation_accuracy) = evaluate(&head, validation_set, &weights);
        if !train_loss.is_finite() || !validation_loss.is_finite() {
            return Err(ModelError::Diverged {
                epoch,
                batch: 0,
                loss: train_loss,
            });
        }
        best_loss = best_loss.min(validation_loss);
        log::info!(
            "{} epoch {epoch}: train loss {train_loss:.4} acc {train_accuracy:.4}, validation loss {validation_loss:.4} acc {validation_accuracy:.4}",
            head.arch()
        );
        epochs.push(EpochStats {
            epoch,
            train_loss,
            train_accuracy,
            validation_loss,
            validation_accuracy,
            best_validation_loss: best_loss,
        });
        if best.as_ref().is_none_or(|(_, acc, _)| validation_accuracy > *acc) {
            best = Some((epoch, validation_accuracy, head.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                stopped_early = epoch < cfg.max_epochs;
                break;
            }
        }
    }
    let (best_epoch, best_validation_accuracy, mut best_head) = best.expect("at least one epoch");
    best_head.trained = true;
    let history = TrainHistory {
        arch: best_head.arch(),
        epochs,
        best_epoch,
        best_validation_accuracy,
        loss_weights: weights,
        stopped_early,
    };
    Ok((best_head, history))
}

/// Predicted label and class probabilities (NE, OT, UT).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: ClassLabel,
    pub probs: [f64; 3],
}

impl Prediction {
    pub fn from_probs(probs: Array1<f64>) -> Self {
        Prediction {
            label: argmax(probs.view()),
            probs: [probs[0], probs[1], probs[2]],
        }
    }
}

/// Classifies one embedded pair.
pub fn predict_encoded(head: &Head, x: &Array2<f64>) -> Result<Prediction, ModelError> {
    if !head.is_trained() {
        return Err(ModelError::Untrained);
    }
    Ok(Prediction::from_probs(head.probabilities(x.view())?))
}

/// Classifies a subtitle pair.
pub fn predict(
    head: &Head,
    pair: &crate::corpus::SubtitlePair,
    bundle: &EncoderBundle,
) -> Result<Prediction, ModelError> {
    if !head.is_trained() {
        return Err(ModelError::Untrained);
    }
    let x = bundle
        .contextual
        .encode_pair(&pair.source_tokens(), &pair.target_tokens())
        .map_err(|e| ModelError::Sample {
            id: pair.id.clone(),
            source: e,
        })?;
    predict_encoded(head, &x)
}

/// [`predict`] over many pairs in parallel, one result per pair.
pub fn predict_many(
    head: &Head,
    pairs: &[crate::corpus::SubtitlePair],
    bundle: &EncoderBundle,
) -> Vec<Result<Prediction, ModelError>> {
    pairs.par_iter().map(|p| predict(head, p, bundle)).collect()
}
