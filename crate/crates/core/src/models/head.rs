use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::layers::{max_pool, max_pool_backward, Conv1d, ConvTrace, Gru, GruTrace, Linear, Param};
use super::{ClassLabel, ModelError};
use crate::hashing::child_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    WeightedGru,
    GruCnn,
    Cnn,
    Hybrid,
}

impl Arch {
    pub const ALL: [Arch; 4] = [Arch::WeightedGru, Arch::GruCnn, Arch::Cnn, Arch::Hybrid];

    pub fn as_str(self) -> &'static str {
        match self {
            Arch::WeightedGru => "weighted_gru",
            Arch::GruCnn => "gru_cnn",
            Arch::Cnn => "cnn",
            Arch::Hybrid => "hybrid",
        }
    }

    fn has_gru(self) -> bool {
        self != Arch::Cnn
    }

    /// Convolutions stacked on the GRU outputs.
    fn gru_convs(self) -> usize {
        match self {
            Arch::GruCnn | Arch::Hybrid => 3,
            _ => 0,
        }
    }

    /// Convolutions stacked directly on the embeddings.
    fn cnn_convs(self) -> usize {
        match self {
            Arch::Cnn | Arch::Hybrid => 4,
            _ => 0,
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arch {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Arch::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| ModelError::UnknownArch(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeadConfig {
    pub arch: Arch,
    pub hidden_dim: usize,
    pub gru_layers: usize,
    pub cnn_channels: usize,
    /// Cycled when a stack has more layers than sizes.
    pub kernel_sizes: Vec<usize>,
    pub dropout: f64,
    /// Loss weights (NE, OT, UT) for `weighted_gru`; inverse class
    /// frequency of the training set when unset.
    pub class_weights: Option<[f64; 3]>,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig {
            arch: Arch::Hybrid,
            hidden_dim: 128,
            gru_layers: 1,
            cnn_channels: 64,
            kernel_sizes: vec![3, 4, 5],
            dropout: 0.1,
            class_weights: None,
        }
    }
}

impl HeadConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(m));
        if self.hidden_dim == 0 || self.gru_layers == 0 || self.cnn_channels == 0 {
            return bad("hidden_dim, gru_layers and cnn_channels must be positive".into());
        }
        if self.kernel_sizes.is_empty() || self.kernel_sizes.contains(&0) {
            return bad(format!("kernel_sizes must be non-empty and positive, got {:?}", self.kernel_sizes));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must be in [0, 1), got {}", self.dropout));
        }
        if let Some(w) = self.class_weights {
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return bad(format!("class_weights must be positive, got {w:?}"));
            }
        }
        Ok(())
    }

    fn kernel(&self, layer: usize) -> usize {
        self.kernel_sizes[layer % self.kernel_sizes.len()]
    }
}

/// A classifier head over contextual token embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    config: HeadConfig,
    input_dim: usize,
    seed: u64,
    grus: Vec<Gru>,
    gru_convs: Vec<Conv1d>,
    cnn_convs: Vec<Conv1d>,
    out: Linear,
    pub(crate) loss_weights: [f64; 3],
    pub(crate) trained: bool,
}

struct Trace {
    grus: Vec<GruTrace>,
    gru_convs: Vec<ConvTrace>,
    gru_pool: Vec<usize>,
    cnn_convs: Vec<ConvTrace>,
    cnn_pool: Vec<usize>,
    pooled: Array1<f64>,
    mask: Option<Array1<f64>>,
}

/// Creates an untrained head for `input_dim`-wide embeddings.
pub fn build_head(cfg: &HeadConfig, input_dim: usize, seed: u64) -> Result<Head, ModelError> {
    cfg.validate()?;
    if input_dim == 0 {
        return Err(ModelError::Config("input_dim must be positive".into()));
    }
    let arch = cfg.arch;
    let mut rng = child_rng(seed, &["init", arch.as_str()]);
    let (hd, ch) = (cfg.hidden_dim, cfg.cnn_channels);
    let mut grus = Vec::new();
    if arch.has_gru() {
        for l in 0..cfg.gru_layers {
            let input = if l == 0 { input_dim } else { hd };
            grus.push(Gru::new(&format!("gru{l}"), input, hd, &mut rng));
        }
    }
    let gru_convs: Vec<Conv1d> = (0..arch.gru_convs())
        .map(|l| Conv1d::new(&format!("gru_conv{l}"), if l == 0 { hd } else { ch }, ch, cfg.kernel(l), &mut rng))
        .collect();
    let cnn_convs: Vec<Conv1d> = (0..arch.cnn_convs())
        .map(|l| {
            let input = if l == 0 { input_dim } else { ch };
            Conv1d::new(&format!("cnn_conv{l}"), input, ch, cfg.kernel(l), &mut rng)
        })
        .collect();
    let width = pooled_width(cfg);
    let out = Linear::new("out", width, ClassLabel::COUNT, &mut rng);
    Ok(Head {
        config: cfg.clone(),
        input_dim,
        seed,
        grus,
        gru_convs,
        cnn_convs,
        out,
        loss_weights: [1.0; 3],
        trained: false,
    })
}

fn pooled_width(cfg: &HeadConfig) -> usize {
    let a = match cfg.arch {
        Arch::WeightedGru => cfg.hidden_dim,
        Arch::GruCnn | Arch::Hybrid => cfg.cnn_channels,
        Arch::Cnn => 0,
    };
    let b = if cfg.arch.cnn_convs() > 0 { cfg.cnn_channels } else { 0 };
    a + b
}

/// Numerically stable softmax.
pub fn softmax(logits: ArrayView1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exp = logits.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

impl Head {
    pub fn config(&self) -> &HeadConfig {
        &self.config
    }

    pub fn arch(&self) -> Arch {
        self.config.arch
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    /// Loss weights (NE, OT, UT) used in training.
    pub fn loss_weights(&self) -> [f64; 3] {
        self.loss_weights
    }

    /// Width of the representation fed to the output layer.
    pub fn pooled_width(&self) -> usize {
        self.out.w.value.nrows()
    }

    pub fn params(&self) -> Vec<&Param> {
        let mut v: Vec<&Param> = Vec::new();
        for g in &self.grus {
            v.extend(g.params());
        }
        for c in self.gru_convs.iter().chain(&self.cnn_convs) {
            v.extend(c.params());
        }
        v.extend(self.out.params());
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut v: Vec<&mut Param> = Vec::new();
        for g in &mut self.grus {
            v.extend(g.params_mut());
        }
        for c in self.gru_convs.iter_mut().chain(&mut self.cnn_convs) {
            v.extend(c.params_mut());
        }
        v.extend(self.out.params_mut());
        v
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    fn check_input(&self, x: ArrayView2<f64>) -> Result<(), ModelError> {
        if x.ncols() != self.input_dim {
            return Err(ModelError::DimMismatch {
                expected: self.input_dim,
                found: x.ncols(),
            });
        }
        if x.nrows() == 0 {
            return Err(ModelError::Config("empty input sequence".into()));
        }
        Ok(())
    }

    /// Inverted-dropout mask for the pooled vector, or `None` without dropout.
    pub(crate) fn dropout_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Array1<f64>> {
        let p = self.config.dropout;
        (p > 0.0).then(|| {
            let keep = 1.0 / (1.0 - p);
            Array1::from_shape_fn(self.pooled_width(), |_| if rng.gen_bool(p) { 0.0 } else { keep })
        })
    }

    fn forward_trace(&self, x: ArrayView2<f64>, mask: Option<Array1<f64>>) -> (Array1<f64>, Trace) {
        let mut parts: Vec<Array1<f64>> = Vec::with_capacity(2);
        let mut grus: Vec<GruTrace> = Vec::with_capacity(self.grus.len());
        for (l, gru) in self.grus.iter().enumerate() {
            let tr = match l {
                0 => gru.forward(x),
                _ => gru.forward(grus[l - 1].outputs()),
            };
            grus.push(tr);
        }
        let mut gru_convs: Vec<ConvTrace> = Vec::with_capacity(self.gru_convs.len());
        let mut gru_pool = Vec::new();
        if let Some(top) = grus.last() {
            if self.gru_convs.is_empty() {
                parts.push(top.last().to_owned());
            } else {
                for (l, conv) in self.gru_convs.iter().enumerate() {
                    let tr = match l {
                        0 => conv.forward(top.outputs()),
                        _ => conv.forward(gru_convs[l - 1].out.view()),
                    };
                    gru_convs.push(tr);
                }
                let (v, idx) = max_pool(gru_convs.last().expect("conv stack").out.view());
                parts.push(v);
                gru_pool = idx;
            }
        }
        let mut cnn_convs: Vec<ConvTrace> = Vec::with_capacity(self.cnn_convs.len());
        let mut cnn_pool = Vec::new();
        if !self.cnn_convs.is_empty() {
            for (l, conv) in self.cnn_convs.iter().enumerate() {
                let tr = match l {
                    0 => conv.forward(x),
                    _ => conv.forward(cnn_convs[l - 1].out.view()),
                };
                cnn_convs.push(tr);
            }
            let (v, idx) = max_pool(cnn_convs.last().expect("conv stack").out.view());
            parts.push(v);
            cnn_pool = idx;
        }
        let mut pooled = ndarray::concatenate(Axis(0), &parts.iter().map(|p| p.view()).collect::<Vec<_>>())
            .expect("pooled parts concatenate");
        if let Some(m) = &mask {
            pooled *= m;
        }
        let logits = self.out.forward(pooled.view());
        (
            logits,
            Trace {
                grus,
                gru_convs,
                gru_pool,
                cnn_convs,
                cnn_pool,
                pooled,
                mask,
            },
        )
    }

    fn backward(&self, x: ArrayView2<f64>, tr: &Trace, dlogits: ArrayView1<f64>, g: &mut [Array2<f64>]) {
        let len = x.nrows();
        let n_gru = self.grus.len() * Gru::PARAMS;
        let n_gc = self.gru_convs.len() * Conv1d::PARAMS;
        let n_cc = self.cnn_convs.len() * Conv1d::PARAMS;
        let (g_gru, rest) = g.split_at_mut(n_gru);
        let (g_gc, rest) = rest.split_at_mut(n_gc);
        let (g_cc, g_out) = rest.split_at_mut(n_cc);

        let mut dpooled = self.out.backward(tr.pooled.view(), dlogits, g_out);
        if let Some(m) = &tr.mask {
            dpooled *= m;
        }
        let mut offset = 0;
        if !self.grus.is_empty() {
            let top = tr.grus.last().expect("gru trace");
            let hd = self.config.hidden_dim;
            let dh = if self.gru_convs.is_empty() {
                offset = hd;
                let mut dh = Array2::zeros((len, hd));
                dh.row_mut(len - 1).assign(&dpooled.slice(s![..hd]));
                dh
            } else {
                let ch = self.config.cnn_channels;
                offset = ch;
                let mut d = max_pool_backward(dpooled.slice(s![..ch]), &tr.gru_pool, len);
                for l in (0..self.gru_convs.len()).rev() {
                    let gs = &mut g_gc[l * Conv1d::PARAMS..(l + 1) * Conv1d::PARAMS];
                    d = self.gru_convs[l]
                        .backward(&tr.gru_convs[l], d.view(), gs, true)
                        .expect("dx requested");
                }
                d
            };
            debug_assert_eq!(dh.dim(), top.outputs().dim());
            let mut d = dh;
            for l in (0..self.grus.len()).rev() {
                let gs = &mut g_gru[l * Gru::PARAMS..(l + 1) * Gru::PARAMS];
                let input = if l == 0 { x } else { tr.grus[l - 1].outputs() };
                match self.grus[l].backward(input, &tr.grus[l], d.view(), gs, l > 0) {
                    Some(dx) => d = dx,
                    None => break,
                }
            }
        }
        if !self.cnn_convs.is_empty() {
            let ch = self.config.cnn_channels;
            let mut d = max_pool_backward(dpooled.slice(s![offset..offset + ch]), &tr.cnn_pool, len);
            for l in (0..self.cnn_convs.len()).rev() {
                let gs = &mut g_cc[l * Conv1d::PARAMS..(l + 1) * Conv1d::PARAMS];
                match self.cnn_convs[l].backward(&tr.cnn_convs[l], d.view(), gs, l > 0) {
                    Some(dx) => d = dx,
                    None => break,
                }
            }
        }
    }

    /// Raw class scores in inference mode.
    pub fn logits(&self, x: ArrayView2<f64>) -> Result<Array1<f64>, ModelError> {
        self.check_input(x)?;
        Ok(self.forward_trace(x, None).0)
    }

    /// Class probabilities for one `len × input_dim` embedding matrix.
    pub fn probabilities(&self, x: ArrayView2<f64>) -> Result<Array1<f64>, ModelError> {
        Ok(softmax(self.logits(x)?.view()))
    }

    /// `B × 3` probability matrix for a batch, inference mode.
    pub fn forward_batch(&self, xs: &[Array2<f64>]) -> Result<Array2<f64>, ModelError> {
        let rows: Vec<Array1<f64>> = xs
            .par_iter()
            .map(|x| self.probabilities(x.view()))
            .collect::<Result<_, _>>()?;
        let mut out = Array2::zeros((xs.len(), ClassLabel::COUNT));
        for (i, r) in rows.iter().enumerate() {
            out.row_mut(i).assign(r);
        }
        Ok(out)
    }

    fn zero_grads(&self) -> Vec<Array2<f64>> {
        self.params().iter().map(|p| Array2::zeros(p.value.dim())).collect()
    }

    /// Weighted negative log-likelihood of one sample and, if `grads` is
    /// given, its gradient scaled by `scale` added in.
    pub(crate) fn sample_loss(
        &self,
        x: ArrayView2<f64>,
        label: ClassLabel,
        mask: Option<Array1<f64>>,
        grads: Option<(&mut [Array2<f64>], f64)>,
    ) -> (f64, bool) {
        let (logits, tr) = self.forward_trace(x, mask);
        let p = softmax(logits.view());
        let y = label.index();
        let nll = -p[y].max(f64::MIN_POSITIVE).ln();
        let correct = argmax(p.view()) == label;
        if let Some((g, scale)) = grads {
            let mut d = p;
            d[y] -= 1.0;
            d *= scale;
            self.backward(x, &tr, d.view(), g);
        }
        (nll, correct)
    }

    /// Mean loss of a batch under `weights`: `Σ w_y · nll / Σ w_y`, in
    /// inference mode.
    pub fn batch_loss(&self, batch: &[(Array2<f64>, ClassLabel)], weights: &[f64; 3]) -> Result<f64, ModelError> {
        self.batch_gradients_inner(batch, weights, None).map(|(l, _)| l)
    }

    /// [`Head::batch_loss`] and its gradient for every parameter, in the
    /// order of [`Head::params`]. Dropout is off.
    pub fn batch_gradients(
        &self,
        batch: &[(Array2<f64>, ClassLabel)],
        weights: &[f64; 3],
    ) -> Result<(f64, Vec<Array2<f64>>), ModelError> {
        let masks = vec![None; batch.len()];
        self.batch_gradients_inner(batch, weights, Some(masks))
            .map(|(l, g)| (l, g.expect("gradients requested")))
    }

    pub(crate) fn batch_gradients_inner(
        &self,
        batch: &[(Array2<f64>, ClassLabel)],
        weights: &[f64; 3],
        masks: Option<Vec<Option<Array1<f64>>>>,
    ) -> Result<(f64, Option<Vec<Array2<f64>>>), ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyDataset("batch"));
        }
        for (x, _) in batch {
            self.check_input(x.view())?;
        }
        let total_w: f64 = batch.iter().map(|(_, y)| weights[y.index()]).sum();
        if total_w <= 0.0 {
            return Err(ModelError::Config("batch has zero total class weight".into()));
        }
        let with_grads = masks.is_some();
        let masks = masks.unwrap_or_else(|| vec![None; batch.len()]);
        let per_sample: Vec<(f64, Option<Vec<Array2<f64>>>)> = batch
            .par_iter()
            .zip(masks)
            .map(|((x, y), mask)| {
                let w = weights[y.index()];
                if with_grads {
                    let mut g = self.zero_grads();
                    let (nll, _) = self.sample_loss(x.view(), *y, mask, Some((&mut g, w / total_w)));
                    (w * nll, Some(g))
                } else {
                    (w * self.sample_loss(x.view(), *y, None, None).0, None)
                }
            })
            .collect();
        let mut loss = 0.0;
        let mut grads = with_grads.then(|| self.zero_grads());
        for (l, g) in per_sample {
            loss += l;
            if let (Some(acc), Some(g)) = (grads.as_mut(), g) {
                for (a, b) in acc.iter_mut().zip(g) {
                    *a += &b;
                }
            }
        }
        Ok((loss / total_w, grads))
    }
}

/// Index of the largest entry; the lowest index wins exact ties.
pub fn argmax(probs: ArrayView1<f64>) -> ClassLabel {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    ClassLabel::from_index(best).expect("three classes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::distributions::{Distribution, Uniform};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small(arch: Arch) -> HeadConfig {
        HeadConfig {
            arch,
            hidden_dim: 6,
            cnn_channels: 5,
            dropout: 0.0,
            ..HeadConfig::default()
        }
    }

    fn batch(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<(Array2<f64>, ClassLabel)> {
        let u = Uniform::new(-1.0, 1.0);
        (0..n)
            .map(|i| {
                let len = 3 + rng.gen_range(0..6);
                let x = Array2::from_shape_fn((len, d), |_| u.sample(rng));
                (x, ClassLabel::from_index(i % 3).unwrap())
            })
            .collect()
    }

    #[test]
    fn arch_names_round_trip_and_unknown_is_an_error() {
        for a in Arch::ALL {
            assert_eq!(a.as_str().parse::<Arch>().unwrap(), a);
        }
        let err = "transformer".parse::<Arch>().unwrap_err().to_string();
        assert!(err.contains("weighted_gru") && err.contains("hybrid"), "{err}");
    }

    #[test]
    fn hybrid_concatenates_both_branches() {
        let cfg = HeadConfig {
            cnn_channels: 64,
            ..HeadConfig::default()
        };
        let head = build_head(&cfg, 16, 0).unwrap();
        assert_eq!(head.pooled_width(), 128);
        let gru_only = build_head(
            &HeadConfig {
                arch: Arch::WeightedGru,
                ..cfg.clone()
            },
            16,
            0,
        )
        .unwrap();
        assert_eq!(gru_only.pooled_width(), 128);
        assert_eq!(gru_only.params().len(), 4 + 2);
        let cnn = build_head(&HeadConfig { arch: Arch::Cnn, ..cfg }, 16, 0).unwrap();
        assert_eq!(cnn.params().len(), 4 * 2 + 2);
    }

    #[test]
    fn cnn_cycles_kernel_sizes() {
        let head = build_head(&small(Arch::Cnn), 4, 0).unwrap();
        let kernels: Vec<usize> = head.cnn_convs.iter().map(|c| c.kernel).collect();
        assert_eq!(kernels, vec![3, 4, 5, 3]);
    }

    #[test]
    fn rows_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for arch in Arch::ALL {
            let head = build_head(&small(arch), 7, 1).unwrap();
            let xs: Vec<Array2<f64>> = batch(&mut rng, 5, 7).into_iter().map(|(x, _)| x).collect();
            let p = head.forward_batch(&xs).unwrap();
            assert_eq!(p.dim(), (5, 3));
            for row in p.rows() {
                assert!((row.sum() - 1.0).abs() < 1e-6);
                assert!(row.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn unit_weights_give_plain_cross_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let head = build_head(&small(Arch::WeightedGru), 5, 2).unwrap();
        let b = batch(&mut rng, 6, 5);
        let loss = head.batch_loss(&b, &[1.0; 3]).unwrap();
        let plain: f64 = b
            .iter()
            .map(|(x, y)| -head.probabilities(x.view()).unwrap()[y.index()].ln())
            .sum::<f64>()
            / 6.0;
        assert!((loss - plain).abs() < 1e-12);
    }

    #[test]
    fn every_parameter_gets_gradient_and_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for arch in Arch::ALL {
            let head = build_head(&small(arch), 6, 3).unwrap();
            let b = batch(&mut rng, 4, 6);
            let w = [1.0, 2.0, 0.5];
            let (_, grads) = head.batch_gradients(&b, &w).unwrap();
            for (p, g) in head.params().iter().zip(&grads) {
                assert!(g.iter().any(|v| *v != 0.0), "{arch}: {} has zero gradient", p.name);
            }
            for _ in 0..6 {
                let k = rng.gen_range(0..grads.len());
                let (r, c) = grads[k].dim();
                let (i, j) = (rng.gen_range(0..r), rng.gen_range(0..c));
                let eps = 1e-5;
                let mut probe = head.clone();
                let orig = probe.params()[k].value[[i, j]];
                probe.params_mut()[k].value[[i, j]] = orig + eps;
                let up = probe.batch_loss(&b, &w).unwrap();
                probe.params_mut()[k].value[[i, j]] = orig - eps;
                let down = probe.batch_loss(&b, &w).unwrap();
                let numeric = (up - down) / (2.0 * eps);
                let analytic = grads[k][[i, j]];
                let denom = numeric.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    (numeric - analytic).abs() / denom < 1e-2 || (numeric - analytic).abs() < 1e-9,
                    "{arch} {}[{i},{j}]: numeric {numeric} analytic {analytic}",
                    head.params()[k].name
                );
            }
        }
    }

    #[test]
    fn batching_does_not_change_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let head = build_head(&small(Arch::Hybrid), 4, 0).unwrap();
        let xs: Vec<Array2<f64>> = batch(&mut rng, 6, 4).into_iter().map(|(x, _)| x).collect();
        let together = head.forward_batch(&xs).unwrap();
        for (i, x) in xs.iter().enumerate() {
            let alone = head.forward_batch(std::slice::from_ref(x)).unwrap();
            assert_eq!(alone.row(0), together.row(i));
        }
    }

    #[test]
    fn argmax_tie_goes_to_lowest_index() {
        let third = 1.0 / 3.0;
        assert_eq!(argmax(ndarray::arr1(&[third, third, third]).view()), ClassLabel::Ne);
        assert_eq!(argmax(ndarray::arr1(&[0.1, 0.2, 0.7]).view()), ClassLabel::Ut);
        assert_eq!(argmax(ndarray::arr1(&[0.2, 0.4, 0.4]).view()), ClassLabel::Ot);
    }

    #[test]
    fn scaling_logits_keeps_the_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let head = build_head(&small(Arch::Cnn), 4, 0).unwrap();
        for (x, _) in batch(&mut rng, 10, 4) {
            let logits = head.logits(x.view()).unwrap();
            let base = argmax(softmax(logits.view()).view());
            for c in [0.01, 0.5, 3.0, 100.0] {
                assert_eq!(argmax(softmax((&logits * c).view()).view()), base);
            }
        }
    }

    #[test]
    fn wrong_input_width_is_rejected() {
        let head = build_head(&small(Arch::Cnn), 4, 0).unwrap();
        assert!(matches!(
            head.logits(Array2::zeros((3, 5)).view()),
            Err(ModelError::DimMismatch { expected: 4, found: 5 })
        ));
    }
}
