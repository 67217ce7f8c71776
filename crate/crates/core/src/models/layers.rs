//! Layers with hand-written backward passes.
//!
//! Each layer's `backward` adds its parameter gradients into a slice of
//! accumulators laid out in the same order as its parameters.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::Rng;

/// A named trainable matrix. Biases are stored as `1 × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Array2<f64>,
}

impl Param {
    fn uniform<R: Rng + ?Sized>(name: String, rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        let dist = Uniform::new_inclusive(-bound, bound);
        Param {
            name,
            value: Array2::from_shape_fn((rows, cols), |_| dist.sample(rng)),
        }
    }

    fn zeros(name: String, rows: usize, cols: usize) -> Self {
        Param {
            name,
            value: Array2::zeros((rows, cols)),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn outer(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Array2<f64> {
    a.insert_axis(Axis(1)).dot(&b.insert_axis(Axis(0)))
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Linear {
    pub w: Param,
    pub b: Param,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(name: &str, input: usize, output: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (input + output) as f64).sqrt();
        Linear {
            w: Param::uniform(format!("{name}.w"), input, output, bound, rng),
            b: Param::zeros(format!("{name}.b"), 1, output),
        }
    }

    pub fn forward(&self, x: ArrayView1<f64>) -> Array1<f64> {
        x.dot(&self.w.value) + self.b.value.row(0)
    }

    pub fn backward(&self, x: ArrayView1<f64>, dy: ArrayView1<f64>, g: &mut [Array2<f64>]) -> Array1<f64> {
        g[0] += &outer(x, dy);
        g[1].row_mut(0).scaled_add(1.0, &dy);
        self.w.value.dot(&dy)
    }

    pub fn params(&self) -> [&Param; 2] {
        [&self.w, &self.b]
    }

    pub fn params_mut(&mut self) -> [&mut Param; 2] {
        [&mut self.w, &mut self.b]
    }
}

/// Gated recurrent unit with update gate `z`, reset gate `r` and candidate
/// `n`; the reset gate scales the recurrent part of the candidate.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Gru {
    pub w: Param,
    pub u: Param,
    pub b: Param,
    pub bu: Param,
    pub hidden: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct GruTrace {
    /// Hidden states `h_0 … h_L`, with `h_0 = 0`.
    pub h: Array2<f64>,
    z: Array2<f64>,
    r: Array2<f64>,
    n: Array2<f64>,
    /// Recurrent part of the candidate pre-activation, before the reset gate.
    hun: Array2<f64>,
}

impl GruTrace {
    pub fn outputs(&self) -> ArrayView2<'_, f64> {
        self.h.slice(s![1.., ..])
    }

    pub fn last(&self) -> ArrayView1<'_, f64> {
        self.h.row(self.h.nrows() - 1)
    }
}

impl Gru {
    pub const PARAMS: usize = 4;

    pub fn new<R: Rng + ?Sized>(name: &str, input: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        Gru {
            w: Param::uniform(format!("{name}.w"), input, 3 * hidden, bound, rng),
            u: Param::uniform(format!("{name}.u"), hidden, 3 * hidden, bound, rng),
            b: Param::uniform(format!("{name}.b"), 1, 3 * hidden, bound, rng),
            bu: Param::uniform(format!("{name}.bu"), 1, 3 * hidden, bound, rng),
            hidden,
        }
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> GruTrace {
        let (len, hd) = (x.nrows(), self.hidden);
        let xw = x.dot(&self.w.value) + &self.b.value;
        let mut h = Array2::zeros((len + 1, hd));
        let mut z = Array2::zeros((len, hd));
        let mut r = Array2::zeros((len, hd));
        let mut n = Array2::zeros((len, hd));
        let mut hun = Array2::zeros((len, hd));
        for t in 0..len {
            let hu = h.row(t).dot(&self.u.value) + self.b_u();
            for j in 0..hd {
                let zt = sigmoid(xw[[t, j]] + hu[j]);
                let rt = sigmoid(xw[[t, hd + j]] + hu[hd + j]);
                let nt = (xw[[t, 2 * hd + j]] + rt * hu[2 * hd + j]).tanh();
                z[[t, j]] = zt;
                r[[t, j]] = rt;
                n[[t, j]] = nt;
                hun[[t, j]] = hu[2 * hd + j];
                h[[t + 1, j]] = (1.0 - zt) * nt + zt * h[[t, j]];
            }
        }
        GruTrace { h, z, r, n, hun }
    }

    fn b_u(&self) -> ArrayView1<'_, f64> {
        self.bu.value.row(0)
    }

    /// `dh` holds the loss gradient for every output `h_1 … h_L`.
    pub fn backward(
        &self,
        x: ArrayView2<f64>,
        tr: &GruTrace,
        dh: ArrayView2<f64>,
        g: &mut [Array2<f64>],
        need_dx: bool,
    ) -> Option<Array2<f64>> {
        let (len, hd) = (x.nrows(), self.hidden);
        let mut dxw = Array2::zeros((len, 3 * hd));
        let mut dhu = Array2::zeros((len, 3 * hd));
        let mut carry = Array1::<f64>::zeros(hd);
        for t in (0..len).rev() {
            let mut dprev = Array1::<f64>::zeros(hd);
            for j in 0..hd {
                let d = dh[[t, j]] + carry[j];
                let (zt, rt, nt) = (tr.z[[t, j]], tr.r[[t, j]], tr.n[[t, j]]);
                let hp = tr.h[[t, j]];
                let dn = d * (1.0 - zt);
                let dz = d * (hp - nt);
                dprev[j] = d * zt;
                let dnp = dn * (1.0 - nt * nt);
                let drp = dnp * tr.hun[[t, j]] * rt * (1.0 - rt);
                let dzp = dz * zt * (1.0 - zt);
                dxw[[t, j]] = dzp;
                dxw[[t, hd + j]] = drp;
                dxw[[t, 2 * hd + j]] = dnp;
                dhu[[t, j]] = dzp;
                dhu[[t, hd + j]] = drp;
                dhu[[t, 2 * hd + j]] = dnp * rt;
            }
            dprev += &self.u.value.dot(&dhu.row(t));
            carry = dprev;
        }
        g[0] += &x.t().dot(&dxw);
        g[1] += &tr.h.slice(s![..len, ..]).t().dot(&dhu);
        g[2] += &dxw.sum_axis(Axis(0)).insert_axis(Axis(0));
        g[3] += &dhu.sum_axis(Axis(0)).insert_axis(Axis(0));
        need_dx.then(|| dxw.dot(&self.w.value.t()))
    }

    pub fn params(&self) -> [&Param; 4] {
        [&self.w, &self.u, &self.b, &self.bu]
    }

    pub fn params_mut(&mut self) -> [&mut Param; 4] {
        [&mut self.w, &mut self.u, &mut self.b, &mut self.bu]
    }
}

/// 1-D convolution over time with "same" padding and a ReLU.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Conv1d {
    pub w: Param,
    pub b: Param,
    pub kernel: usize,
    pub input: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct ConvTrace {
    cols: Array2<f64>,
    pub out: Array2<f64>,
}

impl Conv1d {
    pub const PARAMS: usize = 2;

    pub fn new<R: Rng + ?Sized>(name: &str, input: usize, output: usize, kernel: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (kernel * input) as f64).sqrt();
        Conv1d {
            w: Param::uniform(format!("{name}.w"), kernel * input, output, bound, rng),
            b: Param::zeros(format!("{name}.b"), 1, output),
            kernel,
            input,
        }
    }

    fn left_pad(&self) -> usize {
        (self.kernel - 1) / 2
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> ConvTrace {
        let (len, cin, left) = (x.nrows(), self.input, self.left_pad());
        let mut cols = Array2::zeros((len, self.kernel * cin));
        for t in 0..len {
            for j in 0..self.kernel {
                let src = t + j;
                if src < left || src - left >= len {
                    continue;
                }
                cols.slice_mut(s![t, j * cin..(j + 1) * cin]).assign(&x.row(src - left));
            }
        }
        let mut out = cols.dot(&self.w.value) + &self.b.value;
        out.mapv_inplace(|v| v.max(0.0));
        ConvTrace { cols, out }
    }

    pub fn backward(
        &self,
        tr: &ConvTrace,
        dout: ArrayView2<f64>,
        g: &mut [Array2<f64>],
        need_dx: bool,
    ) -> Option<Array2<f64>> {
        let mut dpre = dout.to_owned();
        dpre.zip_mut_with(&tr.out, |d, &o| {
            if o <= 0.0 {
                *d = 0.0;
            }
        });
        g[0] += &tr.cols.t().dot(&dpre);
        g[1] += &dpre.sum_axis(Axis(0)).insert_axis(Axis(0));
        if !need_dx {
            return None;
        }
        let (len, cin, left) = (dpre.nrows(), self.input, self.left_pad());
        let dcols = dpre.dot(&self.w.value.t());
        let mut dx = Array2::zeros((len, cin));
        for t in 0..len {
            for j in 0..self.kernel {
                let src = t + j;
                if src < left || src - left >= len {
                    continue;
                }
                let mut row = dx.row_mut(src - left);
                row += &dcols.slice(s![t, j * cin..(j + 1) * cin]);
            }
        }
        Some(dx)
    }

    pub fn params(&self) -> [&Param; 2] {
        [&self.w, &self.b]
    }

    pub fn params_mut(&mut self) -> [&mut Param; 2] {
        [&mut self.w, &mut self.b]
    }
}

/// Per-channel maximum over time and the winning positions (first on ties).
pub(crate) fn max_pool(x: ArrayView2<f64>) -> (Array1<f64>, Vec<usize>) {
    let mut vals = Array1::from_elem(x.ncols(), f64::NEG_INFINITY);
    let mut idx = vec![0; x.ncols()];
    for (t, row) in x.rows().into_iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v > vals[c] {
                vals[c] = v;
                idx[c] = t;
            }
        }
    }
    (vals, idx)
}

pub(crate) fn max_pool_backward(dy: ArrayView1<f64>, idx: &[usize], len: usize) -> Array2<f64> {
    let mut dx = Array2::zeros((len, dy.len()));
    for (c, &t) in idx.iter().enumerate() {
        dx[[t, c]] = dy[c];
    }
    dx
}
