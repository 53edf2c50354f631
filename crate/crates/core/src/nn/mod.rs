//! Small fully-connected networks with hand-written reverse mode.
//!
//! Parameters live in one flat `Vec<f64>`: for each layer the `out x in`
//! weight matrix (row-major) followed by the `out` biases. Gradients and
//! Adam moments share that layout, which keeps optimizer and Polyak
//! updates plain slice loops.

mod adam;
mod checkpoint;

pub use adam::AdamState;
pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{usage_err, Result};

/// RNG used for dropout masks and initialisation.
pub type NetRng = ChaCha8Rng;

/// Half-width of the uniform init used for output layers.
pub const OUTPUT_INIT_SCALE: f64 = 1e-3;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(usage_err(format!(
                "matrix data has {} entries, expected {rows} x {cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.as_ref().len() != cols {
                return Err(usage_err("ragged rows"));
            }
            data.extend_from_slice(r.as_ref());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// `c = a * b + beta * c` on strided views; thin wrapper over
/// `matrixmultiply::dgemm`.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    debug_assert!(c.len() >= m * n);
    // SAFETY: the strides describe views that stay inside `a`, `b` and `c`
    // (checked by the callers' shape bookkeeping); `c` is contiguous
    // row-major `m x n` and does not alias the inputs.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Tanh,
    Identity,
}

impl OutputActivation {
    pub fn tag(self) -> &'static str {
        match self {
            OutputActivation::Tanh => "tanh",
            OutputActivation::Identity => "identity",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "tanh" => Some(OutputActivation::Tanh),
            "identity" => Some(OutputActivation::Identity),
            _ => None,
        }
    }
}

/// Whether hidden-layer dropout is sampled on this pass.
pub enum DropoutMode<'a> {
    Off,
    /// Inverted dropout: kept units are scaled by `1 / (1 - p)`.
    Stochastic(&'a mut NetRng),
}

/// Multilayer perceptron with ReLU hidden layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
    output: OutputActivation,
    dropout_p: f64,
}

/// Everything the backward pass needs from a forward pass, including the
/// dropout masks that were drawn.
#[derive(Debug, Clone)]
pub struct Tape {
    batch: usize,
    sizes: Vec<usize>,
    /// `layer_inputs[l]` is the (masked) input of layer `l`; the first entry
    /// is the network input.
    layer_inputs: Vec<Vec<f64>>,
    /// ReLU outputs before masking, one per hidden layer.
    relu: Vec<Vec<f64>>,
    /// Dropout scale factors per hidden layer, `None` when no mask was drawn.
    masks: Vec<Option<Vec<f64>>>,
    output: Matrix,
}

impl Tape {
    pub fn output(&self) -> &Matrix {
        &self.output
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// He-normal hidden layers, tiny uniform output layer.
    pub fn new(sizes: &[usize], output: OutputActivation, dropout_p: f64, rng: &mut NetRng) -> Result<Self> {
        let mut net = Self::zeros(sizes, output, dropout_p)?;
        let n_layers = sizes.len() - 1;
        let mut offset = 0;
        for l in 0..n_layers {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let (w, rest) = net.params[offset..].split_at_mut(fan_in * fan_out);
            let b = &mut rest[..fan_out];
            if l + 1 < n_layers {
                let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
                w.iter_mut().for_each(|x| *x = normal.sample(rng));
            } else {
                for x in w.iter_mut().chain(b.iter_mut()) {
                    *x = rng.random_range(-OUTPUT_INIT_SCALE..=OUTPUT_INIT_SCALE);
                }
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize], output: OutputActivation, dropout_p: f64) -> Result<Self> {
        Self::from_params(sizes, output, dropout_p, vec![0.0; param_count(sizes)])
    }

    pub fn from_params(sizes: &[usize], output: OutputActivation, dropout_p: f64, params: Vec<f64>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(usage_err(format!("invalid layer sizes {sizes:?}")));
        }
        if !(0.0..1.0).contains(&dropout_p) {
            return Err(usage_err(format!("dropout_p must lie in [0, 1), got {dropout_p}")));
        }
        if params.len() != param_count(sizes) {
            return Err(usage_err(format!(
                "{} parameters supplied for sizes {sizes:?} (expected {})",
                params.len(),
                param_count(sizes)
            )));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
            output,
            dropout_p,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn dropout_p(&self) -> f64 {
        self.dropout_p
    }

    pub fn set_dropout_p(&mut self, p: f64) -> Result<()> {
        if !(0.0..1.0).contains(&p) {
            return Err(usage_err(format!("dropout_p must lie in [0, 1), got {p}")));
        }
        self.dropout_p = p;
        Ok(())
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// `(weights, biases)` of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let offset = self.layer_offset(l);
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let (w, rest) = self.params[offset..].split_at(i * o);
        (w, &rest[..o])
    }

    fn layer_offset(&self, l: usize) -> usize {
        param_count(&self.sizes[..=l])
    }

    /// Forward a single input vector.
    pub fn forward(&self, input: &[f64], mode: DropoutMode<'_>) -> Result<Vec<f64>> {
        let x = Matrix::from_vec(1, input.len(), input.to_vec())?;
        Ok(self.forward_tape(&x, mode)?.output.into_vec())
    }

    pub fn forward_batch(&self, input: &Matrix, mode: DropoutMode<'_>) -> Result<Matrix> {
        Ok(self.forward_tape(input, mode)?.output)
    }

    /// Forward pass that records what [`Mlp::backward`] needs.
    pub fn forward_tape(&self, input: &Matrix, mut mode: DropoutMode<'_>) -> Result<Tape> {
        if input.cols != self.input_dim() {
            return Err(usage_err(format!(
                "input has {} columns, network expects {}",
                input.cols,
                self.input_dim()
            )));
        }
        let batch = input.rows;
        let n_layers = self.sizes.len() - 1;
        let keep_scale = 1.0 / (1.0 - self.dropout_p);
        let mut layer_inputs = Vec::with_capacity(n_layers);
        let mut relu = Vec::with_capacity(n_layers - 1);
        let mut masks = Vec::with_capacity(n_layers - 1);
        let mut current = input.data.clone();

        for l in 0..n_layers {
            let (i, o) = (self.sizes[l], self.sizes[l + 1]);
            let (w, b) = self.layer(l);
            let mut z = Vec::with_capacity(batch * o);
            for _ in 0..batch {
                z.extend_from_slice(b);
            }
            // z (batch x o) += current (batch x i) * w^T
            gemm(batch, i, o, &current, (i, 1), w, (1, i), 1.0, &mut z);

            if l + 1 < n_layers {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
                let mask = match &mut mode {
                    DropoutMode::Stochastic(rng) if self.dropout_p > 0.0 => Some(
                        (0..z.len())
                            .map(|_| {
                                if rng.random::<f64>() >= self.dropout_p {
                                    keep_scale
                                } else {
                                    0.0
                                }
                            })
                            .collect::<Vec<f64>>(),
                    ),
                    _ => None,
                };
                let next = match &mask {
                    Some(m) => z.iter().zip(m).map(|(a, s)| a * s).collect(),
                    None => z.clone(),
                };
                layer_inputs.push(std::mem::replace(&mut current, next));
                relu.push(z);
                masks.push(mask);
            } else {
                if self.output == OutputActivation::Tanh {
                    z.iter_mut().for_each(|v| *v = v.tanh());
                }
                layer_inputs.push(std::mem::take(&mut current));
                current = z;
            }
        }

        Ok(Tape {
            batch,
            sizes: self.sizes.clone(),
            layer_inputs,
            relu,
            masks,
            output: Matrix {
                rows: batch,
                cols: self.output_dim(),
                data: current,
            },
        })
    }

    /// Gradients of `sum(output * upstream)` with respect to every
    /// parameter (flat layout) and to the input.
    pub fn backward(&self, tape: &Tape, upstream: &Matrix) -> Result<(Vec<f64>, Matrix)> {
        if tape.sizes != self.sizes {
            return Err(usage_err(format!(
                "tape recorded for sizes {:?}, network has {:?}",
                tape.sizes, self.sizes
            )));
        }
        if upstream.rows != tape.batch || upstream.cols != self.output_dim() {
            return Err(usage_err(format!(
                "upstream gradient is {} x {}, forward pass produced {} x {}",
                upstream.rows,
                upstream.cols,
                tape.batch,
                self.output_dim()
            )));
        }
        let batch = tape.batch;
        let n_layers = self.sizes.len() - 1;
        let mut grads = vec![0.0; self.params.len()];

        let mut delta = upstream.data.clone();
        if self.output == OutputActivation::Tanh {
            for (d, y) in delta.iter_mut().zip(&tape.output.data) {
                *d *= 1.0 - y * y;
            }
        }

        for l in (0..n_layers).rev() {
            let (i, o) = (self.sizes[l], self.sizes[l + 1]);
            let offset = self.layer_offset(l);
            let a_prev = &tape.layer_inputs[l];
            let (gw, rest) = grads[offset..].split_at_mut(i * o);
            // gw (o x i) = delta^T (o x batch) * a_prev (batch x i)
            gemm(o, batch, i, &delta, (1, o), a_prev, (i, 1), 0.0, gw);
            let gb = &mut rest[..o];
            for row in delta.chunks_exact(o) {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            // d_prev (batch x i) = delta (batch x o) * w (o x i)
            let (w, _) = self.layer(l);
            let mut d_prev = vec![0.0; batch * i];
            gemm(batch, o, i, &delta, (o, 1), w, (i, 1), 0.0, &mut d_prev);
            if l > 0 {
                let h = &tape.relu[l - 1];
                match &tape.masks[l - 1] {
                    Some(mask) => {
                        for ((d, &hv), &m) in d_prev.iter_mut().zip(h).zip(mask) {
                            *d = if hv > 0.0 { *d * m } else { 0.0 };
                        }
                    }
                    None => {
                        for (d, &hv) in d_prev.iter_mut().zip(h) {
                            if hv <= 0.0 {
                                *d = 0.0;
                            }
                        }
                    }
                }
            }
            delta = d_prev;
        }

        Ok((
            grads,
            Matrix {
                rows: batch,
                cols: self.input_dim(),
                data: delta,
            },
        ))
    }

    /// `self <- tau * live + (1 - tau) * self`, parameter by parameter.
    pub fn soft_update_from(&mut self, live: &Mlp, tau: f64) -> Result<()> {
        if live.sizes != self.sizes {
            return Err(usage_err("soft update between networks of different shapes"));
        }
        for (t, &p) in self.params.iter_mut().zip(&live.params) {
            *t = tau * p + (1.0 - tau) * *t;
        }
        Ok(())
    }
}

/// Per-output sample mean and population variance over `n_passes`
/// stochastic forward passes of the same input.
pub fn mc_statistics(net: &Mlp, input: &[f64], n_passes: usize, rng: &mut NetRng) -> Result<(Vec<f64>, Vec<f64>)> {
    if n_passes < 2 {
        return Err(usage_err(format!("mc_statistics needs at least 2 passes, got {n_passes}")));
    }
    if input.len() != net.input_dim() {
        return Err(usage_err(format!(
            "input has {} entries, network expects {}",
            input.len(),
            net.input_dim()
        )));
    }
    let mut data = Vec::with_capacity(n_passes * input.len());
    for _ in 0..n_passes {
        data.extend_from_slice(input);
    }
    let x = Matrix::from_vec(n_passes, input.len(), data)?;
    let out = net.forward_batch(&x, DropoutMode::Stochastic(rng))?;
    let k = out.cols();
    let n = n_passes as f64;
    // Deviations from the first pass keep identical samples at exactly zero variance.
    let first = out.row(0).to_vec();
    let mut shift = vec![0.0; k];
    for r in 0..n_passes {
        for ((s, v), f) in shift.iter_mut().zip(out.row(r)).zip(&first) {
            *s += v - f;
        }
    }
    shift.iter_mut().for_each(|s| *s /= n);
    let mut var = vec![0.0; k];
    for r in 0..n_passes {
        for (((acc, v), f), s) in var.iter_mut().zip(out.row(r)).zip(&first).zip(&shift) {
            let d = v - f - s;
            *acc += d * d;
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    let mean = first.iter().zip(&shift).map(|(f, s)| f + s).collect();
    Ok((mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn rng(seed: u64) -> NetRng {
        NetRng::seed_from_u64(seed)
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[5, 7, 3], OutputActivation::Tanh, 0.2).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5, 9.0], DropoutMode::Off).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let n = 4;
        let mut params = vec![0.0; n * n + n];
        for i in 0..n {
            params[i * n + i] = 1.0;
        }
        let net = Mlp::from_params(&[n, n], OutputActivation::Identity, 0.0, params).unwrap();
        let x = [0.3, -1.5, 2.0, 7.25];
        assert_eq!(net.forward(&x, DropoutMode::Off).unwrap(), x.to_vec());
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let net = Mlp::zeros(&[3, 4, 2], OutputActivation::Tanh, 0.0).unwrap();
        assert!(net.forward(&[1.0, 2.0], DropoutMode::Off).is_err());
        let other = Mlp::zeros(&[3, 5, 2], OutputActivation::Tanh, 0.0).unwrap();
        let tape = other
            .forward_tape(&Matrix::zeros(2, 3), DropoutMode::Off)
            .unwrap();
        assert!(net.backward(&tape, &Matrix::zeros(2, 2)).is_err());
        let tape = net.forward_tape(&Matrix::zeros(2, 3), DropoutMode::Off).unwrap();
        assert!(net.backward(&tape, &Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn stochastic_with_zero_p_equals_off() {
        let net = Mlp::new(&[6, 16, 16, 2], OutputActivation::Tanh, 0.0, &mut rng(1)).unwrap();
        let x = [0.1, 0.2, -0.3, 0.4, 0.5, -0.6];
        let off = net.forward(&x, DropoutMode::Off).unwrap();
        let mut r = rng(9);
        let stoch = net.forward(&x, DropoutMode::Stochastic(&mut r)).unwrap();
        assert_eq!(off, stoch);
    }

    #[test]
    fn inverted_dropout_is_unbiased() {
        // Monte-Carlo oracle: average of many masked passes vs the Off pass.
        let net = Mlp::new(&[4, 32, 3], OutputActivation::Identity, 0.2, &mut rng(2)).unwrap();
        let x = [0.7, -0.2, 1.1, 0.4];
        let off = net.forward(&x, DropoutMode::Off).unwrap();
        let n = 10_000;
        let batch = Matrix::from_vec(n, 4, x.iter().cloned().cycle().take(4 * n).collect()).unwrap();
        let mut r = rng(3);
        let out = net.forward_batch(&batch, DropoutMode::Stochastic(&mut r)).unwrap();
        let mut differs = false;
        for c in 0..3 {
            let col: Vec<f64> = (0..n).map(|i| out.get(i, c)).collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!((mean - off[c]).abs() <= 3.0 * se, "dim {c}: {mean} vs {} (se {se})", off[c]);
            differs |= col.iter().any(|v| (v - off[c]).abs() > 1e-9);
        }
        assert!(differs);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let net = Mlp::new(&[4, 8, 2], OutputActivation::Tanh, 0.0, &mut rng(4)).unwrap();
        let x = Matrix::from_vec(1, 4, vec![0.5, -0.5, 1.0, 2.0]).unwrap();
        let tape = net.forward_tape(&x, DropoutMode::Off).unwrap();
        let (g, gx) = net.backward(&tape, &Matrix::zeros(1, 2)).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
        assert!(gx.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn duplicated_example_doubles_gradient() {
        let net = Mlp::new(&[4, 8, 2], OutputActivation::Tanh, 0.0, &mut rng(5)).unwrap();
        let row = [0.5, -0.5, 1.0, 2.0];
        let up = [0.3, -1.2];
        let single = net
            .backward(
                &net.forward_tape(&Matrix::from_rows(&[row]).unwrap(), DropoutMode::Off).unwrap(),
                &Matrix::from_rows(&[up]).unwrap(),
            )
            .unwrap()
            .0;
        let double = net
            .backward(
                &net.forward_tape(&Matrix::from_rows(&[row, row]).unwrap(), DropoutMode::Off).unwrap(),
                &Matrix::from_rows(&[up, up]).unwrap(),
            )
            .unwrap()
            .0;
        for (s, d) in single.iter().zip(&double) {
            assert_abs_diff_eq!(2.0 * s, *d, epsilon = 1e-12);
        }
    }

    #[test]
    fn soft_update_extremes() {
        let live = Mlp::new(&[3, 5, 2], OutputActivation::Tanh, 0.2, &mut rng(6)).unwrap();
        let target0 = Mlp::new(&[3, 5, 2], OutputActivation::Tanh, 0.2, &mut rng(7)).unwrap();
        let mut t = target0.clone();
        t.soft_update_from(&live, 1.0).unwrap();
        assert_eq!(t.params(), live.params());
        let mut t = target0.clone();
        t.soft_update_from(&live, 0.0).unwrap();
        assert_eq!(t.params(), target0.params());
        let mut t = target0.clone();
        t.soft_update_from(&live, 0.25).unwrap();
        for ((a, b), c) in t.params().iter().zip(live.params()).zip(target0.params()) {
            assert_eq!(*a, 0.25 * b + 0.75 * c);
        }
    }

    #[test]
    fn mc_statistics_without_dropout_is_exact() {
        let net = Mlp::new(&[4, 16, 2], OutputActivation::Tanh, 0.0, &mut rng(8)).unwrap();
        let x = [0.1, 0.9, -0.4, 0.3];
        let (mean, var) = mc_statistics(&net, &x, 100, &mut rng(1)).unwrap();
        assert_eq!(var, vec![0.0, 0.0]);
        let det = net.forward(&x, DropoutMode::Off).unwrap();
        for (m, d) in mean.iter().zip(&det) {
            assert_abs_diff_eq!(m, d, epsilon = 1e-15);
        }
        assert!(mc_statistics(&net, &x, 1, &mut rng(1)).is_err());
    }

    #[test]
    fn mc_statistics_is_reproducible_and_bounded() {
        let mut net = Mlp::new(&[4, 16, 16, 2], OutputActivation::Tanh, 0.5, &mut rng(10)).unwrap();
        // Large output weights push tanh into saturation, the worst case for the bound.
        let n = net.num_params();
        let out_len = 16 * 2 + 2;
        for p in &mut net.params_mut()[n - out_len..] {
            *p = 40.0 * p.signum().max(0.0) - 20.0;
        }
        let x = [0.5, -0.2, 0.8, 0.1];
        let a = mc_statistics(&net, &x, 100, &mut rng(11)).unwrap();
        let b = mc_statistics(&net, &x, 100, &mut rng(11)).unwrap();
        assert_eq!(a, b);
        assert!(a.1.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn bernoulli_single_unit_variance() {
        // 1 input -> 1 hidden (relu, weight 1) -> 1 output (weight w), p = 0.5.
        // Output is 0 or 2*w*h with equal probability: variance (w*h)^2.
        let (w, h) = (0.7, 1.3);
        let net = Mlp::from_params(&[1, 1, 1], OutputActivation::Identity, 0.5, vec![1.0, 0.0, w, 0.0]).unwrap();
        let (mean, var) = mc_statistics(&net, &[h], 100_000, &mut rng(12)).unwrap();
        let expected = (w * h).powi(2);
        assert!((var[0] - expected).abs() / expected < 0.05, "var {} vs {expected}", var[0]);
        assert!((mean[0] - w * h).abs() / (w * h) < 0.05);
    }
}
