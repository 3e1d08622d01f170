//! A minimal feed-forward network over a flat parameter vector.
//!
//! Each affine layer maps `in_width -> out_width`; hidden layers apply ReLU and
//! the last layer is left linear so its outputs are logits. Parameters live in a
//! single [`WeightVector`] laid out layer by layer: the `in_width x out_width`
//! matrix in row-major order (row = input unit), followed by the `out_width`
//! bias entries. Averaging, distances and checkpoints all operate on this flat
//! view without knowing anything about the network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }
}

/// Shape of an MLP: one `(in_width, out_width)` pair per affine layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, usize)>", into = "Vec<(usize, usize)>")]
pub struct LayerLayout {
    dims: Vec<(usize, usize)>,
}

impl LayerLayout {
    pub fn new(dims: Vec<(usize, usize)>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::config("layout needs at least one layer"));
        }
        for (i, &(fan_in, fan_out)) in dims.iter().enumerate() {
            if fan_in == 0 || fan_out == 0 {
                return Err(Error::config(format!(
                    "layer {i} has a zero width ({fan_in} -> {fan_out})"
                )));
            }
        }
        for (i, pair) in dims.windows(2).enumerate() {
            if pair[0].1 != pair[1].0 {
                return Err(Error::config(format!(
                    "layer {i} outputs {} units but layer {} expects {}",
                    pair[0].1,
                    i + 1,
                    pair[1].0
                )));
            }
        }
        Ok(Self { dims })
    }

    /// Builds a layout from a width chain such as `[16, 64, 10]`.
    pub fn from_widths(widths: &[usize]) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::config(
                "width chain needs an input and an output width",
            ));
        }
        Self::new(widths.windows(2).map(|w| (w[0], w[1])).collect())
    }

    pub fn dims(&self) -> &[(usize, usize)] {
        &self.dims
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len()
    }

    pub fn input_width(&self) -> usize {
        self.dims[0].0
    }

    pub fn output_width(&self) -> usize {
        self.dims[self.dims.len() - 1].1
    }

    /// The width chain, inverse of [`LayerLayout::from_widths`].
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.dims[0].0)
            .chain(self.dims.iter().map(|d| d.1))
            .collect()
    }

    pub fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.dims.len() {
            Activation::Identity
        } else {
            Activation::Relu
        }
    }

    /// Σ (in·out + out) over layers.
    pub fn param_count(&self) -> usize {
        self.dims.iter().map(|&(i, o)| i * o + o).sum()
    }

    /// Offsets of each layer's matrix block and bias block within the flat vector.
    fn blocks(&self) -> Vec<LayerBlock> {
        let mut offset = 0;
        self.dims
            .iter()
            .map(|&(fan_in, fan_out)| {
                let block = LayerBlock {
                    fan_in,
                    fan_out,
                    weight: offset,
                    bias: offset + fan_in * fan_out,
                };
                offset = block.bias + fan_out;
                block
            })
            .collect()
    }
}

impl TryFrom<Vec<(usize, usize)>> for LayerLayout {
    type Error = Error;

    fn try_from(dims: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<LayerLayout> for Vec<(usize, usize)> {
    fn from(layout: LayerLayout) -> Self {
        layout.dims
    }
}

impl std::fmt::Display for LayerLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let widths: Vec<String> = self.widths().iter().map(usize::to_string).collect();
        f.write_str(&widths.join("->"))
    }
}

#[derive(Debug, Clone, Copy)]
struct LayerBlock {
    fan_in: usize,
    fan_out: usize,
    weight: usize,
    bias: usize,
}

/// Flat parameter vector of one model together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    layout: LayerLayout,
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(layout: LayerLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.param_count() {
            return Err(Error::Dimension {
                what: "weight vector length",
                expected: layout.param_count(),
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "weight entry {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { layout, values })
    }

    pub fn zeros(layout: LayerLayout) -> Self {
        let values = vec![0.0; layout.param_count()];
        Self { layout, values }
    }

    pub fn layout(&self) -> &LayerLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Replaces the values, keeping the layout. Callers must uphold finiteness.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn ensure_same_layout(&self, other: &WeightVector) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!(
                "{} vs {}",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    /// Overwrites this vector with `other`, reusing the allocation.
    pub fn assign(&mut self, other: &WeightVector) -> Result<()> {
        self.ensure_same_layout(other)?;
        self.values.copy_from_slice(&other.values);
        Ok(())
    }
}

/// Glorot-uniform matrices, zero biases, fully determined by `seed`.
pub fn init_weights(layout: &LayerLayout, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; layout.param_count()];
    for block in layout.blocks() {
        let bound = (6.0 / (block.fan_in + block.fan_out) as f64).sqrt();
        for v in &mut values[block.weight..block.bias] {
            *v = rng.random_range(-bound..bound);
        }
    }
    WeightVector {
        layout: layout.clone(),
        values,
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                what: "matrix data length",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// A mini-batch of `n` feature rows with their class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    inputs: Matrix,
    labels: Vec<usize>,
}

impl Batch {
    pub fn new(inputs: Vec<f64>, width: usize, labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::config("batch must contain at least one row"));
        }
        if width == 0 {
            return Err(Error::config("batch feature width must be at least 1"));
        }
        let inputs = Matrix::new(labels.len(), width, inputs)?;
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.inputs.cols
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

fn check_input(w: &WeightVector, batch: &Batch) -> Result<()> {
    if batch.width() != w.layout.input_width() {
        return Err(Error::Dimension {
            what: "batch feature width",
            expected: w.layout.input_width(),
            actual: batch.width(),
        });
    }
    Ok(())
}

/// Applies one affine layer (+ activation) to every row of `input`.
/// Returns `(pre_activation, post_activation)`.
fn affine(w: &[f64], block: LayerBlock, act: Activation, input: &Matrix) -> (Matrix, Matrix) {
    let weights = &w[block.weight..block.bias];
    let bias = &w[block.bias..block.bias + block.fan_out];
    let mut pre = Matrix::zeros(input.rows, block.fan_out);
    for r in 0..input.rows {
        let out = &mut pre.data[r * block.fan_out..(r + 1) * block.fan_out];
        out.copy_from_slice(bias);
        for (i, &a) in input.row(r).iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let w_row = &weights[i * block.fan_out..(i + 1) * block.fan_out];
            for (o, &wij) in out.iter_mut().zip(w_row) {
                *o += a * wij;
            }
        }
    }
    let post = match act {
        Activation::Identity => pre.clone(),
        Activation::Relu => Matrix {
            rows: pre.rows,
            cols: pre.cols,
            data: pre.data.iter().map(|&x| act.apply(x)).collect(),
        },
    };
    (pre, post)
}

/// Logits (`n x C`) for every row of the batch.
pub fn forward(w: &WeightVector, batch: &Batch) -> Result<Matrix> {
    check_input(w, batch)?;
    let mut current = batch.inputs.clone();
    for (l, block) in w.layout.blocks().into_iter().enumerate() {
        let (_, post) = affine(&w.values, block, w.layout.activation(l), &current);
        current = post;
    }
    Ok(current)
}

/// Mean softmax cross-entropy over the batch and its analytic gradient.
pub fn loss_and_grad(w: &WeightVector, batch: &Batch) -> Result<(f64, Vec<f64>)> {
    check_input(w, batch)?;
    let classes = w.layout.output_width();
    if let Some(&bad) = batch.labels.iter().find(|&&y| y >= classes) {
        return Err(Error::Dimension {
            what: "label (must be below the output width)",
            expected: classes,
            actual: bad,
        });
    }
    let blocks = w.layout.blocks();

    // Keep every layer's input and pre-activation for the backward pass.
    let mut inputs = Vec::with_capacity(blocks.len());
    let mut pres = Vec::with_capacity(blocks.len());
    let mut current = batch.inputs.clone();
    for (l, &block) in blocks.iter().enumerate() {
        let (pre, post) = affine(&w.values, block, w.layout.activation(l), &current);
        inputs.push(current);
        pres.push(pre);
        current = post;
    }
    let logits = current;

    let n = batch.len();
    let scale = 1.0 / n as f64;
    let mut loss = 0.0;
    // dL/dlogits = (softmax - onehot) / n
    let mut delta = Matrix::zeros(n, classes);
    for (r, &y) in batch.labels.iter().enumerate() {
        let z = logits.row(r);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let d = &mut delta.data[r * classes..(r + 1) * classes];
        let mut sum = 0.0;
        for (dk, &zk) in d.iter_mut().zip(z) {
            *dk = (zk - max).exp();
            sum += *dk;
        }
        loss += sum.ln() + max - z[y];
        for dk in d.iter_mut() {
            *dk *= scale / sum;
        }
        d[y] -= scale;
    }
    loss *= scale;

    let mut grad = vec![0.0; w.values.len()];
    for l in (0..blocks.len()).rev() {
        let block = blocks[l];
        let input = &inputs[l];
        let (g_w, g_rest) = grad[block.weight..].split_at_mut(block.bias - block.weight);
        let g_b = &mut g_rest[..block.fan_out];
        for r in 0..n {
            let d = delta.row(r);
            for (gb, &dk) in g_b.iter_mut().zip(d) {
                *gb += dk;
            }
            for (i, &a) in input.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let g_row = &mut g_w[i * block.fan_out..(i + 1) * block.fan_out];
                for (g, &dk) in g_row.iter_mut().zip(d) {
                    *g += a * dk;
                }
            }
        }
        if l == 0 {
            break;
        }
        // Propagate through W^T and the previous layer's ReLU.
        let weights = &w.values[block.weight..block.bias];
        let prev_pre = &pres[l - 1];
        let mut prev = Matrix::zeros(n, block.fan_in);
        for r in 0..n {
            let d = delta.row(r);
            let z_prev = prev_pre.row(r);
            let out = &mut prev.data[r * block.fan_in..(r + 1) * block.fan_in];
            for (i, o) in out.iter_mut().enumerate() {
                if z_prev[i] <= 0.0 {
                    continue;
                }
                let w_row = &weights[i * block.fan_out..(i + 1) * block.fan_out];
                *o = w_row.iter().zip(d).map(|(a, b)| a * b).sum();
            }
        }
        delta = prev;
    }
    Ok((loss, grad))
}

/// Momentum SGD: `v <- momentum * v + g; w <- w - lr * v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdState {
    learning_rate: f64,
    momentum: f64,
    velocity: Vec<f64>,
}

impl SgdState {
    pub fn new(learning_rate: f64, momentum: f64, len: usize) -> Result<Self> {
        if !(learning_rate.is_finite() && learning_rate >= 0.0) {
            return Err(Error::config(format!(
                "learning rate must be finite and non-negative, got {learning_rate}"
            )));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::config(format!(
                "momentum must lie in [0, 1), got {momentum}"
            )));
        }
        Ok(Self {
            learning_rate,
            momentum,
            velocity: vec![0.0; len],
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn reset(&mut self) {
        self.velocity.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn set_velocity(&mut self, velocity: &[f64]) -> Result<()> {
        if velocity.len() != self.velocity.len() {
            return Err(Error::Dimension {
                what: "velocity length",
                expected: self.velocity.len(),
                actual: velocity.len(),
            });
        }
        self.velocity.copy_from_slice(velocity);
        Ok(())
    }

    /// In-place update. On error nothing is modified.
    pub fn step(&mut self, weights: &mut WeightVector, grad: &[f64]) -> Result<()> {
        if grad.len() != weights.len() || self.velocity.len() != weights.len() {
            return Err(Error::Dimension {
                what: "gradient/velocity length",
                expected: weights.len(),
                actual: if grad.len() != weights.len() {
                    grad.len()
                } else {
                    self.velocity.len()
                },
            });
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "gradient entry {i} is not finite ({})",
                grad[i]
            )));
        }
        for ((v, w), &g) in self.velocity.iter_mut().zip(weights.values_mut()).zip(grad) {
            *v = self.momentum * *v + g;
            *w -= self.learning_rate * *v;
        }
        if let Some(i) = weights.values.iter().position(|w| !w.is_finite()) {
            return Err(Error::Numeric(format!("weight entry {i} diverged")));
        }
        Ok(())
    }
}

/// Value-returning form of [`SgdState::step`].
pub fn sgd_step(
    w: &WeightVector,
    grad: &[f64],
    state: &SgdState,
) -> Result<(WeightVector, SgdState)> {
    let mut w = w.clone();
    let mut state = state.clone();
    state.step(&mut w, grad)?;
    Ok((w, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(widths: &[usize]) -> LayerLayout {
        LayerLayout::from_widths(widths).unwrap()
    }

    #[test]
    fn layout_rejects_broken_chains() {
        assert!(LayerLayout::new(vec![]).is_err());
        assert!(LayerLayout::new(vec![(2, 3), (4, 2)]).is_err());
        assert!(LayerLayout::new(vec![(2, 0)]).is_err());
        assert_eq!(layout(&[2, 3, 2]).param_count(), 2 * 3 + 3 + 3 * 2 + 2);
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let l = layout(&[4, 5, 3]);
        let a = init_weights(&l, 11);
        let b = init_weights(&l, 11);
        assert_eq!(a, b);
        assert_ne!(a, init_weights(&l, 12));
        for block in l.blocks() {
            assert!(a.values()[block.bias..block.bias + block.fan_out]
                .iter()
                .all(|&v| v == 0.0));
        }
    }

    #[test]
    fn init_respects_glorot_bound() {
        let l = layout(&[2, 3, 2]);
        let w = init_weights(&l, 7);
        // fan_in + fan_out = 5 for both layers.
        let bound = (6.0f64 / 5.0).sqrt();
        assert!((bound - 1.0954).abs() < 1e-4);
        for block in l.blocks() {
            for &v in &w.values()[block.weight..block.bias] {
                assert!(v > -bound && v < bound, "{v}");
            }
        }
    }

    #[test]
    fn zero_weights_give_zero_logits() {
        let w = WeightVector::zeros(layout(&[3, 4, 2]));
        let batch = Batch::new(vec![1.0, -2.0, 0.5, 3.0, 3.0, 3.0], 3, vec![0, 1]).unwrap();
        let logits = forward(&w, &batch).unwrap();
        assert!(logits.as_slice().iter().all(|&z| z == 0.0));
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let w = WeightVector::new(layout(&[2, 2]), vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let batch = Batch::new(vec![3.0, -1.0], 2, vec![0]).unwrap();
        assert_eq!(forward(&w, &batch).unwrap().row(0), &[3.0, -1.0]);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let w = WeightVector::zeros(layout(&[3, 2]));
        let batch = Batch::new(vec![1.0, 2.0], 2, vec![0]).unwrap();
        assert!(matches!(forward(&w, &batch), Err(Error::Dimension { .. })));
    }

    #[test]
    fn uniform_softmax_loss_is_ln_c() {
        let w = WeightVector::zeros(layout(&[3, 10]));
        let batch = Batch::new(vec![0.3, -1.0, 2.0, 5.0, 1.0, 1.0], 3, vec![4, 9]).unwrap();
        let (loss, _) = loss_and_grad(&w, &batch).unwrap();
        assert!((loss - 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn loss_rejects_out_of_range_label() {
        let w = WeightVector::zeros(layout(&[2, 3]));
        let batch = Batch::new(vec![0.0, 0.0], 2, vec![3]).unwrap();
        assert!(loss_and_grad(&w, &batch).is_err());
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let w = WeightVector::new(layout(&[1, 2]), vec![1000.0, -1000.0, 0.0, 0.0]).unwrap();
        let batch = Batch::new(vec![5.0], 1, vec![1]).unwrap();
        let (loss, grad) = loss_and_grad(&w, &batch).unwrap();
        assert!((loss - 10_000.0).abs() < 1e-6);
        assert!(grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn duplicated_rows_leave_loss_and_grad_unchanged() {
        let l = layout(&[3, 5, 4]);
        let w = init_weights(&l, 3);
        let inputs = vec![0.5, -1.0, 2.0, 1.5, 0.2, -0.7, -2.0, 1.0, 0.0];
        let labels = vec![0, 3, 2];
        let once = Batch::new(inputs.clone(), 3, labels.clone()).unwrap();
        let twice = Batch::new(
            inputs.iter().chain(&inputs).copied().collect(),
            3,
            labels.iter().chain(&labels).copied().collect(),
        )
        .unwrap();
        let (l1, g1) = loss_and_grad(&w, &once).unwrap();
        let (l2, g2) = loss_and_grad(&w, &twice).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sgd_zero_learning_rate_is_a_no_op() {
        let w = init_weights(&layout(&[2, 2]), 1);
        let state = SgdState::new(0.0, 0.9, w.len()).unwrap();
        let grad = vec![0.3; w.len()];
        let (w2, _) = sgd_step(&w, &grad, &state).unwrap();
        assert_eq!(w.values(), w2.values());
    }

    #[test]
    fn sgd_plain_and_momentum_arithmetic() {
        let l = LayerLayout::new(vec![(1, 1)]).unwrap();
        // Single layer 1->1 has two parameters; only the first is exercised.
        let w = WeightVector::new(l.clone(), vec![1.0, 0.0]).unwrap();
        let state = SgdState::new(0.1, 0.0, 2).unwrap();
        let (w1, _) = sgd_step(&w, &[2.0, 0.0], &state).unwrap();
        assert!((w1.values()[0] - 0.8).abs() < 1e-15);

        let w = WeightVector::zeros(l);
        let state = SgdState::new(0.1, 0.9, 2).unwrap();
        let (w1, s1) = sgd_step(&w, &[1.0, 0.0], &state).unwrap();
        let (w2, _) = sgd_step(&w1, &[1.0, 0.0], &s1).unwrap();
        assert!((w1.values()[0] + 0.1).abs() < 1e-15);
        assert!((w2.values()[0] + 0.29).abs() < 1e-15);
    }

    #[test]
    fn sgd_rejects_non_finite_gradient() {
        let w = WeightVector::zeros(layout(&[1, 1]));
        let state = SgdState::new(0.1, 0.0, 2).unwrap();
        let err = sgd_step(&w, &[f64::NAN, 0.0], &state).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn sgd_state_validates_hyper_parameters() {
        assert!(SgdState::new(-0.1, 0.0, 1).is_err());
        assert!(SgdState::new(0.1, 1.0, 1).is_err());
    }
}
