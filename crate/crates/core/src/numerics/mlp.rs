use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Matrix, Seed};
use crate::error::{shape_err, Error, Result};

static NEXT_STAMP: AtomicU64 = AtomicU64::new(1);

fn fresh_stamp() -> u64 {
    NEXT_STAMP.fetch_add(1, Ordering::Relaxed)
}

/// Nonlinearity applied after every hidden layer. The output layer is linear.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - out * out,
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            _ => None,
        }
    }
}

/// Fully connected feedforward network with a linear output layer.
///
/// `weights[i]` has shape `dims[i] × dims[i + 1]`, so a batch is mapped as
/// `act(X · W + b)` row by row.
#[derive(Debug, Clone)]
pub struct Mlp {
    dims: Vec<usize>,
    pub(crate) weights: Vec<Matrix>,
    pub(crate) biases: Vec<Vec<f64>>,
    hidden: Activation,
    stamp: u64,
}

/// Activations recorded by [`Mlp::forward`] for a later backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    acts: Vec<Matrix>,
    stamp: u64,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.acts.last().expect("cache holds at least the input")
    }
}

/// Parameter gradients, shape-congruent with the model that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl GradientSet {
    pub fn zeros_like(model: &Mlp) -> Self {
        Self {
            weights: model
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &GradientSet) -> Result<()> {
        if !self.congruent(other) {
            return Err(shape_err(
                "GradientSet::add_assign",
                "congruent sets",
                "mismatch",
            ));
        }
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            a.add_assign(b)?;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for v in w.data_mut() {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= s;
            }
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .flat_map(|w| w.data().iter().copied())
            .chain(self.biases.iter().flat_map(|b| b.iter().copied()))
    }

    pub fn norm(&self) -> f64 {
        self.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    pub fn congruent(&self, other: &GradientSet) -> bool {
        self.weights.len() == other.weights.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.shape() == b.shape())
            && self
                .biases
                .iter()
                .zip(&other.biases)
                .all(|(a, b)| a.len() == b.len())
    }

    pub(crate) fn congruent_with(&self, model: &Mlp) -> bool {
        self.congruent(&GradientSet::zeros_like(model))
    }
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new(dims: &[usize], hidden: Activation, seed: Seed) -> Result<Self> {
        let mut rng = seed.rng();
        Self::with_rng(dims, hidden, &mut rng)
    }

    pub fn with_rng<R: Rng + ?Sized>(
        dims: &[usize],
        hidden: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "an MLP needs at least input and output dims, got {dims:?}"
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!(
                "zero-width layer in {dims:?}"
            )));
        }
        let mut weights = Vec::with_capacity(dims.len() - 1);
        let mut biases = Vec::with_capacity(dims.len() - 1);
        for pair in dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            weights.push(Matrix::from_raw(fan_in, fan_out, data));
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            dims: dims.to_vec(),
            weights,
            biases,
            hidden,
            stamp: fresh_stamp(),
        })
    }

    /// Builds a model from explicit parameters.
    pub fn from_parameters(
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
        hidden: Activation,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::InvalidArgument(
                "need one bias vector per weight matrix".into(),
            ));
        }
        let mut dims = vec![weights[0].rows()];
        for (i, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.rows() != *dims.last().unwrap() || b.len() != w.cols() || w.cols() == 0 {
                return Err(shape_err(
                    "Mlp::from_parameters",
                    format!("layer {i} input {}", dims.last().unwrap()),
                    format!("{}x{} with bias {}", w.rows(), w.cols(), b.len()),
                ));
            }
            dims.push(w.cols());
        }
        if biases.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Mlp biases".into()));
        }
        Ok(Self {
            dims,
            weights,
            biases,
            hidden,
            stamp: fresh_stamp(),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn activation(&self) -> Activation {
        self.hidden
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn num_parameters(&self) -> usize {
        self.weights.iter().map(|w| w.data().len()).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Marks the parameters as changed; invalidates outstanding caches.
    pub(crate) fn touch(&mut self) {
        self.stamp = fresh_stamp();
    }

    /// Sets every parameter to zero.
    pub fn zero_parameters(&mut self) {
        for w in &mut self.weights {
            w.data_mut().fill(0.0);
        }
        for b in &mut self.biases {
            b.fill(0.0);
        }
        self.touch();
    }

    fn check_input(&self, input: &Matrix) -> Result<()> {
        if input.cols() != self.dims[0] {
            return Err(shape_err(
                "Mlp::forward",
                format!("{} input columns", self.dims[0]),
                format!("{} columns", input.cols()),
            ));
        }
        Ok(())
    }

    fn layer(&self, i: usize, x: &Matrix) -> Result<Matrix> {
        let mut h = x.matmul(&self.weights[i])?;
        h.add_row_vector(&self.biases[i])?;
        if i + 1 < self.weights.len() {
            let act = self.hidden;
            for v in h.data_mut() {
                *v = act.apply(*v);
            }
        }
        Ok(h)
    }

    /// Forward pass without recording activations.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        self.check_input(input)?;
        let mut h = self.layer(0, input)?;
        for i in 1..self.weights.len() {
            h = self.layer(i, &h)?;
        }
        if !h.is_finite() {
            return Err(Error::NonFinite("Mlp forward output".into()));
        }
        Ok(h)
    }

    /// Forward pass that keeps what [`Mlp::backward`] needs.
    pub fn forward(&self, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
        self.check_input(input)?;
        let mut acts = Vec::with_capacity(self.weights.len() + 1);
        acts.push(input.clone());
        for i in 0..self.weights.len() {
            let h = self.layer(i, acts.last().unwrap())?;
            acts.push(h);
        }
        let out = acts.last().unwrap().clone();
        if !out.is_finite() {
            return Err(Error::NonFinite("Mlp forward output".into()));
        }
        Ok((
            out,
            ForwardCache {
                acts,
                stamp: self.stamp,
            },
        ))
    }

    /// Reverse-mode gradients of a scalar loss given `dL/d(output)`.
    /// Returns parameter gradients and `dL/d(input)`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &Matrix,
    ) -> Result<(GradientSet, Matrix)> {
        let (params, input) = self.backprop(cache, output_grad, true)?;
        Ok((params.expect("requested"), input))
    }

    /// `dL/d(input)` only; skips the parameter gradients.
    pub fn input_gradient(&self, cache: &ForwardCache, output_grad: &Matrix) -> Result<Matrix> {
        Ok(self.backprop(cache, output_grad, false)?.1)
    }

    fn backprop(
        &self,
        cache: &ForwardCache,
        output_grad: &Matrix,
        want_params: bool,
    ) -> Result<(Option<GradientSet>, Matrix)> {
        if cache.stamp != self.stamp || cache.acts.len() != self.weights.len() + 1 {
            return Err(Error::StaleCache);
        }
        let out = cache.output();
        if output_grad.shape() != out.shape() {
            return Err(shape_err(
                "Mlp::backward",
                format!("{}x{}", out.rows(), out.cols()),
                format!("{}x{}", output_grad.rows(), output_grad.cols()),
            ));
        }
        let n_layers = self.weights.len();
        let mut grads = want_params.then(|| GradientSet::zeros_like(self));
        let mut delta = output_grad.clone();
        for l in (0..n_layers).rev() {
            if l + 1 < n_layers {
                let act = self.hidden;
                for (d, &o) in delta.data_mut().iter_mut().zip(cache.acts[l + 1].data()) {
                    *d *= act.derivative_from_output(o);
                }
            }
            if let Some(g) = grads.as_mut() {
                g.weights[l] = cache.acts[l].t_matmul(&delta)?;
                g.biases[l] = delta.column_sums();
            }
            delta = delta.matmul_t(&self.weights[l])?;
        }
        if let Some(g) = &grads {
            if !g.is_finite() {
                return Err(Error::NonFinite("Mlp gradients".into()));
            }
        }
        if !delta.is_finite() {
            return Err(Error::NonFinite("Mlp input gradient".into()));
        }
        Ok((grads, delta))
    }
}
