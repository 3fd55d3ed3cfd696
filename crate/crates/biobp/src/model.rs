//! The multilayer perceptron all four credit-assignment rules act on:
//! sigmoid hidden layers, softmax output, cross-entropy loss, and a forward
//! pass that records the full per-layer trace the backward rules consume.

use std::cell::Cell;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Magic bytes at the start of a checkpoint file.
pub const CHECKPOINT_MAGIC: &[u8; 6] = b"BIOBP1";

thread_local! {
    static SIGMOID_PRIME_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// How many times [`sigmoid_prime`] has run on the current thread since the
/// last reset.
///
/// The temporal-differencing rules claim to need no activation derivative;
/// this counter lets tests assert their backward paths really never touch it.
/// Per-thread on purpose: a run owns its thread, so the count isolates that
/// run's code path.
pub fn sigmoid_prime_call_count() -> u64 {
    SIGMOID_PRIME_CALLS.with(|c| c.get())
}

/// Resets [`sigmoid_prime_call_count`] for the current thread.
pub fn reset_sigmoid_prime_call_count() {
    SIGMOID_PRIME_CALLS.with(|c| c.set(0));
}

fn sigmoid_scalar(z: f64) -> f64 {
    // Two-branch form: never exponentiates a large positive argument.
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Elementwise logistic sigmoid.
pub fn sigmoid(z: &Matrix) -> Matrix {
    z.map(sigmoid_scalar)
}

/// Elementwise sigmoid derivative, `sigma(z) * (1 - sigma(z))`.
pub fn sigmoid_prime(z: &Matrix) -> Matrix {
    SIGMOID_PRIME_CALLS.with(|c| c.set(c.get() + 1));
    z.map(|v| {
        let s = sigmoid_scalar(v);
        s * (1.0 - s)
    })
}

/// Row-wise softmax with max-subtraction stabilization.
pub fn softmax_rows(z: &Matrix) -> Matrix {
    let mut data = Vec::with_capacity(z.rows() * z.cols());
    for i in 0..z.rows() {
        let row = z.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        data.extend(exps.iter().map(|&e| e / sum));
    }
    Matrix::from_vec(z.rows(), z.cols(), data).expect("softmax outputs are finite")
}

/// Mean cross-entropy of softmax outputs against one-hot targets, with
/// probabilities floored at 1e-12 before the log.
pub fn cross_entropy(probs: &Matrix, targets: &Matrix) -> Result<f64> {
    if probs.shape() != targets.shape() {
        return Err(Error::shape("cross_entropy", probs.shape(), targets.shape()));
    }
    let mut total = 0.0;
    for i in 0..probs.rows() {
        for (&p, &t) in probs.row(i).iter().zip(targets.row(i)) {
            if t != 0.0 {
                total -= t * p.max(1e-12).ln();
            }
        }
    }
    Ok(total / probs.rows() as f64)
}

/// Fraction of rows whose argmax matches the target argmax; ties break toward
/// the lowest index.
pub fn accuracy(probs: &Matrix, targets: &Matrix) -> Result<f64> {
    if probs.shape() != targets.shape() {
        return Err(Error::shape("accuracy", probs.shape(), targets.shape()));
    }
    let mut hits = 0usize;
    for i in 0..probs.rows() {
        if argmax(probs.row(i)) == argmax(targets.row(i)) {
            hits += 1;
        }
    }
    Ok(hits as f64 / probs.rows() as f64)
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = j;
        }
    }
    best
}

/// Layer widths plus per-layer forward weights and biases.
///
/// `W[l]` is `(sizes[l+1] x sizes[l])`; `b[l]` is a `1 x sizes[l+1]` row.
/// Hidden layers are sigmoid, the output layer softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    weights: Vec<Matrix>,
    biases: Vec<Matrix>,
}

/// Per-layer record of one forward pass over a minibatch.
///
/// `pre[l]` and `post[l]` are the pre-activation and activation of layer
/// `l+1` (the input batch itself is layer 0).
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    input: Matrix,
    pre: Vec<Matrix>,
    post: Vec<Matrix>,
}

/// Draws an MLP with weights uniform in `[-1/sqrt(fan_in), +1/sqrt(fan_in)]`
/// from the "init" substream of `seed`; biases start at zero.
pub fn init_mlp(sizes: &[usize], seed: u64) -> Result<Mlp> {
    validate_sizes(sizes)?;
    let mut rng = Rng::substream(seed, "init");
    let mut weights = Vec::with_capacity(sizes.len() - 1);
    let mut biases = Vec::with_capacity(sizes.len() - 1);
    for l in 0..sizes.len() - 1 {
        let bound = 1.0 / (sizes[l] as f64).sqrt();
        weights.push(Matrix::rand_uniform(
            &mut rng,
            sizes[l + 1],
            sizes[l],
            -bound,
            bound,
        )?);
        biases.push(Matrix::zeros(1, sizes[l + 1]));
    }
    Ok(Mlp {
        sizes: sizes.to_vec(),
        weights,
        biases,
    })
}

pub(crate) fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::Param(format!(
            "need at least input and output layers, got {sizes:?}"
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::Param(format!("zero-width layer in {sizes:?}")));
    }
    Ok(())
}

impl Mlp {
    /// Builds an MLP from explicit parameters (mostly for tests and
    /// checkpoint loading).
    pub fn from_parts(sizes: Vec<usize>, weights: Vec<Matrix>, biases: Vec<Matrix>) -> Result<Mlp> {
        validate_sizes(&sizes)?;
        if weights.len() != sizes.len() - 1 || biases.len() != sizes.len() - 1 {
            return Err(Error::Param("layer count mismatch".into()));
        }
        for l in 0..weights.len() {
            if weights[l].shape() != (sizes[l + 1], sizes[l]) {
                return Err(Error::shape(
                    "from_parts weights",
                    weights[l].shape(),
                    (sizes[l + 1], sizes[l]),
                ));
            }
            if biases[l].shape() != (1, sizes[l + 1]) {
                return Err(Error::shape(
                    "from_parts biases",
                    biases[l].shape(),
                    (1, sizes[l + 1]),
                ));
            }
        }
        Ok(Mlp {
            sizes,
            weights,
            biases,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of weight layers (`sizes.len() - 1`).
    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Matrix] {
        &self.biases
    }

    pub fn weight_mut(&mut self, l: usize) -> &mut Matrix {
        &mut self.weights[l]
    }

    pub fn bias_mut(&mut self, l: usize) -> &mut Matrix {
        &mut self.biases[l]
    }

    /// Forward pass over a batch (rows are examples), recording the full
    /// trace: `z_l = y_(l-1) . W_lᵀ + b_l`, hidden `y_l = sigma(z_l)`, output
    /// softmax.
    pub fn forward(&self, x: &Matrix) -> Result<ForwardTrace> {
        if x.cols() != self.sizes[0] {
            return Err(Error::shape("forward", x.shape(), (x.rows(), self.sizes[0])));
        }
        let mut pre = Vec::with_capacity(self.layer_count());
        let mut post = Vec::with_capacity(self.layer_count());
        let mut current = x.clone();
        for l in 0..self.layer_count() {
            let z = current
                .matmul_nt(&self.weights[l])?
                .add_row_broadcast(&self.biases[l])?;
            if !z.all_finite() {
                return Err(Error::NonFinite {
                    rule: "forward",
                    step: 0,
                    layer: l,
                });
            }
            let y = if l + 1 == self.sizes.len() - 1 {
                softmax_rows(&z)
            } else {
                sigmoid(&z)
            };
            pre.push(z);
            current = y.clone();
            post.push(y);
        }
        Ok(ForwardTrace {
            input: x.clone(),
            pre,
            post,
        })
    }

    /// Plain SGD step: `W -= lr * dW`, `b -= lr * db`.
    pub fn sgd_step(&mut self, dw: &[Matrix], db: &[Matrix], lr: f64) -> Result<()> {
        if dw.len() != self.layer_count() || db.len() != self.layer_count() {
            return Err(Error::Param("update layer count mismatch".into()));
        }
        for l in 0..self.layer_count() {
            self.weights[l] = self.weights[l].add_scaled(-lr, &dw[l])?;
            self.biases[l] = self.biases[l].add_scaled(-lr, &db[l])?;
        }
        Ok(())
    }

    /// Serializes to the flat checkpoint container: `BIOBP1` magic, u32 LE
    /// size count, u32 LE sizes, then per layer the weight matrix (row-major)
    /// and bias row as little-endian f64.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&(self.sizes.len() as u32).to_le_bytes());
        for &s in &self.sizes {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        for l in 0..self.layer_count() {
            for &v in self.weights[l].data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
            for &v in self.biases[l].data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Inverse of [`Mlp::to_bytes`]; validates magic, sizes and total length.
    pub fn from_bytes(bytes: &[u8]) -> Result<Mlp> {
        if bytes.len() < 6 || &bytes[..6] != CHECKPOINT_MAGIC {
            return Err(Error::Format("missing BIOBP1 checkpoint magic".into()));
        }
        let mut off = 6;
        let read_u32 = |bytes: &[u8], off: &mut usize| -> Result<u32> {
            if bytes.len() < *off + 4 {
                return Err(Error::Format("checkpoint header truncated".into()));
            }
            let v = u32::from_le_bytes(bytes[*off..*off + 4].try_into().unwrap());
            *off += 4;
            Ok(v)
        };
        let n_sizes = read_u32(bytes, &mut off)? as usize;
        if n_sizes < 2 {
            return Err(Error::Format("checkpoint needs at least 2 layers".into()));
        }
        let mut sizes = Vec::with_capacity(n_sizes);
        for _ in 0..n_sizes {
            sizes.push(read_u32(bytes, &mut off)? as usize);
        }
        validate_sizes(&sizes)?;
        let param_count: usize = (0..n_sizes - 1)
            .map(|l| sizes[l + 1] * sizes[l] + sizes[l + 1])
            .sum();
        let expected = off + param_count * 8;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "checkpoint length {} does not match header ({expected} expected)",
                bytes.len()
            )));
        }
        let read_f64 = |off: &mut usize| -> f64 {
            let v = f64::from_le_bytes(bytes[*off..*off + 8].try_into().unwrap());
            *off += 8;
            v
        };
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..n_sizes - 1 {
            let (r, c) = (sizes[l + 1], sizes[l]);
            let w: Vec<f64> = (0..r * c).map(|_| read_f64(&mut off)).collect();
            let b: Vec<f64> = (0..r).map(|_| read_f64(&mut off)).collect();
            weights.push(Matrix::from_vec(r, c, w)?);
            biases.push(Matrix::from_vec(1, r, b)?);
        }
        Mlp::from_parts(sizes, weights, biases)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Mlp> {
        Mlp::from_bytes(&std::fs::read(path)?)
    }
}

impl ForwardTrace {
    /// Batch size of the traced forward pass.
    pub fn batch(&self) -> usize {
        self.input.rows()
    }

    /// Number of weight layers traced.
    pub fn layer_count(&self) -> usize {
        self.pre.len()
    }

    /// Input to weight layer `l`: the batch itself for `l == 0`, otherwise
    /// the previous layer's activations.
    pub fn layer_input(&self, l: usize) -> &Matrix {
        if l == 0 {
            &self.input
        } else {
            &self.post[l - 1]
        }
    }

    /// Pre-activation `z` of weight layer `l`.
    pub fn pre_activation(&self, l: usize) -> &Matrix {
        &self.pre[l]
    }

    /// Activation `y` of weight layer `l`.
    pub fn activation(&self, l: usize) -> &Matrix {
        &self.post[l]
    }

    /// Softmax output of the last layer.
    pub fn output(&self) -> &Matrix {
        self.post.last().expect("trace has at least one layer")
    }
}
