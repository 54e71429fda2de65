//! Embedding tables and feed-forward language-model pretraining.
//!
//! Word and label embeddings are pretrained with the same code path: a small
//! context-window language model predicts the next item from the previous
//! `context` items, and its learned input embedding table is what we keep.
//! Class and character embeddings are not pretrained; they start from Xavier
//! initialization and are learned in-task.

use crate::numkit::{self, softmax, Matrix, Rng, Vector};
use crate::{Error, Result};

/// Lookup table mapping vocabulary indices to `dim`-dimensional embeddings;
/// one row per index, reserved entries included.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    table: Matrix,
}

impl EmbeddingTable {
    pub fn new(table: Matrix) -> EmbeddingTable {
        EmbeddingTable { table }
    }

    pub fn xavier(vocab_size: usize, dim: usize, rng: &mut Rng) -> Result<EmbeddingTable> {
        Ok(EmbeddingTable {
            table: numkit::xavier_init(vocab_size, dim, rng)?,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.table.rows()
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    /// Bounds-checked row access.
    pub fn lookup(&self, index: usize) -> Result<&[f64]> {
        if index >= self.vocab_size() {
            return Err(Error::Arg(format!(
                "embedding index {index} out of range for vocabulary of {}",
                self.vocab_size()
            )));
        }
        Ok(self.table.row(index))
    }

    /// Unchecked-by-contract row access for the decoding/training hot path;
    /// indices come from vocabularies whose size fixed the table.
    pub fn row(&self, index: usize) -> &[f64] {
        self.table.row(index)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.table
    }

    pub fn matrix_mut(&mut self) -> &mut Matrix {
        &mut self.table
    }
}

/// Configuration of the pretraining language model.
#[derive(Debug, Clone)]
pub struct NnlmConfig {
    /// Embedding dimension of the table being learned.
    pub dim: usize,
    /// ReLU hidden layer size.
    pub hidden: usize,
    /// Number of previous items used as context.
    pub context: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Index used to pad the context before a sequence starts
    /// (BOS for words, BOL for labels).
    pub boundary_index: usize,
}

impl Default for NnlmConfig {
    fn default() -> Self {
        NnlmConfig {
            dim: 200,
            hidden: 200,
            context: 5,
            epochs: 30,
            learning_rate: 0.1,
            boundary_index: crate::corpus::BOS_IDX,
        }
    }
}

/// The language model itself. Kept public within the crate so gradient tests
/// can reach its tensors.
#[derive(Debug, Clone)]
pub(crate) struct Nnlm {
    pub embed: Matrix,  // vocab x dim
    pub w1: Matrix,     // hidden x (context*dim)
    pub b1: Vector,
    pub w2: Matrix,     // vocab x hidden
    pub b2: Vector,
}

pub(crate) struct NnlmGrads {
    pub embed: Matrix,
    pub w1: Matrix,
    pub b1: Vector,
    pub w2: Matrix,
    pub b2: Vector,
}

impl Nnlm {
    pub fn init(vocab_size: usize, cfg: &NnlmConfig, rng: &mut Rng) -> Result<Nnlm> {
        if vocab_size == 0 || cfg.dim == 0 || cfg.hidden == 0 || cfg.context == 0 {
            return Err(Error::Arg("language model dimensions must be positive".into()));
        }
        if cfg.boundary_index >= vocab_size {
            return Err(Error::Arg(format!(
                "boundary index {} outside vocabulary of {vocab_size}",
                cfg.boundary_index
            )));
        }
        Ok(Nnlm {
            embed: numkit::xavier_init(vocab_size, cfg.dim, rng)?,
            w1: numkit::xavier_init(cfg.hidden, cfg.context * cfg.dim, rng)?,
            b1: vec![0.0; cfg.hidden],
            w2: numkit::xavier_init(vocab_size, cfg.hidden, rng)?,
            b2: vec![0.0; vocab_size],
        })
    }

    pub fn zero_grads(&self) -> NnlmGrads {
        NnlmGrads {
            embed: Matrix::zeros(self.embed.rows(), self.embed.cols()),
            w1: Matrix::zeros(self.w1.rows(), self.w1.cols()),
            b1: vec![0.0; self.b1.len()],
            w2: Matrix::zeros(self.w2.rows(), self.w2.cols()),
            b2: vec![0.0; self.b2.len()],
        }
    }

    fn gather_context(&self, context: &[usize]) -> Vector {
        let dim = self.embed.cols();
        let mut x = Vec::with_capacity(context.len() * dim);
        for &idx in context {
            x.extend_from_slice(self.embed.row(idx));
        }
        x
    }

    /// Cross-entropy of predicting `target` from `context`; the gradient
    /// test differentiates this numerically.
    #[cfg(test)]
    pub fn loss(&self, context: &[usize], target: usize) -> f64 {
        let x = self.gather_context(context);
        let mut a1 = self.w1.matvec(&x);
        numkit::add_assign(&mut a1, &self.b1);
        let h = numkit::relu(&a1);
        let mut z = self.w2.matvec(&h);
        numkit::add_assign(&mut z, &self.b2);
        let y = softmax(&z).expect("output layer is non-empty");
        -y[target].max(1e-300).ln()
    }

    /// Accumulates gradients for one position; returns its loss.
    pub fn backward(&self, context: &[usize], target: usize, grads: &mut NnlmGrads) -> f64 {
        let x = self.gather_context(context);
        let mut a1 = self.w1.matvec(&x);
        numkit::add_assign(&mut a1, &self.b1);
        let h = numkit::relu(&a1);
        let mut z = self.w2.matvec(&h);
        numkit::add_assign(&mut z, &self.b2);
        let y = softmax(&z).expect("output layer is non-empty");
        let loss = -y[target].max(1e-300).ln();

        // softmax + NLL: dz = y - onehot(target)
        let mut dz = y;
        dz[target] -= 1.0;
        grads.w2.add_outer(&dz, &h);
        numkit::add_assign(&mut grads.b2, &dz);
        let dh = self.w2.matvec_transpose(&dz);
        let da1: Vector = dh
            .iter()
            .zip(&h)
            .map(|(&d, &hv)| if hv > 0.0 { d } else { 0.0 })
            .collect();
        grads.w1.add_outer(&da1, &x);
        numkit::add_assign(&mut grads.b1, &da1);
        let dx = self.w1.matvec_transpose(&da1);
        let dim = self.embed.cols();
        for (slot, &idx) in context.iter().enumerate() {
            numkit::add_assign(
                grads.embed.row_mut(idx),
                &dx[slot * dim..(slot + 1) * dim],
            );
        }
        loss
    }

    pub fn apply_sgd(&mut self, grads: &NnlmGrads, lr: f64) {
        numkit::axpy(self.embed.data_mut(), -lr, grads.embed.data());
        numkit::axpy(self.w1.data_mut(), -lr, grads.w1.data());
        numkit::axpy(&mut self.b1, -lr, &grads.b1);
        numkit::axpy(self.w2.data_mut(), -lr, grads.w2.data());
        numkit::axpy(&mut self.b2, -lr, &grads.b2);
    }
}

/// Result of pretraining: the learned input table plus the mean cross-entropy
/// per epoch.
#[derive(Debug, Clone)]
pub struct Pretrained {
    pub table: EmbeddingTable,
    pub epoch_loss: Vec<f64>,
}

/// Trains the language model on index sequences of one corpus column and
/// returns the learned input embedding table. Vocabulary size and index
/// order are untouched: row `i` of the result is the embedding of index `i`.
pub fn nnlm_pretrain(
    sequences: &[Vec<usize>],
    vocab_size: usize,
    cfg: &NnlmConfig,
    rng: &mut Rng,
) -> Result<Pretrained> {
    if sequences.iter().all(|s| s.is_empty()) {
        return Err(Error::Data("pretraining corpus is empty".into()));
    }
    for s in sequences {
        if let Some(&bad) = s.iter().find(|&&i| i >= vocab_size) {
            return Err(Error::Data(format!(
                "index {bad} outside vocabulary of {vocab_size}"
            )));
        }
    }
    let mut model = Nnlm::init(vocab_size, cfg, rng)?;
    let mut order: Vec<usize> = (0..sequences.len()).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    let mut context = vec![cfg.boundary_index; cfg.context];

    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        let mut positions = 0usize;
        for &si in &order {
            let seq = &sequences[si];
            context.iter_mut().for_each(|c| *c = cfg.boundary_index);
            for &target in seq {
                let mut grads = model.zero_grads();
                total += model.backward(&context, target, &mut grads);
                model.apply_sgd(&grads, cfg.learning_rate);
                context.rotate_left(1);
                *context.last_mut().expect("context is non-empty") = target;
                positions += 1;
            }
        }
        epoch_loss.push(total / positions as f64);
    }
    Ok(Pretrained {
        table: EmbeddingTable::new(model.embed),
        epoch_loss,
    })
}
