//! Training: loss, hand-derived backpropagation, SGD with momentum, the
//! learning-rate schedule, early stopping, gradient checking, and the
//! forward/backward/bidirectional training procedure.
//!
//! Label and hidden contexts are fed explicitly: each position's gradient
//! treats the previous predicted labels and the previous hidden state as
//! constant inputs, so plain per-position backpropagation applies with no
//! unrolling through time. The gradient checker verifies exactly that
//! objective against central finite differences.

mod backprop;
mod gradcheck;
mod trainer;

pub use backprop::{backward, TrainPass};
pub use gradcheck::{desk_check, desk_instance, gradient_check, GradCheckReport};
pub use trainer::{
    train_bidirectional, train_model, train_model_hooked, EmbeddingInit, EpochRecord, TrainHooks,
};

use crate::nets::{ModelParams, TensorKind, TensorView, TensorViewMut};
use crate::{Error, Result};

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Initial learning rate; decays linearly to lr/epochs at the last epoch.
    pub learning_rate: f64,
    pub epochs: usize,
    pub momentum: f64,
    /// L2 coefficient over all weight matrices and embeddings (not biases).
    pub lambda: f64,
    pub p_drop_hidden: f64,
    pub p_drop_embed: f64,
    /// Stop after this many consecutive epochs without a dev improvement.
    pub patience: usize,
    pub seed: u64,
    /// Feed gold labels as context while training (on by default); off feeds
    /// the model's own greedy predictions.
    pub teacher_forcing: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 30,
            momentum: 0.9,
            lambda: 0.01,
            p_drop_hidden: 0.5,
            p_drop_embed: 0.2,
            patience: 5,
            seed: 42,
            teacher_forcing: true,
        }
    }
}

impl TrainConfig {
    /// Defaults for bidirectional fine-tuning: few epochs, light L2.
    pub fn bidirectional() -> TrainConfig {
        TrainConfig {
            epochs: 8,
            lambda: 3e-4,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("need at least one epoch".into()));
        }
        if !(0.0..1.0).contains(&self.p_drop_hidden) || !(0.0..1.0).contains(&self.p_drop_embed) {
            return Err(Error::Config("dropout probabilities must be in [0, 1)".into()));
        }
        if self.patience == 0 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-parameter gradient (or momentum velocity) storage, shape-congruent
/// with the model it was created from.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub(crate) store: ModelParams,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Gradients {
        Gradients {
            store: params.zeros_like(),
        }
    }

    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        self.store.tensors()
    }

    pub fn tensors_mut(&mut self) -> Vec<TensorViewMut<'_>> {
        self.store.tensors_mut()
    }

    pub fn all_finite(&self) -> bool {
        self.store.all_finite()
    }
}

/// Cross-entropy of the gold label plus the L2 penalty over the model's
/// weight tensors. A zero probability is clamped at 1e-300 before the log.
pub fn loss(probs: &[f64], gold: usize, params: &ModelParams, lambda: f64) -> f64 {
    let ce = -probs[gold].max(1e-300).ln();
    if lambda == 0.0 {
        return ce;
    }
    let sq: f64 = params
        .tensors()
        .iter()
        .filter(|t| t.kind == TensorKind::Weight)
        .map(|t| t.data.iter().map(|x| x * x).sum::<f64>())
        .sum();
    ce + 0.5 * lambda * sq
}

/// Linear decay: lr(epoch) = lr0 - epoch * lr0/epochs (0-based epoch), which
/// stays strictly positive through the last epoch.
pub fn lr_schedule(lr0: f64, epochs: usize, epoch: usize) -> f64 {
    debug_assert!(epoch < epochs, "epoch {epoch} out of range 0..{epochs}");
    lr0 - epoch as f64 * (lr0 / epochs as f64)
}

/// Momentum SGD update: v <- momentum*v - lr*g; theta <- theta + v.
pub fn sgd_step(
    params: &mut ModelParams,
    grads: &Gradients,
    velocity: &mut Gradients,
    lr: f64,
    momentum: f64,
) {
    let g_tensors = grads.tensors();
    for ((p, g), v) in params
        .tensors_mut()
        .into_iter()
        .zip(g_tensors)
        .zip(velocity.tensors_mut())
    {
        debug_assert_eq!(p.name, g.name);
        for i in 0..p.data.len() {
            v.data[i] = momentum * v.data[i] - lr * g.data[i];
            p.data[i] += v.data[i];
        }
    }
}

/// Tracks the best development score and how long it has been stale.
/// Improvement is strict, so the first epoch reaching the best score wins
/// ties.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    best_score: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> EarlyStopper {
        EarlyStopper {
            patience,
            best_score: f64::NEG_INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    /// Records one epoch's score; returns true when it improved on the best.
    pub fn observe(&mut self, epoch: usize, score: f64) -> bool {
        if score > self.best_score {
            self.best_score = score;
            self.best_epoch = epoch;
            self.stale = 0;
            true
        } else {
            self.stale += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.stale >= self.patience
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_score(&self) -> f64 {
        self.best_score
    }
}
