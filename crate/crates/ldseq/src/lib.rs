//! A sequence-labeling toolkit built around a label-context recurrent tagger.
//!
//! The centerpiece architecture feeds embeddings of the previously predicted
//! labels back into the hidden layer together with the word window, so the
//! model learns label dependencies the same way it learns word
//! co-occurrences. Elman, Jordan, LSTM, and GRU taggers share the same input
//! assembly, output layer, training loop, and evaluation code, which makes
//! side-by-side comparisons meaningful.
//!
//! The crate is organized as:
//!
//! - [`numkit`]: dense matrices, activations, stable softmax, deterministic
//!   randomness.
//! - [`corpus`]: column-format parsing, vocabularies, BIO chunk utilities.
//! - [`embed`]: embedding tables and language-model pretraining.
//! - [`nets`]: the five architectures, character convolution, parameter
//!   counting.
//! - [`train`]: hand-derived backpropagation, SGD with momentum, schedules,
//!   early stopping, gradient checking, bidirectional fine-tuning.
//! - [`decode`]: greedy decoding with label feedback, forward/backward
//!   models, geometric-mean combination.
//! - [`metrics`]: token accuracy, chunk F1, concept error rate.
//! - [`synth`]: synthetic corpus generation with tunable label dependency.
//! - [`model_io`]: the model/embedding container format.
//!
//! Everything is `f64` and deterministic given a seed.

pub mod corpus;
pub mod decode;
pub mod embed;
mod error;
pub mod metrics;
pub mod model_io;
pub mod nets;
pub mod numkit;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
