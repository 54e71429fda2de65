//! Network architectures: shared input assembly, the five hidden-layer
//! variants, character convolution, the shared softmax output layer, and
//! parameter counting.

mod count;
mod forward;
mod params;

pub use count::{count_params, counted_tensor_names, LayerCount, ParamCounts};
pub use forward::{
    assemble_label_input, assemble_word_input, char_conv, elman_step, gru_step, hidden_step,
    jordan_context_vector, jordan_step, ldrnn_step, lstm_step, output_layer, StepState, StepTrace,
};
pub(crate) use forward::{char_conv_traced, char_window_indices, hidden_core, window_indices};
pub use params::{
    CharConv, GruParams, HiddenLayer, LstmParams, ModelParams, TensorKind, TensorView,
    TensorViewMut, VocabDims,
};

use crate::numkit::Activation;
use crate::{Error, Result};

/// The five taggers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    /// Hidden-to-hidden recurrence.
    Elman,
    /// Output-to-hidden recurrence over the previous predicted labels.
    Jordan,
    /// Label-context network: previous predicted labels are embedded and
    /// combined with the word input at the hidden layer.
    LdRnn,
    Lstm,
    Gru,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::Elman => "elman",
            Arch::Jordan => "jordan",
            Arch::LdRnn => "ldrnn",
            Arch::Lstm => "lstm",
            Arch::Gru => "gru",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "elman" => Ok(Arch::Elman),
            "jordan" => Ok(Arch::Jordan),
            "ldrnn" => Ok(Arch::LdRnn),
            "lstm" => Ok(Arch::Lstm),
            "gru" => Ok(Arch::Gru),
            other => Err(Error::Arg(format!("unknown architecture '{other}'"))),
        }
    }

    /// Whether decoding feeds previously predicted labels back as context.
    pub fn uses_label_feedback(self) -> bool {
        matches!(self, Arch::Jordan | Arch::LdRnn)
    }

    pub const ALL: [Arch; 5] = [Arch::Elman, Arch::Jordan, Arch::LdRnn, Arch::Lstm, Arch::Gru];
}

/// How a Jordan network represents a previous label in its context vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JordanFeedback {
    /// One-hot vector of the predicted (or gold) label index.
    OneHot,
    /// The full output probability distribution.
    Prob,
}

impl JordanFeedback {
    pub fn name(self) -> &'static str {
        match self {
            JordanFeedback::OneHot => "onehot",
            JordanFeedback::Prob => "prob",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "onehot" => Ok(JordanFeedback::OneHot),
            "prob" => Ok(JordanFeedback::Prob),
            other => Err(Error::Arg(format!("unknown jordan feedback '{other}'"))),
        }
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    pub arch: Arch,
    /// Embedding size N, shared by word, class, label, and character tables.
    pub embed_dim: usize,
    /// Hidden layer size.
    pub hidden: usize,
    /// Word half-window: 2*word_window+1 words feed each position.
    pub word_window: usize,
    /// Number of previous labels used as context (jordan, ldrnn).
    pub label_context: usize,
    /// Character half-window of the convolution (0 = single characters).
    pub char_window: usize,
    /// Character convolution output size.
    pub conv_size: usize,
    pub use_classes: bool,
    pub use_charconv: bool,
    /// Hidden activation of the simple architectures; LSTM/GRU use their
    /// fixed sigmoid/tanh gate functions.
    pub activation: Activation,
    pub jordan_feedback: JordanFeedback,
}

impl NetConfig {
    pub fn new(arch: Arch) -> NetConfig {
        NetConfig {
            arch,
            embed_dim: 200,
            hidden: 200,
            word_window: 5,
            label_context: if arch.uses_label_feedback() { 5 } else { 0 },
            char_window: 0,
            conv_size: 50,
            use_classes: false,
            use_charconv: false,
            activation: Activation::Relu,
            jordan_feedback: JordanFeedback::OneHot,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::Config("hidden size must be at least 1".into()));
        }
        if self.embed_dim == 0 {
            return Err(Error::Config("embedding size must be at least 1".into()));
        }
        if self.arch.uses_label_feedback() && self.label_context == 0 {
            return Err(Error::Config(format!(
                "{} needs a label context of at least 1",
                self.arch.name()
            )));
        }
        if self.use_charconv && self.conv_size == 0 {
            return Err(Error::Config(
                "character convolution needs a positive layer size".into(),
            ));
        }
        Ok(())
    }

    /// Length of the assembled word-level input vector: the word window, the
    /// per-position class embeddings, and the center word's convolution
    /// output.
    pub fn word_input_len(&self) -> usize {
        let per_position = self.embed_dim * if self.use_classes { 2 } else { 1 };
        let window = (2 * self.word_window + 1) * per_position;
        window + if self.use_charconv { self.conv_size } else { 0 }
    }

    /// Length of the label-level input (label-context architecture only).
    pub fn label_input_len(&self) -> usize {
        match self.arch {
            Arch::LdRnn => self.label_context * self.embed_dim,
            _ => 0,
        }
    }

    /// Number of columns of the hidden input matrix.
    pub fn hidden_input_len(&self) -> usize {
        self.word_input_len() + self.label_input_len()
    }
}
