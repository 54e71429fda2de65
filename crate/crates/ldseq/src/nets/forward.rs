//! Forward computation: input assembly, character convolution, hidden steps
//! for all architectures, and the shared output layer.
//!
//! Assembled input layout, fixed across the crate: for each window position
//! left to right, the word embedding then (if enabled) the class embedding;
//! after the window, the center word's convolution output (if enabled); and,
//! for the label-context architecture, the label context embeddings oldest
//! first. Backpropagation unscatters gradients with the same layout.

use super::params::{CharConv, HiddenLayer, ModelParams};
use super::{Arch, JordanFeedback};
use crate::corpus::{EncodedSentence, BOL_IDX, BOS_IDX, EOS_IDX};
use crate::numkit::{self, sigmoid_scalar, softmax, Vector};

/// Per-sentence decoding state, reset at each sentence start.
#[derive(Debug, Clone)]
pub struct StepState {
    /// Previous hidden output (after hidden dropout during training); zeros
    /// at sentence start. Maintained for elman/lstm/gru.
    pub hidden: Vector,
    /// Previous cell state (LSTM only); zeros at sentence start.
    pub cell: Vector,
    /// Ring of the previous `label_context` predicted labels, oldest first;
    /// begin-of-labels padded. Maintained for jordan/ldrnn.
    pub labels: Vec<usize>,
    /// Ring of previous output distributions (jordan probability feedback).
    pub dists: Vec<Vector>,
}

impl StepState {
    pub fn start(params: &ModelParams) -> StepState {
        let cfg = &params.config;
        let hidden = match cfg.arch {
            Arch::Elman | Arch::Lstm | Arch::Gru => vec![0.0; cfg.hidden],
            _ => Vec::new(),
        };
        let cell = match cfg.arch {
            Arch::Lstm => vec![0.0; cfg.hidden],
            _ => Vec::new(),
        };
        let labels = if cfg.arch.uses_label_feedback() {
            vec![BOL_IDX; cfg.label_context]
        } else {
            Vec::new()
        };
        let dists = if cfg.arch == Arch::Jordan && cfg.jordan_feedback == JordanFeedback::Prob {
            let mut bol = vec![0.0; params.out_size()];
            bol[BOL_IDX] = 1.0;
            vec![bol; cfg.label_context]
        } else {
            Vec::new()
        };
        StepState {
            hidden,
            cell,
            labels,
            dists,
        }
    }

    /// Records a decoded position: the new (possibly dropout-masked) hidden
    /// output, the chosen label, and its distribution.
    pub fn advance(&mut self, trace: &StepTrace, label: usize, dist: &[f64]) {
        match trace {
            StepTrace::Simple { hidden } => {
                if !self.hidden.is_empty() {
                    self.hidden.clone_from(hidden);
                }
            }
            StepTrace::Lstm { hidden, cell, .. } => {
                self.hidden.clone_from(hidden);
                self.cell.clone_from(cell);
            }
            StepTrace::Gru { hidden, .. } => {
                self.hidden.clone_from(hidden);
            }
        }
        self.push_label(label, dist);
    }

    pub fn push_label(&mut self, label: usize, dist: &[f64]) {
        if !self.labels.is_empty() {
            self.labels.rotate_left(1);
            *self.labels.last_mut().expect("non-empty ring") = label;
        }
        if !self.dists.is_empty() {
            self.dists.rotate_left(1);
            *self.dists.last_mut().expect("non-empty ring") = dist.to_vec();
        }
    }

    /// Overwrites the stored hidden output (training applies dropout to it).
    pub fn set_hidden(&mut self, hidden: &[f64]) {
        if !self.hidden.is_empty() {
            self.hidden.clear();
            self.hidden.extend_from_slice(hidden);
        }
    }
}

/// Word and class indices feeding position `t`, padded with the
/// begin/end-of-sentence entries outside the sentence.
pub(crate) fn window_indices(
    sentence: &EncodedSentence,
    t: usize,
    half_window: usize,
) -> (Vec<usize>, Vec<usize>) {
    let len = sentence.len() as isize;
    let mut words = Vec::with_capacity(2 * half_window + 1);
    let mut classes = Vec::with_capacity(2 * half_window + 1);
    for off in -(half_window as isize)..=(half_window as isize) {
        let p = t as isize + off;
        if p < 0 {
            words.push(BOS_IDX);
            classes.push(BOS_IDX);
        } else if p >= len {
            words.push(EOS_IDX);
            classes.push(EOS_IDX);
        } else {
            words.push(sentence.words[p as usize]);
            classes.push(sentence.classes[p as usize]);
        }
    }
    (words, classes)
}

/// Assembles the word-level input vector for position `t`.
pub fn assemble_word_input(sentence: &EncodedSentence, t: usize, params: &ModelParams) -> Vector {
    let cfg = &params.config;
    let (words, classes) = window_indices(sentence, t, cfg.word_window);
    let mut out = Vec::with_capacity(cfg.word_input_len());
    for (i, &w) in words.iter().enumerate() {
        out.extend_from_slice(params.word_embed.row(w));
        if let Some(ce) = &params.class_embed {
            out.extend_from_slice(ce.row(classes[i]));
        }
    }
    if let Some(cc) = &params.char_conv {
        let conv = char_conv(&sentence.chars[t], cc, cfg.char_window);
        out.extend_from_slice(&conv);
    }
    out
}

/// Concatenation of the label-context embeddings, oldest first.
pub fn assemble_label_input(state: &StepState, params: &ModelParams) -> Vector {
    let table = params
        .label_embed
        .as_ref()
        .expect("label embeddings exist for the label-context architecture");
    let mut out = Vec::with_capacity(state.labels.len() * table.dim());
    for &l in &state.labels {
        out.extend_from_slice(table.row(l));
    }
    out
}

/// Jordan label context: concatenated one-hot vectors (or stored output
/// distributions) of the previous labels, oldest first.
pub fn jordan_context_vector(
    state: &StepState,
    out_size: usize,
    feedback: JordanFeedback,
) -> Vector {
    match feedback {
        JordanFeedback::OneHot => {
            let mut v = vec![0.0; state.labels.len() * out_size];
            for (slot, &l) in state.labels.iter().enumerate() {
                v[slot * out_size + l] = 1.0;
            }
            v
        }
        JordanFeedback::Prob => {
            let mut v = Vec::with_capacity(state.dists.len() * out_size);
            for d in &state.dists {
                v.extend_from_slice(d);
            }
            v
        }
    }
}

/// Character indices feeding convolution position `i`, padded with the
/// begin/end entries of the character vocabulary outside the word.
pub(crate) fn char_window_indices(chars: &[usize], i: usize, half_window: usize) -> Vec<usize> {
    let len = chars.len() as isize;
    let mut out = Vec::with_capacity(2 * half_window + 1);
    for off in -(half_window as isize)..=(half_window as isize) {
        let p = i as isize + off;
        if p < 0 {
            out.push(BOS_IDX);
        } else if p >= len {
            out.push(EOS_IDX);
        } else {
            out.push(chars[p as usize]);
        }
    }
    out
}

pub(crate) struct CharConvTrace {
    pub output: Vector,
    /// Winning convolution position per output dimension (first maximum);
    /// empty for the empty word.
    pub argmax: Vec<usize>,
}

pub(crate) fn char_conv_traced(
    chars: &[usize],
    conv: &CharConv,
    half_window: usize,
) -> CharConvTrace {
    let size = conv.weight.rows();
    if chars.is_empty() {
        return CharConvTrace {
            output: vec![0.0; size],
            argmax: Vec::new(),
        };
    }
    let dim = conv.embed.dim();
    let mut output = vec![f64::NEG_INFINITY; size];
    let mut argmax = vec![0usize; size];
    let mut window_embed = Vec::with_capacity((2 * half_window + 1) * dim);
    for i in 0..chars.len() {
        window_embed.clear();
        for &c in &char_window_indices(chars, i, half_window) {
            window_embed.extend_from_slice(conv.embed.row(c));
        }
        let mut col = conv.weight.matvec(&window_embed);
        numkit::add_assign(&mut col, &conv.bias);
        for (k, &v) in col.iter().enumerate() {
            if v > output[k] {
                output[k] = v;
                argmax[k] = i;
            }
        }
    }
    CharConvTrace { output, argmax }
}

/// Width-independent character feature of one word: a linear map over each
/// sliding character window followed by positionwise max-pooling. The empty
/// word yields all zeros.
pub fn char_conv(chars: &[usize], conv: &CharConv, half_window: usize) -> Vector {
    char_conv_traced(chars, conv, half_window).output
}

/// Everything a hidden step computes; backpropagation re-derives activation
/// slopes from these outputs.
#[derive(Debug, Clone)]
pub enum StepTrace {
    Simple {
        hidden: Vector,
    },
    Lstm {
        forget: Vector,
        input: Vector,
        candidate: Vector,
        cell: Vector,
        out: Vector,
        cell_tanh: Vector,
        hidden: Vector,
    },
    Gru {
        update: Vector,
        reset: Vector,
        candidate: Vector,
        hidden: Vector,
    },
}

impl StepTrace {
    pub fn hidden(&self) -> &Vector {
        match self {
            StepTrace::Simple { hidden } => hidden,
            StepTrace::Lstm { hidden, .. } => hidden,
            StepTrace::Gru { hidden, .. } => hidden,
        }
    }
}

/// Hidden-layer math over explicit context vectors. `full_input` is the
/// assembled (and, during training, dropout-masked) input: the word input,
/// with the label embeddings appended for the label-context architecture.
/// `hidden_ctx` is the previous hidden output (elman/lstm/gru) or the Jordan
/// label context vector; `cell_ctx` is the previous LSTM cell.
pub(crate) fn hidden_core(
    params: &ModelParams,
    full_input: &[f64],
    hidden_ctx: &[f64],
    cell_ctx: &[f64],
) -> StepTrace {
    let act = params.config.activation;
    match &params.hidden {
        HiddenLayer::Elman {
            input,
            recurrent,
            bias,
        }
        | HiddenLayer::Jordan {
            input,
            recurrent,
            bias,
        } => {
            let mut a = input.matvec(full_input);
            numkit::add_assign(&mut a, &recurrent.matvec(hidden_ctx));
            numkit::add_assign(&mut a, bias);
            StepTrace::Simple {
                hidden: act.apply(&a),
            }
        }
        HiddenLayer::LdRnn { input, bias } => {
            let mut a = input.matvec(full_input);
            numkit::add_assign(&mut a, bias);
            StepTrace::Simple {
                hidden: act.apply(&a),
            }
        }
        HiddenLayer::Lstm(p) => {
            let gate = |g: &super::params::Gate, squash: fn(f64) -> f64| -> Vector {
                let mut a = g.w.matvec(hidden_ctx);
                numkit::add_assign(&mut a, &g.u.matvec(full_input));
                numkit::add_assign(&mut a, &g.b);
                a.iter().map(|&x| squash(x)).collect()
            };
            let forget = gate(&p.forget, sigmoid_scalar);
            let input_gate = gate(&p.input, sigmoid_scalar);
            let candidate = gate(&p.cell, f64::tanh);
            let out = gate(&p.output, sigmoid_scalar);
            let cell: Vector = forget
                .iter()
                .zip(cell_ctx)
                .zip(input_gate.iter().zip(&candidate))
                .map(|((f, c_prev), (i, cand))| f * c_prev + i * cand)
                .collect();
            let cell_tanh: Vector = cell.iter().map(|&c| c.tanh()).collect();
            let hidden: Vector = out.iter().zip(&cell_tanh).map(|(o, ct)| o * ct).collect();
            StepTrace::Lstm {
                forget,
                input: input_gate,
                candidate,
                cell,
                out,
                cell_tanh,
                hidden,
            }
        }
        HiddenLayer::Gru(p) => {
            let linear = |g: &super::params::Gate, ctx: &[f64]| -> Vector {
                let mut a = g.w.matvec(ctx);
                numkit::add_assign(&mut a, &g.u.matvec(full_input));
                numkit::add_assign(&mut a, &g.b);
                a
            };
            let update: Vector = linear(&p.update, hidden_ctx)
                .iter()
                .map(|&x| sigmoid_scalar(x))
                .collect();
            let reset: Vector = linear(&p.reset, hidden_ctx)
                .iter()
                .map(|&x| sigmoid_scalar(x))
                .collect();
            let gated: Vector = reset.iter().zip(hidden_ctx).map(|(r, h)| r * h).collect();
            let candidate: Vector = linear(&p.candidate, &gated)
                .iter()
                .map(|&x| x.tanh())
                .collect();
            let hidden: Vector = update
                .iter()
                .zip(hidden_ctx)
                .zip(&candidate)
                .map(|((z, h_prev), cand)| (1.0 - z) * h_prev + z * cand)
                .collect();
            StepTrace::Gru {
                update,
                reset,
                candidate,
                hidden,
            }
        }
    }
}

pub fn elman_step(input: &[f64], state: &StepState, params: &ModelParams) -> StepTrace {
    hidden_core(params, input, &state.hidden, &[])
}

pub fn jordan_step(input: &[f64], state: &StepState, params: &ModelParams) -> StepTrace {
    let ctx = jordan_context_vector(state, params.out_size(), params.config.jordan_feedback);
    hidden_core(params, input, &ctx, &[])
}

/// Pure function of the current input and label context; no dependence on the
/// previous hidden state.
pub fn ldrnn_step(input: &[f64], state: &StepState, params: &ModelParams) -> StepTrace {
    let mut full = input.to_vec();
    full.extend_from_slice(&assemble_label_input(state, params));
    hidden_core(params, &full, &[], &[])
}

pub fn lstm_step(input: &[f64], state: &StepState, params: &ModelParams) -> StepTrace {
    hidden_core(params, input, &state.hidden, &state.cell)
}

pub fn gru_step(input: &[f64], state: &StepState, params: &ModelParams) -> StepTrace {
    hidden_core(params, input, &state.hidden, &[])
}

/// Dispatches to the architecture's step function.
pub fn hidden_step(input: &[f64], state: &StepState, params: &ModelParams) -> StepTrace {
    match params.config.arch {
        Arch::Elman => elman_step(input, state, params),
        Arch::Jordan => jordan_step(input, state, params),
        Arch::LdRnn => ldrnn_step(input, state, params),
        Arch::Lstm => lstm_step(input, state, params),
        Arch::Gru => gru_step(input, state, params),
    }
}

/// Shared output layer: softmax(output * h + bias), one probability per label.
pub fn output_layer(hidden: &[f64], params: &ModelParams) -> Vector {
    let mut z = params.output.matvec(hidden);
    numkit::add_assign(&mut z, &params.output_bias);
    softmax(&z).expect("output layer is non-empty")
}
