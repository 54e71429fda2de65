//! Model parameters: embedding tables, hidden-layer weights per architecture,
//! and the shared output layer.

use super::NetConfig;
use crate::embed::EmbeddingTable;
use crate::nets::Arch;
use crate::numkit::{xavier_init, Matrix, Rng, Vector};
use crate::{Error, Result};

/// Vocabulary sizes needed to dimension a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabDims {
    pub words: usize,
    pub classes: usize,
    pub labels: usize,
    pub chars: usize,
}

impl VocabDims {
    pub fn of(vocabs: &crate::corpus::VocabSet) -> VocabDims {
        VocabDims {
            words: vocabs.words.len(),
            classes: vocabs.classes.len(),
            labels: vocabs.labels.len(),
            chars: vocabs.chars.len(),
        }
    }
}

/// Character convolution parameters: character embeddings, the convolution
/// map applied to each character window, and its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct CharConv {
    pub embed: EmbeddingTable,
    /// conv_size x ((2*char_window+1) * embed_dim)
    pub weight: Matrix,
    pub bias: Vector,
}

/// One gate triple: recurrent matrix (on the previous hidden state), input
/// matrix (on the assembled input), bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub w: Matrix,
    pub u: Matrix,
    pub b: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub forget: Gate,
    pub input: Gate,
    pub cell: Gate,
    pub output: Gate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    pub update: Gate,
    pub reset: Gate,
    pub candidate: Gate,
}

/// Hidden-layer parameters; only the matrices an architecture actually uses
/// exist.
#[derive(Debug, Clone, PartialEq)]
pub enum HiddenLayer {
    /// h_t = act(recurrent*h_{t-1} + input*I_t + bias)
    Elman {
        input: Matrix,
        recurrent: Matrix,
        bias: Vector,
    },
    /// h_t = act(recurrent*[label context] + input*I_t + bias)
    Jordan {
        input: Matrix,
        recurrent: Matrix,
        bias: Vector,
    },
    /// h_t = act(input*[I_t L_t] + bias); no recurrent matrix, the label
    /// context enters through the label embedding table.
    LdRnn { input: Matrix, bias: Vector },
    Lstm(LstmParams),
    Gru(GruParams),
}

/// All parameters of one tagger, together with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: NetConfig,
    pub word_embed: EmbeddingTable,
    pub class_embed: Option<EmbeddingTable>,
    /// Label embeddings; present only for the label-context architecture.
    pub label_embed: Option<EmbeddingTable>,
    pub char_conv: Option<CharConv>,
    pub hidden: HiddenLayer,
    /// out_size x hidden
    pub output: Matrix,
    pub output_bias: Vector,
}

fn gate(hidden: usize, input_len: usize, rng: &mut Rng) -> Result<Gate> {
    Ok(Gate {
        w: xavier_init(hidden, hidden, rng)?,
        u: xavier_init(hidden, input_len, rng)?,
        b: vec![0.0; hidden],
    })
}

impl ModelParams {
    /// Xavier-initializes a model for the given vocabulary sizes. Biases
    /// start at zero. Shape consistency with the config is established here;
    /// forward steps never re-validate.
    pub fn init(config: NetConfig, dims: VocabDims, rng: &mut Rng) -> Result<ModelParams> {
        config.validate()?;
        if dims.labels == 0 || dims.words == 0 {
            return Err(Error::Config("empty vocabulary".into()));
        }
        let n = config.embed_dim;
        let word_embed = EmbeddingTable::xavier(dims.words, n, rng)?;
        let class_embed = if config.use_classes {
            Some(EmbeddingTable::xavier(dims.classes, n, rng)?)
        } else {
            None
        };
        let label_embed = if config.arch == Arch::LdRnn {
            Some(EmbeddingTable::xavier(dims.labels, n, rng)?)
        } else {
            None
        };
        let char_conv = if config.use_charconv {
            let window = (2 * config.char_window + 1) * n;
            Some(CharConv {
                embed: EmbeddingTable::xavier(dims.chars, n, rng)?,
                weight: xavier_init(config.conv_size, window, rng)?,
                bias: vec![0.0; config.conv_size],
            })
        } else {
            None
        };

        let word_len = config.word_input_len();
        let h = config.hidden;
        let hidden = match config.arch {
            Arch::Elman => HiddenLayer::Elman {
                input: xavier_init(h, word_len, rng)?,
                recurrent: xavier_init(h, h, rng)?,
                bias: vec![0.0; h],
            },
            Arch::Jordan => HiddenLayer::Jordan {
                input: xavier_init(h, word_len, rng)?,
                recurrent: xavier_init(h, config.label_context * dims.labels, rng)?,
                bias: vec![0.0; h],
            },
            Arch::LdRnn => HiddenLayer::LdRnn {
                input: xavier_init(h, config.hidden_input_len(), rng)?,
                bias: vec![0.0; h],
            },
            Arch::Lstm => HiddenLayer::Lstm(LstmParams {
                forget: gate(h, word_len, rng)?,
                input: gate(h, word_len, rng)?,
                cell: gate(h, word_len, rng)?,
                output: gate(h, word_len, rng)?,
            }),
            Arch::Gru => HiddenLayer::Gru(GruParams {
                update: gate(h, word_len, rng)?,
                reset: gate(h, word_len, rng)?,
                candidate: gate(h, word_len, rng)?,
            }),
        };
        Ok(ModelParams {
            config,
            word_embed,
            class_embed,
            label_embed,
            char_conv,
            hidden,
            output: xavier_init(dims.labels, h, rng)?,
            output_bias: vec![0.0; dims.labels],
        })
    }

    /// Shape-congruent copy with every entry zeroed; gradient and velocity
    /// storage.
    pub fn zeros_like(&self) -> ModelParams {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.data.fill(0.0);
        }
        z
    }

    pub fn out_size(&self) -> usize {
        self.output.rows()
    }

    /// Number of labels the model predicts.
    pub fn label_vocab_size(&self) -> usize {
        self.output.rows()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|x| x.is_finite()))
    }

    /// Total entries across all tensors.
    pub fn entry_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    /// Canonical tensor listing; the order is fixed and shared by gradient
    /// pairing and serialization.
    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        use TensorKind::*;
        let mut list: Vec<TensorView> = Vec::new();
        fn m<'a>(name: &'static str, kind: TensorKind, mat: &'a Matrix) -> TensorView<'a> {
            TensorView {
                name,
                kind,
                rows: mat.rows(),
                cols: mat.cols(),
                data: mat.data(),
            }
        }
        fn v<'a>(name: &'static str, vec: &'a Vector) -> TensorView<'a> {
            TensorView {
                name,
                kind: TensorKind::Bias,
                rows: vec.len(),
                cols: 1,
                data: vec.as_slice(),
            }
        }
        list.push(m("word_embed", Weight, self.word_embed.matrix()));
        if let Some(ce) = &self.class_embed {
            list.push(m("class_embed", Weight, ce.matrix()));
        }
        if let Some(le) = &self.label_embed {
            list.push(m("label_embed", Weight, le.matrix()));
        }
        if let Some(cc) = &self.char_conv {
            list.push(m("char_embed", Weight, cc.embed.matrix()));
            list.push(m("char_conv_w", Weight, &cc.weight));
            list.push(v("char_conv_b", &cc.bias));
        }
        match &self.hidden {
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
                list.push(m("hidden_w", Weight, input));
                list.push(m("hidden_r", Weight, recurrent));
                list.push(v("hidden_b", bias));
            }
            HiddenLayer::LdRnn { input, bias } => {
                list.push(m("hidden_w", Weight, input));
                list.push(v("hidden_b", bias));
            }
            HiddenLayer::Lstm(p) => {
                for (prefix, g) in [
                    ("forget", &p.forget),
                    ("input", &p.input),
                    ("cell", &p.cell),
                    ("outgate", &p.output),
                ] {
                    list.push(m(gate_name(prefix, "w"), Weight, &g.w));
                    list.push(m(gate_name(prefix, "u"), Weight, &g.u));
                    list.push(v(gate_name(prefix, "b"), &g.b));
                }
            }
            HiddenLayer::Gru(p) => {
                for (prefix, g) in [
                    ("update", &p.update),
                    ("reset", &p.reset),
                    ("cand", &p.candidate),
                ] {
                    list.push(m(gate_name(prefix, "w"), Weight, &g.w));
                    list.push(m(gate_name(prefix, "u"), Weight, &g.u));
                    list.push(v(gate_name(prefix, "b"), &g.b));
                }
            }
        }
        list.push(m("output_w", Weight, &self.output));
        list.push(v("output_b", &self.output_bias));
        list
    }

    /// Mutable counterpart of [`ModelParams::tensors`], same order.
    pub fn tensors_mut(&mut self) -> Vec<TensorViewMut<'_>> {
        use TensorKind::*;
        let mut list: Vec<TensorViewMut> = Vec::new();
        fn m<'a>(name: &'static str, kind: TensorKind, mat: &'a mut Matrix) -> TensorViewMut<'a> {
            let (rows, cols) = (mat.rows(), mat.cols());
            TensorViewMut {
                name,
                kind,
                rows,
                cols,
                data: mat.data_mut(),
            }
        }
        fn v<'a>(name: &'static str, vec: &'a mut Vector) -> TensorViewMut<'a> {
            let rows = vec.len();
            TensorViewMut {
                name,
                kind: TensorKind::Bias,
                rows,
                cols: 1,
                data: vec.as_mut_slice(),
            }
        }
        list.push(m("word_embed", Weight, self.word_embed.matrix_mut()));
        if let Some(ce) = &mut self.class_embed {
            list.push(m("class_embed", Weight, ce.matrix_mut()));
        }
        if let Some(le) = &mut self.label_embed {
            list.push(m("label_embed", Weight, le.matrix_mut()));
        }
        if let Some(cc) = &mut self.char_conv {
            list.push(m("char_embed", Weight, cc.embed.matrix_mut()));
            list.push(m("char_conv_w", Weight, &mut cc.weight));
            list.push(v("char_conv_b", &mut cc.bias));
        }
        match &mut self.hidden {
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
                list.push(m("hidden_w", Weight, input));
                list.push(m("hidden_r", Weight, recurrent));
                list.push(v("hidden_b", bias));
            }
            HiddenLayer::LdRnn { input, bias } => {
                list.push(m("hidden_w", Weight, input));
                list.push(v("hidden_b", bias));
            }
            HiddenLayer::Lstm(p) => {
                for (prefix, g) in [
                    ("forget", &mut p.forget),
                    ("input", &mut p.input),
                    ("cell", &mut p.cell),
                    ("outgate", &mut p.output),
                ] {
                    list.push(m(gate_name(prefix, "w"), Weight, &mut g.w));
                    list.push(m(gate_name(prefix, "u"), Weight, &mut g.u));
                    list.push(v(gate_name(prefix, "b"), &mut g.b));
                }
            }
            HiddenLayer::Gru(p) => {
                for (prefix, g) in [
                    ("update", &mut p.update),
                    ("reset", &mut p.reset),
                    ("cand", &mut p.candidate),
                ] {
                    list.push(m(gate_name(prefix, "w"), Weight, &mut g.w));
                    list.push(m(gate_name(prefix, "u"), Weight, &mut g.u));
                    list.push(v(gate_name(prefix, "b"), &mut g.b));
                }
            }
        }
        list.push(m("output_w", Weight, &mut self.output));
        list.push(v("output_b", &mut self.output_bias));
        list
    }
}

fn gate_name(prefix: &str, part: &str) -> &'static str {
    // Fixed set of names so tensor views can borrow 'static strings.
    match (prefix, part) {
        ("forget", "w") => "forget_w",
        ("forget", "u") => "forget_u",
        ("forget", "b") => "forget_b",
        ("input", "w") => "input_w",
        ("input", "u") => "input_u",
        ("input", "b") => "input_b",
        ("cell", "w") => "cell_w",
        ("cell", "u") => "cell_u",
        ("cell", "b") => "cell_b",
        ("outgate", "w") => "outgate_w",
        ("outgate", "u") => "outgate_u",
        ("outgate", "b") => "outgate_b",
        ("update", "w") => "update_w",
        ("update", "u") => "update_u",
        ("update", "b") => "update_b",
        ("reset", "w") => "reset_w",
        ("reset", "u") => "reset_u",
        ("reset", "b") => "reset_b",
        ("cand", "w") => "cand_w",
        ("cand", "u") => "cand_u",
        ("cand", "b") => "cand_b",
        _ => unreachable!("unknown gate tensor {prefix}_{part}"),
    }
}

/// Whether a tensor takes part in L2 regularization (weights do, biases do not).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorKind {
    Weight,
    Bias,
}

pub struct TensorView<'a> {
    pub name: &'static str,
    pub kind: TensorKind,
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f64],
}

pub struct TensorViewMut<'a> {
    pub name: &'static str,
    pub kind: TensorKind,
    pub rows: usize,
    pub cols: usize,
    pub data: &'a mut [f64],
}
