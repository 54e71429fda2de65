//! Exact parameter counting per architecture.
//!
//! Counts are computed from the same shape arithmetic that allocates the
//! model, so they always equal the instantiated entry counts. The scope is
//! the hidden layer (recurrent + input matrices, or all gate matrices) plus
//! the label embedding table for the label-context architecture; weights and
//! biases are totalled separately. With a words-only input the hidden input
//! width is (2*word_window+1)*embed_dim, giving the familiar closed forms
//! (e.g. 4*(H^2 + H*(2d+1)N) for the LSTM and exactly 3/4 of that for the
//! GRU).

use super::{Arch, NetConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerCount {
    pub name: &'static str,
    pub count: usize,
}

/// Per-layer and total counts for one configuration and output size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamCounts {
    pub terms: Vec<LayerCount>,
    pub weight_total: usize,
    pub bias_total: usize,
}

pub fn count_params(config: &NetConfig, out_size: usize) -> ParamCounts {
    let h = config.hidden;
    let n = config.embed_dim;
    let word_len = config.word_input_len();
    let (terms, bias_total): (Vec<LayerCount>, usize) = match config.arch {
        Arch::Elman => (
            vec![
                LayerCount {
                    name: "recurrent",
                    count: h * h,
                },
                LayerCount {
                    name: "hidden",
                    count: h * word_len,
                },
            ],
            h,
        ),
        Arch::Jordan => (
            vec![
                LayerCount {
                    name: "recurrent",
                    count: h * (config.label_context * out_size),
                },
                LayerCount {
                    name: "hidden",
                    count: h * word_len,
                },
            ],
            h,
        ),
        Arch::LdRnn => (
            vec![
                LayerCount {
                    name: "label_embed",
                    count: out_size * n,
                },
                LayerCount {
                    name: "hidden",
                    count: h * (word_len + config.label_context * n),
                },
            ],
            h,
        ),
        Arch::Lstm => (
            vec![LayerCount {
                name: "gates",
                count: 4 * (h * h + h * word_len),
            }],
            4 * h,
        ),
        Arch::Gru => (
            vec![LayerCount {
                name: "gates",
                count: 3 * (h * h + h * word_len),
            }],
            3 * h,
        ),
    };
    let weight_total = terms.iter().map(|t| t.count).sum();
    ParamCounts {
        terms,
        weight_total,
        bias_total,
    }
}

/// Names of the tensors the count covers: (weight tensors, bias tensors).
pub fn counted_tensor_names(arch: Arch) -> (Vec<&'static str>, Vec<&'static str>) {
    match arch {
        Arch::Elman | Arch::Jordan => (vec!["hidden_w", "hidden_r"], vec!["hidden_b"]),
        Arch::LdRnn => (vec!["label_embed", "hidden_w"], vec!["hidden_b"]),
        Arch::Lstm => (
            vec![
                "forget_w", "forget_u", "input_w", "input_u", "cell_w", "cell_u", "outgate_w",
                "outgate_u",
            ],
            vec!["forget_b", "input_b", "cell_b", "outgate_b"],
        ),
        Arch::Gru => (
            vec![
                "update_w", "update_u", "reset_w", "reset_u", "cand_w", "cand_u",
            ],
            vec!["update_b", "reset_b", "cand_b"],
        ),
    }
}
