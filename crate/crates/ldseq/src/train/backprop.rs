//! Traced forward passes and exact backpropagation for all architectures.
//!
//! Gradients are exact for the explicit-context objective: previous predicted
//! labels and previous hidden/cell states are inputs, not differentiated
//! paths, so each position contributes an independent gradient and the
//! per-sentence gradient is their sum plus the L2 term. Character-convolution
//! gradients flow only through the max-pool winners.

use super::Gradients;
use crate::corpus::EncodedSentence;
use crate::decode::argmax;
use crate::nets::{
    assemble_label_input, char_conv_traced, char_window_indices, hidden_core,
    jordan_context_vector, output_layer, window_indices, Arch, HiddenLayer, ModelParams, StepState,
    StepTrace, TensorKind,
};
use crate::numkit::{add_assign, axpy, dropout_mask, hadamard_assign, Rng, Vector};
use crate::{Error, Result};

/// Forward-pass options of one training pass.
#[derive(Debug, Clone)]
pub struct TrainPass {
    pub teacher_forcing: bool,
    pub p_drop_embed: f64,
    pub p_drop_hidden: f64,
}

impl TrainPass {
    /// No dropout, gold-label context: the configuration gradient checks use.
    pub fn clean() -> TrainPass {
        TrainPass {
            teacher_forcing: true,
            p_drop_embed: 0.0,
            p_drop_hidden: 0.0,
        }
    }
}

pub(crate) struct CharPosTrace {
    pub chars: Vec<usize>,
    pub argmax: Vec<usize>,
}

/// Everything one position's backward step needs.
pub(crate) struct PosTrace {
    pub gold: usize,
    /// Input fed to the hidden layer, dropout already applied; includes the
    /// label-context embeddings for the label-context architecture.
    pub input_masked: Vector,
    pub embed_mask: Option<Vector>,
    pub hidden_mask: Option<Vector>,
    /// Hidden output after dropout; what the output layer and the next
    /// step's context saw.
    pub hidden_dropped: Vector,
    /// Previous (dropped) hidden output consumed as context; empty when the
    /// architecture has no hidden recurrence.
    pub prev_hidden: Vector,
    pub prev_cell: Vector,
    pub jordan_ctx: Vector,
    /// Label indices whose embeddings were consumed (label-context arch).
    pub label_ctx: Vec<usize>,
    pub window_words: Vec<usize>,
    pub window_classes: Vec<usize>,
    pub char: Option<CharPosTrace>,
    pub step: StepTrace,
    pub probs: Vector,
}

/// Teacher-forced (or self-fed) forward pass recording every intermediate
/// value backpropagation needs.
pub(crate) fn forward_traced(
    sentence: &EncodedSentence,
    params: &ModelParams,
    pass: &TrainPass,
    mut rng: Option<&mut Rng>,
) -> Result<Vec<PosTrace>> {
    let labels = sentence
        .labels
        .as_ref()
        .ok_or_else(|| Error::Data("cannot train on a sentence without labels".into()))?;
    let cfg = &params.config;
    let mut state = StepState::start(params);
    let mut traces = Vec::with_capacity(sentence.len());

    for t in 0..sentence.len() {
        let gold = labels[t];
        let (window_words, window_classes) = window_indices(sentence, t, cfg.word_window);
        let mut input = Vec::with_capacity(cfg.hidden_input_len());
        for (i, &w) in window_words.iter().enumerate() {
            input.extend_from_slice(params.word_embed.row(w));
            if let Some(ce) = &params.class_embed {
                input.extend_from_slice(ce.row(window_classes[i]));
            }
        }
        let mut char_trace = None;
        if let Some(cc) = &params.char_conv {
            let tr = char_conv_traced(&sentence.chars[t], cc, cfg.char_window);
            input.extend_from_slice(&tr.output);
            char_trace = Some(CharPosTrace {
                chars: sentence.chars[t].clone(),
                argmax: tr.argmax,
            });
        }
        let label_ctx = if cfg.arch == Arch::LdRnn {
            input.extend_from_slice(&assemble_label_input(&state, params));
            state.labels.clone()
        } else {
            Vec::new()
        };

        let embed_mask = if pass.p_drop_embed > 0.0 {
            let r = rng
                .as_deref_mut()
                .ok_or_else(|| Error::Arg("dropout requires a random generator".into()))?;
            Some(dropout_mask(input.len(), pass.p_drop_embed, r)?)
        } else {
            None
        };
        let mut input_masked = input;
        if let Some(m) = &embed_mask {
            hadamard_assign(&mut input_masked, m);
        }

        let prev_hidden = state.hidden.clone();
        let prev_cell = state.cell.clone();
        let jordan_ctx = if cfg.arch == Arch::Jordan {
            jordan_context_vector(&state, params.out_size(), cfg.jordan_feedback)
        } else {
            Vector::new()
        };
        let hidden_ctx: &[f64] = match cfg.arch {
            Arch::Elman | Arch::Lstm | Arch::Gru => &prev_hidden,
            Arch::Jordan => &jordan_ctx,
            Arch::LdRnn => &[],
        };
        let step = hidden_core(params, &input_masked, hidden_ctx, &prev_cell);

        let hidden_mask = if pass.p_drop_hidden > 0.0 {
            let r = rng
                .as_deref_mut()
                .ok_or_else(|| Error::Arg("dropout requires a random generator".into()))?;
            Some(dropout_mask(cfg.hidden, pass.p_drop_hidden, r)?)
        } else {
            None
        };
        let mut hidden_dropped = step.hidden().clone();
        if let Some(m) = &hidden_mask {
            hadamard_assign(&mut hidden_dropped, m);
        }
        let probs = output_layer(&hidden_dropped, params);

        let next_label = if pass.teacher_forcing {
            gold
        } else {
            argmax(&probs)
        };
        state.set_hidden(&hidden_dropped);
        if let StepTrace::Lstm { cell, .. } = &step {
            state.cell.clone_from(cell);
        }
        if state.dists.is_empty() {
            state.push_label(next_label, &[]);
        } else if pass.teacher_forcing {
            let mut one_hot = vec![0.0; params.out_size()];
            one_hot[next_label] = 1.0;
            state.push_label(next_label, &one_hot);
        } else {
            let probs_clone = probs.clone();
            state.push_label(next_label, &probs_clone);
        }

        traces.push(PosTrace {
            gold,
            input_masked,
            embed_mask,
            hidden_mask,
            hidden_dropped,
            prev_hidden,
            prev_cell,
            jordan_ctx,
            label_ctx,
            window_words,
            window_classes,
            char: char_trace,
            step,
            probs,
        });
    }
    Ok(traces)
}

fn sigmoid_slope(y: f64) -> f64 {
    y * (1.0 - y)
}

fn tanh_slope(y: f64) -> f64 {
    1.0 - y * y
}

/// Pre-activation delta of a simple hidden layer, with the activation slope
/// recovered from the layer's output.
fn simple_delta(dh: &[f64], hidden: &[f64], act: crate::numkit::Activation) -> Vector {
    dh.iter()
        .zip(hidden)
        .map(|(&d, &y)| d * act.grad_from_output(y))
        .collect()
}

/// Accumulates gradients given dL/d(logits) per position. Shared by ordinary
/// cross-entropy training (delta = probs - onehot) and bidirectional
/// fine-tuning (delta = (combined - onehot)/2).
pub(crate) fn accumulate_from_deltas(
    params: &ModelParams,
    traces: &[PosTrace],
    deltas: &[Vector],
    grads: &mut Gradients,
) {
    debug_assert_eq!(traces.len(), deltas.len());
    let cfg = params.config.clone();
    let g = &mut grads.store;
    for (tr, dz) in traces.iter().zip(deltas) {
        g.output.add_outer(dz, &tr.hidden_dropped);
        add_assign(&mut g.output_bias, dz);
        let mut dh = params.output.matvec_transpose(dz);
        if let Some(m) = &tr.hidden_mask {
            hadamard_assign(&mut dh, m);
        }

        // dL/d(masked input), to be unscattered into the embeddings below
        let dxt: Vector = match (&params.hidden, &mut g.hidden) {
            (
                HiddenLayer::Elman { input, .. },
                HiddenLayer::Elman {
                    input: gi,
                    recurrent: gr,
                    bias: gb,
                },
            ) => {
                let da = simple_delta(&dh, tr.step.hidden(), cfg.activation);
                gi.add_outer(&da, &tr.input_masked);
                gr.add_outer(&da, &tr.prev_hidden);
                add_assign(gb, &da);
                input.matvec_transpose(&da)
            }
            (
                HiddenLayer::Jordan { input, .. },
                HiddenLayer::Jordan {
                    input: gi,
                    recurrent: gr,
                    bias: gb,
                },
            ) => {
                let da = simple_delta(&dh, tr.step.hidden(), cfg.activation);
                gi.add_outer(&da, &tr.input_masked);
                gr.add_outer(&da, &tr.jordan_ctx);
                add_assign(gb, &da);
                input.matvec_transpose(&da)
            }
            (
                HiddenLayer::LdRnn { input, .. },
                HiddenLayer::LdRnn {
                    input: gi,
                    bias: gb,
                },
            ) => {
                let da = simple_delta(&dh, tr.step.hidden(), cfg.activation);
                gi.add_outer(&da, &tr.input_masked);
                add_assign(gb, &da);
                input.matvec_transpose(&da)
            }
            (HiddenLayer::Lstm(p), HiddenLayer::Lstm(gp)) => {
                let StepTrace::Lstm {
                    forget,
                    input: input_gate,
                    candidate,
                    out,
                    cell_tanh,
                    ..
                } = &tr.step
                else {
                    unreachable!("trace/arch mismatch")
                };
                let dout: Vector = dh.iter().zip(cell_tanh).map(|(d, ct)| d * ct).collect();
                let dcell: Vector = dh
                    .iter()
                    .zip(out)
                    .zip(cell_tanh)
                    .map(|((d, o), ct)| d * o * tanh_slope(*ct))
                    .collect();
                let da_f: Vector = dcell
                    .iter()
                    .zip(&tr.prev_cell)
                    .zip(forget)
                    .map(|((dc, cp), f)| dc * cp * sigmoid_slope(*f))
                    .collect();
                let da_i: Vector = dcell
                    .iter()
                    .zip(candidate)
                    .zip(input_gate)
                    .map(|((dc, cand), i)| dc * cand * sigmoid_slope(*i))
                    .collect();
                let da_c: Vector = dcell
                    .iter()
                    .zip(input_gate)
                    .zip(candidate)
                    .map(|((dc, i), cand)| dc * i * tanh_slope(*cand))
                    .collect();
                let da_o: Vector = dout
                    .iter()
                    .zip(out)
                    .map(|(d, o)| d * sigmoid_slope(*o))
                    .collect();
                let mut dxt = vec![0.0; tr.input_masked.len()];
                for (pg, gg, da) in [
                    (&p.forget, &mut gp.forget, &da_f),
                    (&p.input, &mut gp.input, &da_i),
                    (&p.cell, &mut gp.cell, &da_c),
                    (&p.output, &mut gp.output, &da_o),
                ] {
                    gg.w.add_outer(da, &tr.prev_hidden);
                    gg.u.add_outer(da, &tr.input_masked);
                    add_assign(&mut gg.b, da);
                    add_assign(&mut dxt, &pg.u.matvec_transpose(da));
                }
                dxt
            }
            (HiddenLayer::Gru(p), HiddenLayer::Gru(gp)) => {
                let StepTrace::Gru {
                    update,
                    reset,
                    candidate,
                    ..
                } = &tr.step
                else {
                    unreachable!("trace/arch mismatch")
                };
                let dz_gate: Vector = dh
                    .iter()
                    .zip(candidate)
                    .zip(&tr.prev_hidden)
                    .map(|((d, cand), hp)| d * (cand - hp))
                    .collect();
                let da_cand: Vector = dh
                    .iter()
                    .zip(update)
                    .zip(candidate)
                    .map(|((d, z), cand)| d * z * tanh_slope(*cand))
                    .collect();
                let gated: Vector = reset
                    .iter()
                    .zip(&tr.prev_hidden)
                    .map(|(r, hp)| r * hp)
                    .collect();
                gp.candidate.w.add_outer(&da_cand, &gated);
                gp.candidate.u.add_outer(&da_cand, &tr.input_masked);
                add_assign(&mut gp.candidate.b, &da_cand);
                let dgated = p.candidate.w.matvec_transpose(&da_cand);
                let da_r: Vector = dgated
                    .iter()
                    .zip(&tr.prev_hidden)
                    .zip(reset)
                    .map(|((dg, hp), r)| dg * hp * sigmoid_slope(*r))
                    .collect();
                let da_z: Vector = dz_gate
                    .iter()
                    .zip(update)
                    .map(|(d, z)| d * sigmoid_slope(*z))
                    .collect();
                gp.update.w.add_outer(&da_z, &tr.prev_hidden);
                gp.update.u.add_outer(&da_z, &tr.input_masked);
                add_assign(&mut gp.update.b, &da_z);
                gp.reset.w.add_outer(&da_r, &tr.prev_hidden);
                gp.reset.u.add_outer(&da_r, &tr.input_masked);
                add_assign(&mut gp.reset.b, &da_r);
                let mut dxt = p.update.u.matvec_transpose(&da_z);
                add_assign(&mut dxt, &p.reset.u.matvec_transpose(&da_r));
                add_assign(&mut dxt, &p.candidate.u.matvec_transpose(&da_cand));
                dxt
            }
            _ => unreachable!("gradient and parameter layouts always agree"),
        };

        // back through the dropout mask into the raw assembled input
        let mut dx = dxt;
        if let Some(m) = &tr.embed_mask {
            hadamard_assign(&mut dx, m);
        }

        let n = cfg.embed_dim;
        let mut off = 0usize;
        for i in 0..tr.window_words.len() {
            add_assign(
                g.word_embed.matrix_mut().row_mut(tr.window_words[i]),
                &dx[off..off + n],
            );
            off += n;
            if let Some(gce) = g.class_embed.as_mut() {
                add_assign(
                    gce.matrix_mut().row_mut(tr.window_classes[i]),
                    &dx[off..off + n],
                );
                off += n;
            }
        }
        if let Some(ct) = &tr.char {
            let pcc = params.char_conv.as_ref().expect("conv params exist");
            let gcc = g.char_conv.as_mut().expect("conv grads exist");
            let dconv = &dx[off..off + cfg.conv_size];
            off += cfg.conv_size;
            if !ct.chars.is_empty() {
                for (k, &dk) in dconv.iter().enumerate() {
                    if dk == 0.0 {
                        continue;
                    }
                    let winner = ct.argmax[k];
                    let window = char_window_indices(&ct.chars, winner, cfg.char_window);
                    gcc.bias[k] += dk;
                    let wrow = gcc.weight.row_mut(k);
                    for (slot, &c) in window.iter().enumerate() {
                        axpy(&mut wrow[slot * n..(slot + 1) * n], dk, pcc.embed.row(c));
                    }
                    for (slot, &c) in window.iter().enumerate() {
                        axpy(
                            gcc.embed.matrix_mut().row_mut(c),
                            dk,
                            &pcc.weight.row(k)[slot * n..(slot + 1) * n],
                        );
                    }
                }
            }
        }
        if cfg.arch == Arch::LdRnn {
            let gle = g
                .label_embed
                .as_mut()
                .expect("label-context arch has label embeddings");
            for (j, &l) in tr.label_ctx.iter().enumerate() {
                add_assign(
                    gle.matrix_mut().row_mut(l),
                    &dx[off + j * n..off + (j + 1) * n],
                );
            }
        }
    }
}

/// Adds the L2 gradient (lambda * theta over weight tensors) and returns the
/// penalty value lambda/2 * sum(theta^2).
pub(crate) fn add_l2(params: &ModelParams, lambda: f64, grads: &mut Gradients) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let mut sq = 0.0;
    let p_tensors = params.tensors();
    for (p, gt) in p_tensors.into_iter().zip(grads.store.tensors_mut()) {
        if p.kind != TensorKind::Weight {
            continue;
        }
        for (gi, &pi) in gt.data.iter_mut().zip(p.data) {
            *gi += lambda * pi;
            sq += pi * pi;
        }
    }
    0.5 * lambda * sq
}

/// Gradients and loss of one sentence: summed per-position cross-entropy of
/// the gold labels plus one L2 term.
pub fn backward(
    sentence: &EncodedSentence,
    params: &ModelParams,
    lambda: f64,
    pass: &TrainPass,
    rng: Option<&mut Rng>,
) -> Result<(Gradients, f64)> {
    let traces = forward_traced(sentence, params, pass, rng)?;
    let mut loss = 0.0;
    let deltas: Vec<Vector> = traces
        .iter()
        .map(|tr| {
            loss += -tr.probs[tr.gold].max(1e-300).ln();
            let mut dz = tr.probs.clone();
            dz[tr.gold] -= 1.0;
            dz
        })
        .collect();
    let mut grads = Gradients::zeros_like(params);
    accumulate_from_deltas(params, &traces, &deltas, &mut grads);
    loss += add_l2(params, lambda, &mut grads);
    Ok((grads, loss))
}
