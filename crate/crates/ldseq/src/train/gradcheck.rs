//! Gradient checking against central finite differences.
//!
//! The checker differentiates the same objective training optimizes: a
//! teacher-forced pass in which each position's hidden and cell contexts are
//! inputs. The oracle therefore records those contexts from a base forward
//! pass, then recomputes the loss under perturbed parameters with the
//! contexts frozen at their recorded values. For the label-context and
//! Jordan architectures the contexts are gold labels, so the frozen loss
//! coincides with the plain sentence loss.

use super::backprop::{backward, forward_traced, TrainPass};
use crate::corpus::{parse_conll, Corpus, EncodedSentence};
use crate::nets::{
    assemble_label_input, assemble_word_input, hidden_core, jordan_context_vector, output_layer,
    Arch, JordanFeedback, ModelParams, NetConfig, StepState, TensorKind, VocabDims,
};
use crate::numkit::{Activation, Rng, Vector};
use crate::Result;

/// Per-tensor and overall maximum relative error of analytic gradients
/// against central finite differences.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub per_tensor: Vec<(String, f64)>,
    pub max_rel_err: f64,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_rel_err <= tolerance
    }
}

/// Teacher-forced sentence loss with hidden/cell contexts frozen at the
/// base parameters' values; everything else (embeddings, convolution,
/// gates, output layer, L2 term) is recomputed from `params`.
fn frozen_loss(
    params: &ModelParams,
    sentence: &EncodedSentence,
    contexts: &[(Vector, Vector)],
    lambda: f64,
) -> f64 {
    let labels = sentence.labels.as_ref().expect("gradcheck sentences are labeled");
    let cfg = &params.config;
    let mut state = StepState::start(params);
    let mut loss = 0.0;
    for t in 0..sentence.len() {
        let mut input = assemble_word_input(sentence, t, params);
        if cfg.arch == Arch::LdRnn {
            input.extend_from_slice(&assemble_label_input(&state, params));
        }
        let jordan_ctx = if cfg.arch == Arch::Jordan {
            jordan_context_vector(&state, params.out_size(), cfg.jordan_feedback)
        } else {
            Vector::new()
        };
        let hidden_ctx: &[f64] = match cfg.arch {
            Arch::Elman | Arch::Lstm | Arch::Gru => &contexts[t].0,
            Arch::Jordan => &jordan_ctx,
            Arch::LdRnn => &[],
        };
        let step = hidden_core(params, &input, hidden_ctx, &contexts[t].1);
        let probs = output_layer(step.hidden(), params);
        loss += -probs[labels[t]].max(1e-300).ln();
        let mut one_hot = vec![0.0; params.out_size()];
        one_hot[labels[t]] = 1.0;
        state.push_label(labels[t], &one_hot);
    }
    if lambda > 0.0 {
        let sq: f64 = params
            .tensors()
            .iter()
            .filter(|t| t.kind == TensorKind::Weight)
            .map(|t| t.data.iter().map(|x| x * x).sum::<f64>())
            .sum();
        loss += 0.5 * lambda * sq;
    }
    loss
}

/// Checks every entry of every parameter tensor with central differences of
/// step `eps`. Relative error uses max(|analytic|, |numeric|, 1e-5) as the
/// denominator so that near-zero gradients are judged on an absolute scale.
pub fn gradient_check(
    params: &ModelParams,
    sentence: &EncodedSentence,
    lambda: f64,
    eps: f64,
) -> Result<GradCheckReport> {
    let pass = TrainPass::clean();
    let (grads, _) = backward(sentence, params, lambda, &pass, None)?;
    let traces = forward_traced(sentence, params, &pass, None)?;
    let contexts: Vec<(Vector, Vector)> = traces
        .iter()
        .map(|t| (t.prev_hidden.clone(), t.prev_cell.clone()))
        .collect();

    let mut work = params.clone();
    let analytic = grads.tensors();
    let n_tensors = analytic.len();
    let mut per_tensor = Vec::with_capacity(n_tensors);
    let mut overall = 0.0f64;
    for ti in 0..n_tensors {
        let name = analytic[ti].name.to_string();
        let len = analytic[ti].data.len();
        let mut worst = 0.0f64;
        for i in 0..len {
            let base = params.tensors()[ti].data[i];
            work.tensors_mut()[ti].data[i] = base + eps;
            let plus = frozen_loss(&work, sentence, &contexts, lambda);
            work.tensors_mut()[ti].data[i] = base - eps;
            let minus = frozen_loss(&work, sentence, &contexts, lambda);
            work.tensors_mut()[ti].data[i] = base;
            let numeric = (plus - minus) / (2.0 * eps);
            let a = analytic[ti].data[i];
            let denom = a.abs().max(numeric.abs()).max(1e-5);
            worst = worst.max((a - numeric).abs() / denom);
        }
        overall = overall.max(worst);
        per_tensor.push((name, worst));
    }
    Ok(GradCheckReport {
        per_tensor,
        max_rel_err: overall,
    })
}

/// Small fixed instance: a 6-token sentence over 4 task labels with
/// embedding and hidden sizes of 8.
pub fn desk_instance(
    arch: Arch,
    use_classes: bool,
    use_charconv: bool,
    seed: u64,
) -> Result<(ModelParams, EncodedSentence)> {
    let text = "\
w0 c0 A
w1 c1 B
w2 c2 C
w3 c0 D
w4 c1 A
w5 c2 B

w6 c0 C
w7 c1 D
";
    let corpus = Corpus::build(parse_conll(text)?, 1)?;
    let sentence = corpus.vocabs.encode_train(&corpus.examples[0])?;
    let config = NetConfig {
        arch,
        embed_dim: 8,
        hidden: 8,
        word_window: 1,
        label_context: if arch.uses_label_feedback() { 2 } else { 0 },
        char_window: 0,
        conv_size: 5,
        use_classes,
        use_charconv,
        activation: Activation::Relu,
        jordan_feedback: JordanFeedback::OneHot,
    };
    let params = ModelParams::init(config, VocabDims::of(&corpus.vocabs), &mut Rng::new(seed))?;
    Ok((params, sentence))
}

/// Runs the full check on the desk instance with lambda 0.01 and eps 1e-5.
pub fn desk_check(
    arch: Arch,
    use_classes: bool,
    use_charconv: bool,
    seed: u64,
) -> Result<GradCheckReport> {
    let (params, sentence) = desk_instance(arch, use_classes, use_charconv, seed)?;
    gradient_check(&params, &sentence, 0.01, 1e-5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_architectures_pass_at_desk_scale() {
        for arch in Arch::ALL {
            let report = desk_check(arch, false, false, 7).unwrap();
            assert!(
                report.passed(1e-4),
                "{arch:?}: max rel err {} ({:?})",
                report.max_rel_err,
                report.per_tensor
            );
        }
    }

    #[test]
    fn label_context_arch_with_classes_and_charconv_passes() {
        let report = desk_check(Arch::LdRnn, true, true, 7).unwrap();
        assert!(
            report.passed(1e-4),
            "max rel err {} ({:?})",
            report.max_rel_err,
            report.per_tensor
        );
    }

    #[test]
    fn elman_has_no_label_embedding_gradient() {
        // The label table simply does not exist outside the label-context
        // architecture, so its gradient is identically absent.
        let (params, sentence) = desk_instance(Arch::Elman, false, false, 3).unwrap();
        assert!(params.label_embed.is_none());
        let (grads, _) = backward(
            &sentence,
            &params,
            0.0,
            &TrainPass::clean(),
            None,
        )
        .unwrap();
        assert!(grads.tensors().iter().all(|t| t.name != "label_embed"));
    }

    #[test]
    fn prediction_fed_context_also_checks_for_label_free_archs() {
        // Without label feedback the teacher-forcing flag changes nothing;
        // gradients must agree.
        let (params, sentence) = desk_instance(Arch::Gru, false, false, 11).unwrap();
        let (a, _) = backward(&sentence, &params, 0.0, &TrainPass::clean(), None).unwrap();
        let pass = TrainPass {
            teacher_forcing: false,
            ..TrainPass::clean()
        };
        let (b, _) = backward(&sentence, &params, 0.0, &pass, None).unwrap();
        for (x, y) in a.tensors().iter().zip(b.tensors().iter()) {
            assert_eq!(x.data, y.data, "{}", x.name);
        }
    }
}
