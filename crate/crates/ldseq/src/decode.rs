//! Greedy decoding with label feedback, backward decoding, and bidirectional
//! combination of forward and backward models.

use crate::corpus::EncodedSentence;
use crate::nets::{
    assemble_word_input, hidden_step, output_layer, ModelParams, StepState,
};
use crate::numkit::Vector;
use crate::{Error, Result};

/// Orientation of a model: a backward model is trained on, and decodes,
/// reversed sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            other => Err(Error::Arg(format!("unknown direction '{other}'"))),
        }
    }
}

/// Greedy decode of one sentence: chosen label indices and the per-position
/// output distributions.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub labels: Vec<usize>,
    pub distributions: Vec<Vector>,
}

/// Index of the largest entry; ties break toward the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Left-to-right greedy pass. At each position the network's distribution is
/// computed, its argmax becomes the prediction, and, for label-feedback
/// architectures, that label is pushed into the context ring before moving
/// on. Dropout is never applied here; decoding consumes no randomness.
pub fn predict(sentence: &EncodedSentence, params: &ModelParams) -> Prediction {
    let mut state = StepState::start(params);
    let mut labels = Vec::with_capacity(sentence.len());
    let mut distributions = Vec::with_capacity(sentence.len());
    for t in 0..sentence.len() {
        let input = assemble_word_input(sentence, t, params);
        let trace = hidden_step(&input, &state, params);
        let probs = output_layer(trace.hidden(), params);
        let label = argmax(&probs);
        state.advance(&trace, label, &probs);
        labels.push(label);
        distributions.push(probs);
    }
    Prediction {
        labels,
        distributions,
    }
}

/// Like [`predict`] but the label context is forced to the given sequence
/// instead of the decoder's own output. Greedy decoding is a fixed point of
/// this: forcing the labels a greedy pass emitted reproduces its
/// distributions.
pub fn forward_forced(
    sentence: &EncodedSentence,
    labels: &[usize],
    params: &ModelParams,
) -> Vec<Vector> {
    assert_eq!(sentence.len(), labels.len(), "forced labels misaligned");
    let mut state = StepState::start(params);
    let mut distributions = Vec::with_capacity(sentence.len());
    for t in 0..sentence.len() {
        let input = assemble_word_input(sentence, t, params);
        let trace = hidden_step(&input, &state, params);
        let probs = output_layer(trace.hidden(), params);
        let mut forced_dist = vec![0.0; probs.len()];
        forced_dist[labels[t]] = 1.0;
        state.advance(&trace, labels[t], &forced_dist);
        distributions.push(probs);
    }
    distributions
}

/// Decodes with a backward model: reverse the sentence, run the greedy pass,
/// reverse the outputs back into the sentence's own order.
pub fn predict_reversed(sentence: &EncodedSentence, params: &ModelParams) -> Prediction {
    let mut p = predict(&sentence.reversed(), params);
    p.labels.reverse();
    p.distributions.reverse();
    p
}

/// Elementwise geometric mean sqrt(f .* b) of two aligned distributions.
///
/// The result is deliberately not renormalized: only its argmax is consumed,
/// and the argmax is invariant under any positive rescaling. Use
/// [`normalized`] for diagnostics.
pub fn combine_bidirectional(f: &[f64], b: &[f64]) -> Result<Vector> {
    if f.len() != b.len() {
        return Err(Error::Shape(format!(
            "cannot combine distributions of lengths {} and {}",
            f.len(),
            b.len()
        )));
    }
    Ok(f.iter().zip(b).map(|(x, y)| (x * y).sqrt()).collect())
}

/// Rescales a nonnegative score vector to sum to 1.
pub fn normalized(v: &[f64]) -> Vector {
    let z: f64 = v.iter().sum::<f64>().max(1e-300);
    v.iter().map(|x| x / z).collect()
}

/// A forward/backward model pair sharing vocabularies.
#[derive(Debug, Clone)]
pub struct BidirModel {
    pub forward: ModelParams,
    pub backward: ModelParams,
}

impl BidirModel {
    pub fn new(forward: ModelParams, backward: ModelParams) -> Result<BidirModel> {
        if forward.out_size() != backward.out_size() {
            return Err(Error::Config(format!(
                "forward and backward models disagree on the label set ({} vs {})",
                forward.out_size(),
                backward.out_size()
            )));
        }
        if forward.word_embed.vocab_size() != backward.word_embed.vocab_size() {
            return Err(Error::Config(format!(
                "forward and backward models disagree on the word vocabulary ({} vs {})",
                forward.word_embed.vocab_size(),
                backward.word_embed.vocab_size()
            )));
        }
        Ok(BidirModel { forward, backward })
    }
}

/// Bidirectional decode of one sentence.
#[derive(Debug, Clone)]
pub struct BidirPrediction {
    pub labels: Vec<usize>,
    /// Unnormalized combined scores per position.
    pub combined: Vec<Vector>,
}

/// Runs the two directions independently (each feeding its own greedy labels),
/// aligns the backward outputs, combines with the geometric mean, and takes
/// the positionwise argmax.
pub fn predict_bidirectional(
    sentence: &EncodedSentence,
    model: &BidirModel,
) -> Result<BidirPrediction> {
    let fwd = predict(sentence, &model.forward);
    let bwd = predict_reversed(sentence, &model.backward);
    let mut labels = Vec::with_capacity(sentence.len());
    let mut combined = Vec::with_capacity(sentence.len());
    for (f, b) in fwd.distributions.iter().zip(&bwd.distributions) {
        let c = combine_bidirectional(f, b)?;
        labels.push(argmax(&c));
        combined.push(c);
    }
    Ok(BidirPrediction { labels, combined })
}
