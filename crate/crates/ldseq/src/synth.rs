//! Synthetic corpus generation with a tunable degree of label dependency.
//!
//! Each token draws its label either from an order-2 Markov chain over the
//! labels (probability `rho`) or deterministically from the word identity
//! (probability `1 - rho`). Words are drawn uniformly and independently, so
//! at `rho = 1` the labels carry no information about the words at all: only
//! the label history predicts them, which is exactly the regime where a
//! label-context tagger should separate from label-blind architectures. At
//! `rho = 0` every label is a function of the visible word and any
//! word-driven model can reach perfect accuracy.
//!
//! The chain emits label `prev1` when the two previous labels differ and
//! `(prev1 + 1) mod k` when they agree, with probability `1 - noise`; with
//! probability `noise` it emits a uniform label. The transition rule is
//! equivariant under label rotation and the initial pair state is uniform,
//! so the marginal label distribution is exactly uniform at every position:
//! a label-blind predictor cannot beat `1/k` expected accuracy. The exact
//! ceiling is also computable from [`chain_kernel`] by power iteration.

use crate::corpus::{SequenceExample, Token};
use crate::numkit::{Matrix, Rng};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_train: usize,
    pub n_dev: usize,
    pub n_test: usize,
    pub n_labels: usize,
    pub vocab_size: usize,
    pub len_min: usize,
    pub len_max: usize,
    /// Probability that a label comes from the label chain rather than from
    /// the word identity.
    pub rho: f64,
    /// Probability that a chain draw is uniform noise instead of the
    /// deterministic transition.
    pub chain_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_train: 200,
            n_dev: 50,
            n_test: 50,
            n_labels: 5,
            vocab_size: 30,
            len_min: 5,
            len_max: 14,
            rho: 0.5,
            chain_noise: 0.05,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_labels < 2 {
            return Err(Error::Arg("need at least 2 labels".into()));
        }
        if self.vocab_size < 1 {
            return Err(Error::Arg("need at least 1 word".into()));
        }
        if self.len_min < 1 || self.len_max < self.len_min {
            return Err(Error::Arg(format!(
                "invalid sentence length range {}..={}",
                self.len_min, self.len_max
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Arg(format!("rho must be in [0, 1], got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.chain_noise) {
            return Err(Error::Arg(format!(
                "chain noise must be in [0, 1], got {}",
                self.chain_noise
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub train: Vec<SequenceExample>,
    pub dev: Vec<SequenceExample>,
    pub test: Vec<SequenceExample>,
}

/// Deterministic chain transition: repeat the previous label after a change,
/// advance to the next label after a repeat.
fn chain_next(prev2: usize, prev1: usize, k: usize) -> usize {
    if prev2 != prev1 {
        prev1
    } else {
        (prev1 + 1) % k
    }
}

/// The label a word maps to when the word identity decides.
pub fn word_label(word_index: usize, n_labels: usize) -> usize {
    word_index % n_labels
}

fn label_name(l: usize) -> String {
    format!("L{l}")
}

fn word_name(w: usize) -> String {
    format!("w{w:02}")
}

fn generate_split(cfg: &SynthConfig, rng: &mut Rng, n: usize) -> Vec<SequenceExample> {
    let k = cfg.n_labels;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let len = cfg.len_min + rng.below(cfg.len_max - cfg.len_min + 1);
        // Uniform initial pair state keeps the marginal exactly uniform at
        // every position.
        let mut prev2 = rng.below(k);
        let mut prev1 = rng.below(k);
        let mut tokens = Vec::with_capacity(len);
        for _ in 0..len {
            let w = rng.below(cfg.vocab_size);
            let label = if rng.next_f64() < cfg.rho {
                if rng.next_f64() < cfg.chain_noise {
                    rng.below(k)
                } else {
                    chain_next(prev2, prev1, k)
                }
            } else {
                word_label(w, k)
            };
            tokens.push(Token {
                word: word_name(w),
                word_class: None,
                label: label_name(label),
            });
            prev2 = prev1;
            prev1 = label;
        }
        out.push(SequenceExample { tokens });
    }
    out
}

/// Generates train/dev/test splits. Identical configurations produce
/// identical corpora.
pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed);
    Ok(SynthData {
        train: generate_split(cfg, &mut rng, cfg.n_train),
        dev: generate_split(cfg, &mut rng, cfg.n_dev),
        test: generate_split(cfg, &mut rng, cfg.n_test),
    })
}

/// Renders sentences in the two-column word/label format.
pub fn render(examples: &[SequenceExample]) -> String {
    let mut out = String::new();
    for s in examples {
        for t in &s.tokens {
            let _ = writeln!(out, "{} {}", t.word, t.label);
        }
        out.push('\n');
    }
    out
}

/// Writes train.txt, dev.txt, and test.txt under `dir`.
pub fn write_files(data: &SynthData, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("train.txt"), render(&data.train))?;
    std::fs::write(dir.join("dev.txt"), render(&data.dev))?;
    std::fs::write(dir.join("test.txt"), render(&data.test))?;
    Ok(())
}

/// Row-stochastic transition kernel of the label chain over pair states
/// (prev2, prev1), flattened as `prev2 * k + prev1`. Row s gives the
/// distribution of the next pair state.
pub fn chain_kernel(n_labels: usize, noise: f64) -> Matrix {
    let k = n_labels;
    let mut kernel = Matrix::zeros(k * k, k * k);
    for prev2 in 0..k {
        for prev1 in 0..k {
            let s = prev2 * k + prev1;
            let det = chain_next(prev2, prev1, k);
            for c in 0..k {
                let next = prev1 * k + c;
                let mut p = noise / k as f64;
                if c == det {
                    p += 1.0 - noise;
                }
                kernel.set(s, next, kernel.get(s, next) + p);
            }
        }
    }
    kernel
}

/// Stationary marginal distribution over labels, computed by power iteration
/// on [`chain_kernel`]. The maximum entry is the expected-accuracy ceiling of
/// any predictor that ignores the label history.
pub fn stationary_label_marginals(n_labels: usize, noise: f64) -> Vec<f64> {
    let k = n_labels;
    let kernel = chain_kernel(k, noise);
    let states = k * k;
    let mut pi = vec![1.0 / states as f64; states];
    for _ in 0..10_000 {
        let mut next = vec![0.0; states];
        for (s, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for t in 0..states {
                next[t] += mass * kernel.get(s, t);
            }
        }
        let delta: f64 = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .sum();
        pi = next;
        if delta < 1e-13 {
            break;
        }
    }
    let mut marginal = vec![0.0; k];
    for (s, &mass) in pi.iter().enumerate() {
        marginal[s % k] += mass;
    }
    marginal
}
