//! Command implementations and the option tables they share.

pub mod count_params;
pub mod evaluate;
pub mod gen_synth;
pub mod gradcheck;
pub mod predict;
pub mod pretrain;
pub mod train;

use std::path::Path;

use ldseq::corpus::{parse_conll, SequenceExample};
use ldseq::nets::{Arch, JordanFeedback, NetConfig};
use ldseq::numkit::Activation;
use ldseq::train::TrainConfig;

use crate::opts::{flag, opt, OptDef, Opts};
use crate::CmdError;

pub fn help_for(command: &str) -> Result<String, CmdError> {
    let (summary, defs): (&str, &[OptDef]) = match command {
        "gen-synth" => ("generate synthetic corpora", &gen_synth::DEFS),
        "pretrain-embeddings" => ("pretrain an embedding table", &pretrain::DEFS),
        "train" => ("train a tagger", &train::DEFS),
        "predict" => ("label a corpus file", &predict::DEFS),
        "evaluate" => ("score predictions", &evaluate::DEFS),
        "gradcheck" => ("check gradients numerically", &gradcheck::DEFS),
        "count-params" => ("print parameter counts", &count_params::DEFS),
        other => return Err(CmdError::usage(format!("unknown command '{other}'"))),
    };
    Ok(crate::opts::render_help(command, summary, defs))
}

/// Options shared by every command that builds a network.
pub const NET_DEFS: [OptDef; 10] = [
    opt("arch", "architecture: elman | jordan | ldrnn | lstm | gru"),
    opt("embed", "embedding size N (default 200)"),
    opt("hidden", "hidden layer size (default 200)"),
    opt("d-w", "word half-window; 2*d-w+1 words feed each position (default 5)"),
    opt("d-l", "number of previous labels used as context (default 5)"),
    opt("d-c", "character half-window of the convolution (default 0)"),
    opt("conv-size", "character convolution size (default 50)"),
    flag("classes", "use the word-class column as features"),
    flag("charconv", "add the character convolution to the input"),
    opt("activation", "hidden activation: relu | sigmoid | tanh (default relu)"),
];

pub fn net_config(opts: &Opts) -> Result<NetConfig, CmdError> {
    let arch = Arch::parse(opts.str_or("arch", "ldrnn"))?;
    let mut cfg = NetConfig::new(arch);
    cfg.embed_dim = opts.usize_or("embed", cfg.embed_dim)?;
    cfg.hidden = opts.usize_or("hidden", cfg.hidden)?;
    cfg.word_window = opts.usize_or("d-w", cfg.word_window)?;
    cfg.label_context = opts.usize_or("d-l", cfg.label_context)?;
    cfg.char_window = opts.usize_or("d-c", cfg.char_window)?;
    cfg.conv_size = opts.usize_or("conv-size", cfg.conv_size)?;
    cfg.use_classes = opts.bool_or("classes", false)?;
    cfg.use_charconv = opts.bool_or("charconv", false)?;
    cfg.activation = Activation::parse(opts.str_or("activation", cfg.activation.name()))?;
    cfg.jordan_feedback =
        JordanFeedback::parse(opts.str_or("jordan-feedback", cfg.jordan_feedback.name()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Options of the supervised training loop.
pub const TRAIN_LOOP_DEFS: [OptDef; 10] = [
    opt("lr", "initial learning rate, decayed linearly (default 0.5)"),
    opt("epochs", "maximum training epochs (default 30)"),
    opt("momentum", "momentum coefficient (default 0.9)"),
    opt("lambda", "L2 coefficient over weights (default 0.01)"),
    opt("dropout-hidden", "dropout probability at the hidden layer (default 0.5)"),
    opt("dropout-embed", "dropout probability at the embedding layer (default 0.2)"),
    opt("patience", "early-stopping patience in epochs (default 5)"),
    opt("seed", "master random seed (default 42; LDSEQ_SEED overrides)"),
    flag("no-teacher-forcing", "feed the model's own predictions as label context"),
    opt("min-count", "prune words/classes rarer than this (default 1)"),
];

pub fn train_config(opts: &Opts) -> Result<TrainConfig, CmdError> {
    let defaults = TrainConfig::default();
    let tc = TrainConfig {
        learning_rate: opts.f64_or("lr", defaults.learning_rate)?,
        epochs: opts.usize_or("epochs", defaults.epochs)?,
        momentum: opts.f64_or("momentum", defaults.momentum)?,
        lambda: opts.f64_or("lambda", defaults.lambda)?,
        p_drop_hidden: opts.f64_or("dropout-hidden", defaults.p_drop_hidden)?,
        p_drop_embed: opts.f64_or("dropout-embed", defaults.p_drop_embed)?,
        patience: opts.usize_or("patience", defaults.patience)?,
        seed: opts.u64_or("seed", defaults.seed)?,
        teacher_forcing: !opts.bool_or("no-teacher-forcing", false)?,
    };
    tc.validate()?;
    Ok(tc)
}

/// Reads and parses a column-format corpus file; a missing file is a usage
/// error naming the path.
pub fn read_corpus_file(path: &str) -> Result<Vec<SequenceExample>, CmdError> {
    if !Path::new(path).exists() {
        return Err(CmdError::usage(format!("input file not found: {path}")));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::runtime(format!("cannot read {path}: {e}")))?;
    Ok(parse_conll(&text)?)
}
