//! `pretrain-embeddings`: train the context-window language model on one
//! corpus column and save its input embedding table.

use std::path::Path;

use ldseq::corpus::{Corpus, BOL_IDX, BOS_IDX};
use ldseq::embed::{nnlm_pretrain, NnlmConfig};
use ldseq::model_io::save_embeddings;
use ldseq::numkit::Rng;

use crate::opts::{opt, OptDef, Opts};
use crate::CmdError;

pub const DEFS: [OptDef; 9] = [
    opt("input", "training corpus file (required)"),
    opt("column", "which column to model: words | labels (required)"),
    opt("out", "output embeddings file (required)"),
    opt("embed", "embedding size N (default 200)"),
    opt("nnlm-hidden", "language model hidden size (default 200)"),
    opt("nnlm-context", "context length in items (default 5)"),
    opt("nnlm-lr", "language model learning rate (default 0.1)"),
    opt("nnlm-epochs", "training epochs (default 30 for words, 20 for labels)"),
    opt("seed", "random seed (default 42)"),
];

pub fn run(args: &[String]) -> Result<(), CmdError> {
    let mut defs = DEFS.to_vec();
    defs.push(opt("min-count", "prune words rarer than this (default 1)"));
    let opts = Opts::parse(args, &defs)?;
    let input = opts.required("input")?.to_string();
    let column = opts.required("column")?.to_string();
    let out = opts.required("out")?.to_string();
    let examples = super::read_corpus_file(&input)?;
    let corpus = Corpus::build(examples, opts.usize_or("min-count", 1)?)?;
    let encoded = corpus.encode_all()?;

    let (sequences, vocab, boundary, default_epochs): (Vec<Vec<usize>>, _, _, usize) =
        match column.as_str() {
            "words" => (
                encoded.iter().map(|e| e.words.clone()).collect(),
                &corpus.vocabs.words,
                BOS_IDX,
                30,
            ),
            "labels" => (
                encoded
                    .iter()
                    .map(|e| e.labels.clone().expect("training corpus is labeled"))
                    .collect(),
                &corpus.vocabs.labels,
                BOL_IDX,
                20,
            ),
            other => {
                return Err(CmdError::usage(format!(
                    "--column must be words or labels, got '{other}'"
                )))
            }
        };

    let cfg = NnlmConfig {
        dim: opts.usize_or("embed", 200)?,
        hidden: opts.usize_or("nnlm-hidden", 200)?,
        context: opts.usize_or("nnlm-context", 5)?,
        epochs: opts.usize_or("nnlm-epochs", default_epochs)?,
        learning_rate: opts.f64_or("nnlm-lr", 0.1)?,
        boundary_index: boundary,
    };
    let seed = opts.u64_or("seed", 42)?;
    let result = nnlm_pretrain(&sequences, vocab.len(), &cfg, &mut Rng::new(seed))?;
    for (i, loss) in result.epoch_loss.iter().enumerate() {
        println!("nnlm epoch={} loss={loss:.6}", i + 1);
    }
    save_embeddings(Path::new(&out), &column, vocab, &result.table)?;
    println!(
        "wrote {} {column} embeddings of size {} to {out}",
        result.table.vocab_size(),
        result.table.dim()
    );
    Ok(())
}
