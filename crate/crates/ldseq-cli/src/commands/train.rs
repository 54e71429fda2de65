//! `train`: the full procedure — embedding pretraining (unless embeddings
//! are supplied or random initialization is requested), then forward,
//! backward, or bidirectional training, and model files written atomically.

use std::path::{Path, PathBuf};

use ldseq::corpus::{Corpus, SequenceExample, BOL_IDX, BOS_IDX};
use ldseq::decode::Direction;
use ldseq::embed::{nnlm_pretrain, EmbeddingTable, NnlmConfig};
use ldseq::model_io::{load_embeddings, save_model, SavedModel};
use ldseq::nets::{Arch, NetConfig};
use ldseq::numkit::Rng;
use ldseq::train::{
    train_bidirectional, train_model_hooked, EmbeddingInit, TrainConfig, TrainHooks,
};

use crate::opts::{flag, opt, OptDef, Opts};
use crate::CmdError;

pub const DEFS: [OptDef; 34] = [
    opt("train", "training corpus file (required)"),
    opt("dev", "development corpus file (defaults to the training file)"),
    opt("model-out", "output model path (required); bidir mode derives .fwd/.bwd paths"),
    opt("mode", "forward | backward | bidir (default forward)"),
    // network
    super::NET_DEFS[0],
    super::NET_DEFS[1],
    super::NET_DEFS[2],
    super::NET_DEFS[3],
    super::NET_DEFS[4],
    super::NET_DEFS[5],
    super::NET_DEFS[6],
    super::NET_DEFS[7],
    super::NET_DEFS[8],
    super::NET_DEFS[9],
    opt("jordan-feedback", "jordan label representation: onehot | prob"),
    // training loop
    super::TRAIN_LOOP_DEFS[0],
    super::TRAIN_LOOP_DEFS[1],
    super::TRAIN_LOOP_DEFS[2],
    super::TRAIN_LOOP_DEFS[3],
    super::TRAIN_LOOP_DEFS[4],
    super::TRAIN_LOOP_DEFS[5],
    super::TRAIN_LOOP_DEFS[6],
    super::TRAIN_LOOP_DEFS[7],
    super::TRAIN_LOOP_DEFS[8],
    super::TRAIN_LOOP_DEFS[9],
    // embeddings
    flag("random-init", "skip pretraining; Xavier-initialize all embeddings"),
    opt("embeds-words", "word embeddings file from pretrain-embeddings"),
    opt("embeds-labels", "label embeddings file from pretrain-embeddings"),
    opt("nnlm-hidden", "pretraining hidden size (default 200)"),
    opt("nnlm-context", "pretraining context length (default 5)"),
    opt("nnlm-lr", "pretraining learning rate (default 0.1)"),
    // bidirectional
    opt("bidir-epochs", "fine-tuning epochs of the bidirectional stage (default 8)"),
    opt("bidir-lambda", "L2 coefficient of the bidirectional stage (default 3e-4)"),
    flag("freeze-bidir", "skip fine-tuning; just pair and evaluate fwd+bwd"),
];

fn load_embedding_table(
    path: &str,
    expect_column: &str,
    corpus: &Corpus,
) -> Result<EmbeddingTable, CmdError> {
    let (column, vocab, table) = load_embeddings(Path::new(path))?;
    if column != expect_column {
        return Err(CmdError::usage(format!(
            "{path} holds {column} embeddings, expected {expect_column}"
        )));
    }
    let expected_vocab = match expect_column {
        "words" => &corpus.vocabs.words,
        _ => &corpus.vocabs.labels,
    };
    if &vocab != expected_vocab {
        return Err(CmdError::usage(format!(
            "{path}: embedding vocabulary does not match the training corpus"
        )));
    }
    Ok(table)
}

fn embeddings(
    opts: &Opts,
    net: &NetConfig,
    corpus: &Corpus,
    seed: u64,
) -> Result<EmbeddingInit, CmdError> {
    if opts.bool_or("random-init", false)? {
        return Ok(EmbeddingInit::random());
    }
    let mut init = EmbeddingInit::random();
    if let Some(path) = opts.get("embeds-words") {
        init.words = Some(load_embedding_table(path, "words", corpus)?);
    }
    if let Some(path) = opts.get("embeds-labels") {
        init.labels = Some(load_embedding_table(path, "labels", corpus)?);
    }
    let nnlm = NnlmConfig {
        dim: net.embed_dim,
        hidden: opts.usize_or("nnlm-hidden", 200)?,
        context: opts.usize_or("nnlm-context", 5)?,
        learning_rate: opts.f64_or("nnlm-lr", 0.1)?,
        ..NnlmConfig::default()
    };
    let encoded = corpus.encode_all()?;
    if init.words.is_none() {
        let sequences: Vec<Vec<usize>> = encoded.iter().map(|e| e.words.clone()).collect();
        eprintln!("pretraining word embeddings ({} epochs)", 30);
        let out = nnlm_pretrain(
            &sequences,
            corpus.vocabs.words.len(),
            &NnlmConfig {
                epochs: 30,
                boundary_index: BOS_IDX,
                ..nnlm.clone()
            },
            &mut Rng::stream(seed, 10),
        )?;
        init.words = Some(out.table);
    }
    if init.labels.is_none() && net.arch == Arch::LdRnn {
        let sequences: Vec<Vec<usize>> = encoded
            .iter()
            .map(|e| e.labels.clone().expect("training corpus is labeled"))
            .collect();
        eprintln!("pretraining label embeddings ({} epochs)", 20);
        let out = nnlm_pretrain(
            &sequences,
            corpus.vocabs.labels.len(),
            &NnlmConfig {
                epochs: 20,
                boundary_index: BOL_IDX,
                ..nnlm
            },
            &mut Rng::stream(seed, 11),
        )?;
        init.labels = Some(out.table);
    }
    Ok(init)
}

fn directional_path(base: &Path, tag: &str) -> PathBuf {
    match base.extension() {
        Some(ext) => {
            let stem = base.with_extension("");
            stem.with_extension(format!("{tag}.{}", ext.to_string_lossy()))
        }
        None => base.with_extension(tag),
    }
}

fn run_one_direction(
    corpus: &Corpus,
    dev: &[SequenceExample],
    net: &NetConfig,
    tc: &TrainConfig,
    direction: Direction,
    init: &EmbeddingInit,
) -> Result<ldseq::nets::ModelParams, CmdError> {
    let mut print = |r: &ldseq::train::EpochRecord| println!("{}", r.line());
    let (params, _) = train_model_hooked(
        corpus,
        dev,
        net,
        tc,
        direction,
        init,
        &mut TrainHooks {
            eval: None,
            on_epoch: Some(&mut print),
        },
    )?;
    Ok(params)
}

pub fn run(args: &[String]) -> Result<(), CmdError> {
    let opts = Opts::parse(args, &DEFS)?;
    let train_path = opts.required("train")?.to_string();
    let model_out = PathBuf::from(opts.required("model-out")?);
    let mode = opts.str_or("mode", "forward").to_string();
    let net = super::net_config(&opts)?;
    let tc = super::train_config(&opts)?;

    let train_examples = super::read_corpus_file(&train_path)?;
    let corpus = Corpus::build(train_examples, opts.usize_or("min-count", 1)?)?;
    let dev = match opts.get("dev") {
        Some(path) => super::read_corpus_file(path)?,
        None => {
            eprintln!("no --dev given; using the training file for model selection");
            corpus.examples.clone()
        }
    };

    let init = embeddings(&opts, &net, &corpus, tc.seed)?;

    match mode.as_str() {
        "forward" | "backward" => {
            let direction = Direction::parse(&mode)?;
            let params = run_one_direction(&corpus, &dev, &net, &tc, direction, &init)?;
            let model = SavedModel {
                direction,
                vocabs: corpus.vocabs.clone(),
                params,
            };
            save_model(&model_out, &model)?;
            println!("wrote {} model to {}", mode, model_out.display());
        }
        "bidir" => {
            println!("training the forward model");
            let fwd = run_one_direction(&corpus, &dev, &net, &tc, Direction::Forward, &init)?;
            println!("training the backward model");
            let bwd = run_one_direction(&corpus, &dev, &net, &tc, Direction::Backward, &init)?;
            let bidir_tc = TrainConfig {
                epochs: opts.usize_or("bidir-epochs", 8)?,
                lambda: opts.f64_or("bidir-lambda", 3e-4)?,
                ..tc
            };
            let fine_tune = !opts.bool_or("freeze-bidir", false)?;
            println!("combining directions (fine_tune={fine_tune})");
            let (pair, history) =
                train_bidirectional(fwd, bwd, &corpus, &dev, &bidir_tc, fine_tune)?;
            for r in &history {
                println!("{}", r.line());
            }
            let fwd_path = directional_path(&model_out, "fwd");
            let bwd_path = directional_path(&model_out, "bwd");
            save_model(
                &fwd_path,
                &SavedModel {
                    direction: Direction::Forward,
                    vocabs: corpus.vocabs.clone(),
                    params: pair.forward,
                },
            )?;
            save_model(
                &bwd_path,
                &SavedModel {
                    direction: Direction::Backward,
                    vocabs: corpus.vocabs.clone(),
                    params: pair.backward,
                },
            )?;
            println!(
                "wrote bidirectional pair to {} and {}",
                fwd_path.display(),
                bwd_path.display()
            );
        }
        other => {
            return Err(CmdError::usage(format!(
                "--mode must be forward, backward, or bidir, got '{other}'"
            )))
        }
    }
    Ok(())
}
