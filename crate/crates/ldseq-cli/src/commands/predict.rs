//! `predict`: label a corpus file with a trained model (or a bidirectional
//! pair) and write the input columns plus a predicted-label column.

use std::fmt::Write as _;
use std::path::Path;

use ldseq::corpus::SequenceExample;
use ldseq::decode::{self, BidirModel, Direction};
use ldseq::model_io::{load_model, SavedModel};

use crate::opts::{flag, opt, OptDef, Opts};
use crate::CmdError;

pub const DEFS: [OptDef; 5] = [
    opt("model", "model file (single-direction prediction)"),
    flag("bidir", "combine a forward and a backward model"),
    opt("fwd", "forward model file (with --bidir)"),
    opt("bwd", "backward model file (with --bidir)"),
    opt("input", "corpus file to label: word [class] [label] columns (required)"),
];

fn load(path: &str) -> Result<SavedModel, CmdError> {
    if !Path::new(path).exists() {
        return Err(CmdError::usage(format!("model file not found: {path}")));
    }
    Ok(load_model(Path::new(path))?)
}

fn check_input(model: &SavedModel, examples: &[SequenceExample]) -> Result<(), CmdError> {
    if model.params.config.use_classes
        && examples
            .iter()
            .any(|s| s.tokens.iter().any(|t| t.word_class.is_none()))
    {
        return Err(CmdError::usage(
            "the model uses word classes but the input has no class column",
        ));
    }
    Ok(())
}

fn render(examples: &[SequenceExample], predictions: &[Vec<String>]) -> String {
    let mut out = String::new();
    for (s, labels) in examples.iter().zip(predictions) {
        for (t, label) in s.tokens.iter().zip(labels) {
            let _ = write!(out, "{}", t.word);
            if let Some(c) = &t.word_class {
                let _ = write!(out, " {c}");
            }
            if !t.label.is_empty() {
                let _ = write!(out, " {}", t.label);
            }
            let _ = writeln!(out, " {label}");
        }
        out.push('\n');
    }
    out
}

pub fn run(args: &[String]) -> Result<(), CmdError> {
    let mut defs = DEFS.to_vec();
    defs.push(opt("output", "write here instead of standard output"));
    let opts = Opts::parse(args, &defs)?;
    let input = opts.required("input")?.to_string();
    let examples = super::read_corpus_file(&input)?;

    let predictions: Vec<Vec<String>> = if opts.bool_or("bidir", false)? {
        let fwd = load(opts.required("fwd")?)?;
        let bwd = load(opts.required("bwd")?)?;
        if fwd.vocabs != bwd.vocabs {
            return Err(CmdError::usage(
                "forward and backward models have different vocabularies",
            ));
        }
        if fwd.direction != Direction::Forward || bwd.direction != Direction::Backward {
            return Err(CmdError::usage(
                "--fwd must hold a forward model and --bwd a backward model",
            ));
        }
        check_input(&fwd, &examples)?;
        let pair = BidirModel::new(fwd.params, bwd.params)?;
        let vocabs = fwd.vocabs;
        examples
            .iter()
            .map(|s| {
                let enc = vocabs.encode_tokens(s);
                let p = decode::predict_bidirectional(&enc, &pair)?;
                Ok(p.labels
                    .iter()
                    .map(|&i| vocabs.labels.item(i).to_string())
                    .collect())
            })
            .collect::<Result<_, ldseq::Error>>()?
    } else {
        let model = load(opts.required("model")?)?;
        check_input(&model, &examples)?;
        examples
            .iter()
            .map(|s| {
                let enc = model.vocabs.encode_tokens(s);
                let p = match model.direction {
                    Direction::Forward => decode::predict(&enc, &model.params),
                    Direction::Backward => decode::predict_reversed(&enc, &model.params),
                };
                p.labels
                    .iter()
                    .map(|&i| model.vocabs.labels.item(i).to_string())
                    .collect()
            })
            .collect()
    };

    let text = render(&examples, &predictions);
    match opts.get("output") {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CmdError::runtime(format!("cannot write {path}: {e}")))?,
        None => print!("{text}"),
    }
    Ok(())
}
