//! `evaluate`: score a prediction file against a gold file. Both are in the
//! column format; in each the last column is the label, so `predict` output
//! (input columns plus the predicted label appended) is directly usable as
//! the prediction file.

use ldseq::metrics::{cer, chunk_f1, concept_sequence, evaluate, token_accuracy_corpus};

use crate::opts::{flag, opt, OptDef, Opts};
use crate::CmdError;

pub const DEFS: [OptDef; 4] = [
    opt("gold", "reference corpus file (required)"),
    opt("pred", "prediction file; last column is the predicted label (required)"),
    opt("metric", "acc | f1 | cer | all (default all)"),
    flag("cer-include-void", "count O runs as concepts in the error rate"),
];

fn labels_of(path: &str) -> Result<Vec<Vec<String>>, CmdError> {
    let examples = super::read_corpus_file(path)?;
    Ok(examples
        .iter()
        .map(|s| s.labels().iter().map(|l| l.to_string()).collect())
        .collect())
}

pub fn run(args: &[String]) -> Result<(), CmdError> {
    let opts = Opts::parse(args, &DEFS)?;
    let gold = labels_of(opts.required("gold")?)?;
    let pred = labels_of(opts.required("pred")?)?;
    let include_void = opts.bool_or("cer-include-void", false)?;
    match opts.str_or("metric", "all") {
        "acc" => {
            let acc = token_accuracy_corpus(&gold, &pred)?;
            println!("token_accuracy {:.2}", 100.0 * acc);
        }
        "f1" => {
            let score = chunk_f1(&gold, &pred)?;
            println!("precision {:.2}", 100.0 * score.precision);
            println!("recall {:.2}", 100.0 * score.recall);
            println!("f1 {:.2}", 100.0 * score.f1);
        }
        "cer" => {
            let gold_concepts: Vec<Vec<String>> = gold
                .iter()
                .map(|g| concept_sequence(g, include_void))
                .collect();
            let pred_concepts: Vec<Vec<String>> = pred
                .iter()
                .map(|p| concept_sequence(p, include_void))
                .collect();
            let score = cer(&gold_concepts, &pred_concepts)?;
            println!("cer {:.2}", 100.0 * score.cer);
            println!("insertions {}", score.insertions);
            println!("deletions {}", score.deletions);
            println!("substitutions {}", score.substitutions);
            println!("ref_concepts {}", score.ref_concepts);
        }
        "all" => {
            let report = evaluate(&gold, &pred, include_void)?;
            print!("{}", report.kv_block());
            println!("{}", report.record_line());
        }
        other => {
            return Err(CmdError::usage(format!(
                "--metric must be acc, f1, cer, or all, got '{other}'"
            )))
        }
    }
    Ok(())
}
