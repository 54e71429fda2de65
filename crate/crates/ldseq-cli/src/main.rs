//! `ldseq`: train, apply, and score sequence-labeling models.

mod commands;
mod opts;

use std::process::ExitCode;

/// A command failure with its exit code: 2 for usage/config mistakes,
/// 1 for runtime errors.
pub struct CmdError {
    pub message: String,
    pub usage: bool,
}

impl CmdError {
    pub fn usage(message: impl Into<String>) -> CmdError {
        CmdError {
            message: message.into(),
            usage: true,
        }
    }

    pub fn runtime(message: impl Into<String>) -> CmdError {
        CmdError {
            message: message.into(),
            usage: false,
        }
    }
}

impl From<ldseq::Error> for CmdError {
    fn from(e: ldseq::Error) -> CmdError {
        let usage = matches!(e, ldseq::Error::Config(_) | ldseq::Error::Arg(_));
        CmdError {
            message: e.to_string(),
            usage,
        }
    }
}

const USAGE: &str = "\
usage: ldseq <command> [options]

commands:
  gen-synth            generate synthetic train/dev/test corpora
  pretrain-embeddings  train a language model and save its embedding table
  train                train a tagger (forward, backward, or bidirectional)
  predict              label a corpus file with a trained model
  evaluate             score predictions against gold labels
  gradcheck            compare analytic gradients with finite differences
  count-params         print exact parameter counts for a configuration
  help [command]       show options of one command

every command also accepts --config PATH (flat 'key = value' file);
precedence is flag > LDSEQ_SEED environment variable > config file.
";

fn dispatch(command: &str, args: &[String]) -> Result<(), CmdError> {
    match command {
        "gen-synth" => commands::gen_synth::run(args),
        "pretrain-embeddings" => commands::pretrain::run(args),
        "train" => commands::train::run(args),
        "predict" => commands::predict::run(args),
        "evaluate" => commands::evaluate::run(args),
        "gradcheck" => commands::gradcheck::run(args),
        "count-params" => commands::count_params::run(args),
        "help" | "--help" | "-h" => {
            match args.first().map(|s| s.as_str()) {
                Some(c) => print!("{}", commands::help_for(c)?),
                None => print!("{USAGE}"),
            }
            Ok(())
        }
        other => Err(CmdError::usage(format!(
            "unknown command '{other}'\n\n{USAGE}"
        ))),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return ExitCode::from(2);
    };
    match dispatch(command, &args[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ldseq {command}: {}", e.message);
            ExitCode::from(if e.usage { 2 } else { 1 })
        }
    }
}
