//! `gen-synth`: write synthetic train/dev/test corpora.

use std::path::Path;

use ldseq::synth::{generate, write_files, SynthConfig};

use crate::opts::{opt, OptDef, Opts};
use crate::CmdError;

pub const DEFS: [OptDef; 10] = [
    opt("out", "output directory for train.txt, dev.txt, test.txt (required)"),
    opt("seed", "generator seed (default 42)"),
    opt("n-train", "training sentences (default 200)"),
    opt("n-dev", "development sentences (default 50)"),
    opt("n-test", "test sentences (default 50)"),
    opt("labels", "number of labels (default 5)"),
    opt("vocab", "word inventory size (default 30)"),
    opt("len-min", "minimum sentence length (default 5)"),
    opt("len-max", "maximum sentence length (default 14)"),
    opt(
        "rho",
        "probability a label follows the label chain instead of the word (default 0.5)",
    ),
];

pub fn run(args: &[String]) -> Result<(), CmdError> {
    let mut defs = DEFS.to_vec();
    defs.push(opt("chain-noise", "uniform-noise probability of the chain (default 0.05)"));
    let opts = Opts::parse(args, &defs)?;
    let out = opts.required("out")?.to_string();
    let defaults = SynthConfig::default();
    let cfg = SynthConfig {
        seed: opts.u64_or("seed", defaults.seed)?,
        n_train: opts.usize_or("n-train", defaults.n_train)?,
        n_dev: opts.usize_or("n-dev", defaults.n_dev)?,
        n_test: opts.usize_or("n-test", defaults.n_test)?,
        n_labels: opts.usize_or("labels", defaults.n_labels)?,
        vocab_size: opts.usize_or("vocab", defaults.vocab_size)?,
        len_min: opts.usize_or("len-min", defaults.len_min)?,
        len_max: opts.usize_or("len-max", defaults.len_max)?,
        rho: opts.f64_or("rho", defaults.rho)?,
        chain_noise: opts.f64_or("chain-noise", defaults.chain_noise)?,
    };
    let data = generate(&cfg)?;
    write_files(&data, Path::new(&out))?;
    println!(
        "wrote {} train / {} dev / {} test sentences to {out}",
        data.train.len(),
        data.dev.len(),
        data.test.len()
    );
    Ok(())
}
