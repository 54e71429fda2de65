//! `count-params`: exact per-layer parameter counts for a configuration.

use ldseq::nets::count_params;

use crate::opts::{opt, OptDef, Opts};
use crate::CmdError;

pub const DEFS: [OptDef; 11] = [
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
    opt("labels", "output layer size, i.e. number of labels (required)"),
];

pub fn run(args: &[String]) -> Result<(), CmdError> {
    let mut defs = DEFS.to_vec();
    defs.push(opt("jordan-feedback", "jordan label representation: onehot | prob"));
    let opts = Opts::parse(args, &defs)?;
    let config = super::net_config(&opts)?;
    let labels: usize = opts
        .required("labels")?
        .parse()
        .map_err(|_| CmdError::usage("--labels: bad count"))?;
    let counts = count_params(&config, labels);
    println!("arch {}", config.arch.name());
    for term in &counts.terms {
        println!("{} {}", term.name, term.count);
    }
    println!("weights_total {}", counts.weight_total);
    println!("biases_total {}", counts.bias_total);
    Ok(())
}
