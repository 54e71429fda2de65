//! `gradcheck`: compare analytic gradients with central finite differences
//! on a small fixed instance of the chosen architecture.

use ldseq::nets::Arch;
use ldseq::train::desk_check;

use crate::opts::{flag, opt, OptDef, Opts};
use crate::CmdError;

pub const DEFS: [OptDef; 5] = [
    opt("arch", "architecture to check (default ldrnn)"),
    flag("classes", "enable class-embedding features"),
    flag("charconv", "enable the character convolution"),
    opt("seed", "parameter initialization seed (default 7)"),
    opt("tolerance", "maximum relative error accepted (default 1e-4)"),
];

pub fn run(args: &[String]) -> Result<(), CmdError> {
    let opts = Opts::parse(args, &DEFS)?;
    let arch = Arch::parse(opts.str_or("arch", "ldrnn"))?;
    let report = desk_check(
        arch,
        opts.bool_or("classes", false)?,
        opts.bool_or("charconv", false)?,
        opts.u64_or("seed", 7)?,
    )?;
    for (name, err) in &report.per_tensor {
        println!("tensor={name} max_rel_err={err:.3e}");
    }
    println!("overall max_rel_err={:.3e}", report.max_rel_err);
    let tolerance = opts.f64_or("tolerance", 1e-4)?;
    if report.passed(tolerance) {
        println!("gradcheck {}: PASS (tolerance {tolerance:.1e})", arch.name());
        Ok(())
    } else {
        Err(CmdError::runtime(format!(
            "gradcheck {}: FAIL, max relative error {:.3e} exceeds {tolerance:.1e}",
            arch.name(),
            report.max_rel_err
        )))
    }
}
