//! `vmac`: trace ingestion, admission queries, Hoeffding bounds and the
//! Monte Carlo experiments, with plot-ready CSV output.

use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = vmac_cli::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}
