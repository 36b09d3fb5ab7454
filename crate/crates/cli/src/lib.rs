//! Command-line front end for `memcons-core`.

pub mod args;
mod jobs;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};

/// Parses `argv` (program name first), runs the job and returns the process
/// exit code: 0 on success, 2 for bad parameters, 3 for unmet
/// preconditions such as unstable parameters, 4 for numerical failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return 2;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let outcome = match &cli.command {
        Command::Graph(c) => jobs::graph(c),
        Command::Region(c) => jobs::region(c),
        Command::H2(c) => jobs::h2_job(c),
        Command::Simulate(c) => jobs::simulate(c),
        Command::OptimalDepth(c) => jobs::optimal_depth_job(c),
        Command::OptimalParams(c) => jobs::optimal_params_job(c),
        Command::Figure(c) => jobs::figure(c),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
