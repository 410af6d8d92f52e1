use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use opo_sim::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = cli.resolve().and_then(|config| opo_sim::run(&config));
    match outcome {
        Ok(report) => {
            // A closed pipe (e.g. `| head`) is not a failure of the run.
            let mut out = std::io::stdout().lock();
            let _ = report
                .lines
                .iter()
                .try_for_each(|line| writeln!(out, "{line}"))
                .and_then(|_| report.files.iter().try_for_each(|f| writeln!(out, "wrote {}", f.display())));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("opo-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
