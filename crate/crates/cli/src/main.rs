mod angle;
mod args;
mod cmd;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let global = &cli.global;
    let result = match cli.command {
        Command::SpinCorrelation(a) => cmd::spin::run(a, global),
        Command::McRun(a) => cmd::mc::run(a, global),
        Command::BallProtocol(a) => cmd::ball::run(a, global),
        Command::CommonCause(a) => cmd::common_cause::run(a, global),
        Command::Chsh(a) => cmd::chsh::run(a, global),
    };
    match result {
        Ok(f) if f.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
