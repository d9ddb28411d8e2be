mod config;
mod error;
mod run;

use std::process::ExitCode;

use clap::Parser;

use crate::config::Cli;
use crate::error::CliError;

const THREADS_VAR: &str = "MESOHEAT_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| CliError::config(THREADS_VAR, format!("expected a thread count, got {text:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(THREADS_VAR, e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads()
        .and_then(|_| cli.command.resolve())
        .and_then(|config| run::run(&config).map(|summary| (config, summary)));
    match result {
        Ok((config, summary)) => {
            // Keep stdout clean for data when no output file was named.
            if config.output.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
