use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod error;
mod output;
mod presets;

use config::{Cli, RunConfig, Settings};
use error::CliError;
use output::Cell;

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.common, &cli.command)?;
    let table = commands::run(&cfg)?;
    let text = output::render(&cfg.header(), &table, cfg.format);
    output::emit(cfg.out.as_deref(), &text)?;
    if cfg.settings == Settings::Selftest {
        let failed = table.rows.iter().filter(|r| r[1] == Cell::text("FAIL")).count();
        if failed > 0 {
            return Err(CliError::SelftestFailed(failed));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("floquet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
