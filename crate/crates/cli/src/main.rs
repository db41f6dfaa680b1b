use anyhow::Context;
use clap::Parser;
use isoslice_cli::app::{run, Cli};
use isoslice_cli::error::{CliError, EXIT_FAILED};

fn try_main(cli: &Cli) -> anyhow::Result<i32> {
    let name = std::env::args().nth(1).unwrap_or_default();
    run(cli).with_context(|| format!("isoslice {name}"))
}

fn main() {
    let cli = Cli::parse();
    let code = match try_main(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            e.downcast_ref::<CliError>().map_or(EXIT_FAILED, CliError::exit_code)
        }
    };
    std::process::exit(code);
}
