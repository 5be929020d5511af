use std::process::ExitCode;

use clap::Parser;
use kohnbound::cli::{config_from_flags, execute, threads_from_env, Flags};

fn main() -> ExitCode {
    let flags = Flags::parse();
    let run = config_from_flags(flags).and_then(|cfg| {
        let json = execute(&cfg, threads_from_env()?)?;
        if cfg.report.is_none() {
            print!("{json}");
        }
        Ok(())
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
