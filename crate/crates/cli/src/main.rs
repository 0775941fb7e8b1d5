use std::process::ExitCode;

use clap::Parser;

use valnet_cli::{execute, workers_from_env, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let summary = workers_from_env().and_then(|workers| execute(&cli, workers));
    match summary {
        Ok(summary) => {
            for (label, result) in &summary.outcomes {
                match result {
                    Ok(()) => log::info!("{label}: done"),
                    Err(e) => log::error!("{label}: failed: {e:#}"),
                }
            }
            if summary.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
