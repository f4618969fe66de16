use std::process::ExitCode;

use clap::Parser;
use ifsproj_cli::{run, Cli, Context};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Context::from_env().and_then(|ctx| run(&cli, &ctx));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
