mod args;
mod commands;
mod report;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{cmd_compare, cmd_generate, cmd_mine};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.command {
        Command::Mine(args) => cmd_mine(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Generate(args) => cmd_generate(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}
