use clap::error::ErrorKind;
use clap::Parser;

use pairtrace_cli::{run, Cli, CliError};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            let message = e
                .to_string()
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .to_string();
            eprintln!("{}", CliError::Usage(message).to_json_line());
            std::process::exit(2);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("{}", err.to_json_line());
        std::process::exit(err.exit_code());
    }
}
