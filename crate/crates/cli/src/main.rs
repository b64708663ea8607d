use clap::Parser;

use hamint_cli::app::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(cli) {
        eprintln!("hamint: {err}");
        std::process::exit(err.exit_code());
    }
}
