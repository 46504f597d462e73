use clap::Parser;

use magic_mr::cli::{diagnostic, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("{}", diagnostic(&err));
        std::process::exit(err.exit_code());
    }
}
