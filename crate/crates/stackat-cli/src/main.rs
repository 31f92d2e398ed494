use clap::Parser;
use stackat_cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
