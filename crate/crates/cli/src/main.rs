use clap::Parser;
use grid_sentinel_cli::commands::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
