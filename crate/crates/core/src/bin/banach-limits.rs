use clap::Parser;

use banach_limits::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
