use clap::Parser;
use tfic_cli::config::Cli;

fn main() {
    std::process::exit(tfic_cli::run(Cli::parse()));
}
