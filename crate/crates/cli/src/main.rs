use clap::Parser;
use modone_cli::RunConfig;

fn main() {
    std::process::exit(modone_cli::run(RunConfig::parse()));
}
