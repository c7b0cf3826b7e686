use clap::Parser;

fn main() {
    std::process::exit(mfrep_cli::run(mfrep_cli::Cli::parse()));
}
