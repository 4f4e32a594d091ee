use clap::Parser;

fn main() {
    let cli = mfdfa_core::cli::Cli::parse();
    std::process::exit(mfdfa_core::cli::run(&cli));
}
