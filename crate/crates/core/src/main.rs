use clap::Parser;

fn main() {
    let cli = phguide::cli::Cli::parse();
    std::process::exit(phguide::cli::run(&cli));
}
