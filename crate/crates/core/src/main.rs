use clap::Parser;

fn main() {
    let cli = halfline::cli::Cli::parse();
    std::process::exit(halfline::cli::run(&cli));
}
