use clap::Parser;

fn main() {
    let cli = gomet::cli::Cli::parse();
    std::process::exit(gomet::cli::run(cli));
}
