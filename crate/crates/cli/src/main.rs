use clap::Parser;

fn main() {
    let cli = osva_cli::Cli::parse();
    std::process::exit(osva_cli::dispatch(&cli));
}
