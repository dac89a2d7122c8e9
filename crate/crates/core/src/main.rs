use clap::Parser;

fn main() {
    let cli = polarfact::cli::Cli::parse();
    std::process::exit(polarfact::cli::main_with(cli));
}
