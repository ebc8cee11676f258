use clap::Parser;

fn main() {
    let cli = rcc_cli::Cli::parse();
    if let Err(e) = rcc_cli::run(cli) {
        eprintln!("rcc: {e}");
        std::process::exit(e.exit_code());
    }
}
