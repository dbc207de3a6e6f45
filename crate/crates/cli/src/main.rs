use clap::Parser;

fn main() {
    let cli = stablefair_cli::Cli::parse();
    if let Err(e) = stablefair_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
