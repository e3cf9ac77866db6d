use clap::Parser;

fn main() {
    let cli = cast_cli::Cli::parse();
    if let Err(e) = cast_cli::execute(&cli) {
        eprintln!("cast: {e}");
        std::process::exit(e.exit_code());
    }
}
