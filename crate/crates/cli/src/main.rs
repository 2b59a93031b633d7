use clap::Parser;

fn main() {
    let cli = slseg_cli::Cli::parse();
    if let Err(e) = slseg_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
