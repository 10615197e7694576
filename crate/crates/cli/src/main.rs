use clap::Parser;

use cmmsb_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(err) = cmmsb_cli::run(cli) {
        eprintln!("cmmsb: {err}");
        std::process::exit(err.exit_code());
    }
}
