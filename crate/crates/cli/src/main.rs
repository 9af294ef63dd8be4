use clap::Parser;

fn main() {
    let cli = scanorder_cli::Cli::parse();
    std::process::exit(scanorder_cli::main_with(cli));
}
