use clap::Parser;

fn main() {
    let cli = skc_cli::Cli::parse();
    std::process::exit(skc_cli::run(cli));
}
