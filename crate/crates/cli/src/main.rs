use clap::Parser;

fn main() {
    let cli = donorsim_cli::Cli::parse();
    match donorsim_cli::run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
