use clap::Parser;
use coinn_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if cli.json {
                println!("{}", outcome.json);
            } else {
                println!("{}", outcome.text);
            }
        }
        Err(e) => {
            eprintln!("coinn: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
