use clap::Parser;
use rabishift_cli::Cli;

fn main() {
    let cli = Cli::parse();
    match cli.run() {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("rabishift: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
