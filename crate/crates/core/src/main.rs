use clap::Parser;
use shufreg::cli::{execute, exit_code, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Err(e) = execute(&cli, &mut std::io::stdout().lock()) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
