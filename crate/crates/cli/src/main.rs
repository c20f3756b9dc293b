use std::io::Write;

use clap::Parser;
use glyph_cli::{exit_code, run, RunConfig};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let config = RunConfig::parse();
    let mut stdout = std::io::stdout().lock();
    let result = run(&config, &mut stdout);
    let _ = stdout.flush();
    if let Err(err) = result {
        eprintln!("glyph: {err}");
        std::process::exit(exit_code(&err));
    }
}
