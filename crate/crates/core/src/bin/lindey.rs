use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use lindey::io::{run_suite, Cli};
use lindey::Error;

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("LINDEY_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("LINDEY_THREADS: expected a non-negative integer, got `{v}`"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.len() <= 1 {
        eprintln!("{}", Cli::command().render_help());
        return ExitCode::from(2);
    }
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let cli = Cli::try_parse_from(&args).unwrap_or_else(|e| e.exit());
    let cfg = match cli.resolve() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_suite(&cfg) {
        Ok(out) => {
            for line in &out.summary {
                println!("{line}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Usage(_) => 2,
                _ => 1,
            })
        }
    }
}
