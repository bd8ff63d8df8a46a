//! Runs a built-in experiment through the same path as the command-line
//! tool and lists the files it wrote.
//!
//! Run with `cargo run --release --example write_outputs -- /tmp/lindey-demo`.

use lindey::io::{parse_args, run_suite};

fn main() -> lindey::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "lindey-demo".into());
    let cfg = parse_args([
        "lindey", "--experiment", "figure4", "--gammas", "0.01,0.1", "--format", "all", "--out-dir", &out,
    ])?;
    let outcome = run_suite(&cfg)?;
    for line in outcome.summary {
        println!("{line}");
    }
    for f in outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
