//! Runs the bundled scenario files and prints one line per task.
//!
//! `cargo run --example scenarios -- examples/scenarios/s3_invariant.json`
//! runs a single file.
use std::path::PathBuf;

use kernel_dilation::scenario::{run, Scenario};

fn main() -> kernel_dilation::Result<()> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    let files = if args.is_empty() {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios");
        let mut v: Vec<PathBuf> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
        v.sort();
        v
    } else {
        args
    };
    for f in files {
        let sc = Scenario::load(&f)?;
        let report = run(&sc)?;
        println!("{} (exit {})", sc.name, report.exit_code());
        for t in &report.tasks {
            let extra = t.error.as_ref().map(|e| format!(" {}", e.kind)).unwrap_or_default();
            println!("  {:<15} {:?}{extra}", t.task.name(), t.verdict);
        }
    }
    Ok(())
}
