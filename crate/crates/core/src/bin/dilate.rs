use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kernel_dilation::error::Result;
use kernel_dilation::scenario::{self, Scenario, Task, Tolerances, Verdict, EXIT_ERROR};
use kernel_dilation::{io, linearisation};

#[derive(Parser)]
#[command(name = "dilate", version, about = "Kernel linearisation and dilation checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the tasks of a scenario file.
    Run {
        scenario: PathBuf,
        /// Write the canonical JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Comma separated task list replacing the scenario's.
        #[arg(long, value_delimiter = ',')]
        tasks: Option<Vec<Task>>,
        #[arg(long)]
        seed: Option<u64>,
        /// Sets psd, rank and representation tolerances at once.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Re-check a saved linearisation against a saved kernel.
    Verify { linearisation: PathBuf, kernel: PathBuf },
    /// Test two saved linearisations for unitary equivalence.
    Equiv { first: PathBuf, second: PathBuf },
}

fn run(
    path: PathBuf,
    report: Option<PathBuf>,
    tasks: Option<Vec<Task>>,
    seed: Option<u64>,
    tol: Option<f64>,
    quiet: bool,
) -> Result<i32> {
    let mut sc = Scenario::load(&path)?;
    if let Some(t) = tasks {
        sc.tasks = t;
    }
    if let Some(s) = seed {
        sc.seed = s;
    }
    if let Some(t) = tol {
        sc.tolerances = Tolerances::uniform(t);
    }
    let r = scenario::run(&sc)?;
    if let Some(out) = report {
        r.save(&out)?;
    }
    if !quiet {
        for t in &r.tasks {
            let verdict = match t.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Error => "ERROR",
                Verdict::Note => "note",
            };
            match &t.error {
                Some(e) => println!("{:<15} {verdict} {}: {}", t.task.name(), e.kind, e.message),
                None => println!("{:<15} {verdict}", t.task.name()),
            }
        }
    }
    Ok(r.exit_code())
}

fn verify(lin: PathBuf, kernel: PathBuf) -> Result<i32> {
    let (l, hash) = io::load_linearisation(&lin)?;
    let k = io::load_kernel(&kernel)?;
    let residual = l.reconstruction_residual(&k)?;
    let actual = io::kernel_hash(&k);
    let hash_ok = hash.as_deref().is_none_or(|h| h == actual);
    println!("reconstruction residual {residual:e}");
    match hash {
        Some(h) if h != actual => println!("kernel hash mismatch: recorded {h}, file {actual}"),
        Some(_) => println!("kernel hash matches"),
        None => println!("no kernel hash recorded"),
    }
    let scale = 1.0 + kernel_dilation::kernel::gram_block(&k).spectral_norm();
    Ok(if hash_ok && residual <= 10.0 * l.tol() * scale { 0 } else { 1 })
}

fn equiv(a: PathBuf, b: PathBuf) -> Result<i32> {
    let (la, _) = io::load_linearisation(&a)?;
    let (lb, _) = io::load_linearisation(&b)?;
    let tol = la.tol().max(lb.tol()).max(1e-8);
    match linearisation::unitary_equivalence(&la, &lb, None, tol) {
        Ok(eq) => {
            println!("equivalent");
            println!("isometry residual {:e}", eq.isometry_residual);
            println!("coisometry residual {:e}", eq.coisometry_residual);
            println!("intertwining residual {:e}", eq.intertwining_residual);
            Ok(0)
        }
        Err(kernel_dilation::Error::NotEquivalent(msg)) => {
            println!("not equivalent: {msg}");
            Ok(1)
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("DILATE_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { scenario, report, tasks, seed, tol, quiet } => run(scenario, report, tasks, seed, tol, quiet),
        Cmd::Verify { linearisation, kernel } => verify(linearisation, kernel),
        Cmd::Equiv { first, second } => equiv(first, second),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
