use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use compdna::validate::run_all;
use compdna::{parse_config, CodeRegistry, Error, Simulation, SweepResult};

/// Composite-DNA coded channel simulator.
#[derive(Debug, Parser)]
#[command(name = "compdna", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a BLER sweep described by a JSON config and write a CSV report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's per-n trial cap.
        #[arg(long)]
        max_trials: Option<u64>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Codes manifest to use instead of the built-in one.
        #[arg(long)]
        codes: Option<PathBuf>,
        /// Also write the decoder input of trial 0 for every n.
        #[arg(long)]
        dump_llrs: Option<PathBuf>,
    },
    /// Run the invariant suites.
    Validate {
        #[arg(long)]
        codes: Option<PathBuf>,
    },
    /// List the codes in the manifest.
    Codes {
        #[arg(long)]
        codes: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn io_failure(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn registry(codes: Option<&Path>) -> Result<CodeRegistry, Failure> {
    match codes {
        Some(path) => CodeRegistry::from_manifest_path(path).map_err(|e| match e {
            Error::Io(io) => Failure::Io(format!("{}: {io}", path.display())),
            other => Failure::Config(other.to_string()),
        }),
        None => Ok(CodeRegistry::builtin()),
    }
}

fn print_summary(result: &SweepResult) {
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_owned(), |v| format!("{v:.4e}"));
    println!(
        "{:>6} {:>9} {:>8} {:>11} {:>23} {:>11} {:>9}",
        "n", "trials", "errors", "BLER", "95% CI", "BER", "iters"
    );
    for p in &result.points {
        println!(
            "{:>6} {:>9} {:>8} {:>11} {:>23} {:>11} {:>9}",
            p.n,
            p.trials,
            p.block_errors,
            fmt(p.bler),
            format!("[{}, {}]", fmt(p.ci_low), fmt(p.ci_high)),
            fmt(p.ber),
            p.mean_iters.map_or_else(|| "-".to_owned(), |v| format!("{v:.2}")),
        );
    }
}

fn dump_llrs(sim: &Simulation, path: &Path) -> Result<(), Failure> {
    let file = File::create(path).map_err(io_failure(path))?;
    let mut w = BufWriter::new(file);
    let l = sim.config().bits_per_symbol();
    writeln!(w, "n,trial,position,bit,llr").map_err(io_failure(path))?;
    for &n in &sim.config().n_values {
        let llr = sim.trial_llrs(n, 0)?;
        for (j, v) in llr.values.iter().enumerate() {
            writeln!(w, "{n},0,{},{},{v}", j / l, j % l).map_err(io_failure(path))?;
        }
    }
    w.flush().map_err(io_failure(path))
}

struct SimulateArgs<'a> {
    config: &'a Path,
    out: &'a Path,
    seed: Option<u64>,
    max_trials: Option<u64>,
    workers: usize,
    codes: Option<&'a Path>,
    llr_dump: Option<&'a Path>,
}

fn simulate(args: SimulateArgs<'_>) -> Result<(), Failure> {
    let SimulateArgs {
        config,
        out,
        seed,
        max_trials,
        workers,
        codes,
        llr_dump,
    } = args;
    let text = std::fs::read_to_string(config).map_err(io_failure(config))?;
    let registry = registry(codes)?;
    let mut cfg = parse_config(&text, &registry).map_err(|e| match e {
        Error::Io(_) => Failure::Io(e.to_string()),
        other => Failure::Config(format!("{}: {other}", config.display())),
    })?;
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    if let Some(max_trials) = max_trials {
        cfg.max_trials = max_trials;
    }
    // fail on an unwritable output before spending time on the sweep
    let file = File::create(out).map_err(io_failure(out))?;
    let sim = Simulation::new(cfg)?;
    if let Some(path) = llr_dump {
        dump_llrs(&sim, path)?;
    }
    let result = sim.run_sweep(workers)?;
    let mut w = BufWriter::new(file);
    result
        .write_csv(&mut w)
        .map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    w.flush().map_err(io_failure(out))?;
    print_summary(&result);
    Ok(())
}

fn validate(codes: Option<&Path>) -> Result<(), Failure> {
    let registry = registry(codes)?;
    let reports = run_all(&registry);
    for r in &reports {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure::Config(format!("{failed} of {} suites failed", reports.len())));
    }
    Ok(())
}

fn list_codes(codes: Option<&Path>) -> Result<(), Failure> {
    let registry = registry(codes)?;
    println!("{:<16} {:>5} {:>5} {:>7}  provenance", "name", "K", "N", "rate");
    for e in registry.entries() {
        println!("{:<16} {:>5} {:>5} {:>7.4}  {}", e.name, e.k, e.n, e.rate, e.provenance);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            max_trials,
            workers,
            codes,
            dump_llrs,
        } => simulate(SimulateArgs {
            config,
            out,
            seed: *seed,
            max_trials: *max_trials,
            workers: *workers,
            codes: codes.as_deref(),
            llr_dump: dump_llrs.as_deref(),
        }),
        Command::Validate { codes } => validate(codes.as_deref()),
        Command::Codes { codes } => list_codes(codes.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            ExitCode::from(2)
        }
    }
}
