use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eqindex::acceptance::{run_all, RunOptions};
use eqindex::scenario::{self, Kind, Precision};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "eqindex", version, about = "Equivariant index densities, heat traces and index cocycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for the CSV and JSON reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = PrecisionArg::F64)]
    precision: PrecisionArg,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Exact,
    F64,
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario file; repeat to run several scenarios concurrently.
    #[arg(long, required = true)]
    config: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenarios of any kind.
    Run(ConfigArgs),
    /// Fixed-point equivariant index.
    Index(ConfigArgs),
    /// CM cocycle at the fixed strata of the composite.
    Cm(ConfigArgs),
    /// Short-time limit of the JLO cocycle.
    JloLimit(ConfigArgs),
    /// Heat supertraces and traces on spectral models.
    HeatTrace(ConfigArgs),
    /// JLO cocycle on a time grid with Richardson extrapolation.
    JloNumeric(ConfigArgs),
    /// Parametrix heat coefficients against the exact kernel.
    VolterraCheck(ConfigArgs),
    /// Run the acceptance criteria.
    Verify {
        /// Criterion id, tag or name fragment.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn run_scenarios(cli: &Cli, args: &ConfigArgs, kind: Option<Kind>) -> ExitCode {
    let precision = match cli.precision {
        PrecisionArg::Exact => Precision::Exact,
        PrecisionArg::F64 => Precision::F64,
    };
    let mut loaded = Vec::new();
    for path in &args.config {
        match scenario::load(path, kind) {
            Ok(s) => loaded.push(s),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let mut names = BTreeSet::new();
    for s in &loaded {
        if !names.insert(s.name.clone()) {
            eprintln!("error: two scenarios are named `{}`", s.name);
            return ExitCode::from(2);
        }
    }
    let results: Vec<_> = loaded.par_iter().map(|s| scenario::run(s, precision)).collect();
    let mut code = 0u8;
    for (s, r) in loaded.iter().zip(results) {
        let report = match r {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {}: {e}", s.name);
                code = 2;
                continue;
            }
        };
        let (csv, _) = match report.write(&cli.out) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: writing reports for {}: {e}", s.name);
                code = 2;
                continue;
            }
        };
        let passed = report.checks.iter().filter(|c| c.pass).count();
        println!(
            "{} ({}, {}): {} rows, checks {}/{} -> {}",
            report.scenario,
            report.kind,
            report.precision,
            report.results.len(),
            passed,
            report.checks.len(),
            csv.display()
        );
        for c in report.checks.iter().filter(|c| !c.pass) {
            println!("  FAIL {}: {}", c.name, c.detail);
        }
        if !report.all_pass() && code == 0 {
            code = 1;
        }
    }
    ExitCode::from(code)
}

fn verify(filter: Option<&str>) -> ExitCode {
    let reports = run_all(filter, &RunOptions::default());
    if reports.is_empty() {
        eprintln!("error: no criterion matches `{}`", filter.unwrap_or_default());
        return ExitCode::from(2);
    }
    for r in &reports {
        println!("{r}");
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    println!("{passed}/{} criteria passed", reports.len());
    ExitCode::from(if passed == reports.len() { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match &cli.command {
        Command::Run(a) => run_scenarios(&cli, a, None),
        Command::Index(a) => run_scenarios(&cli, a, Some(Kind::FixedPointIndex)),
        Command::Cm(a) => run_scenarios(&cli, a, Some(Kind::CmCocycle)),
        Command::JloLimit(a) => run_scenarios(&cli, a, Some(Kind::JloLimit)),
        Command::HeatTrace(a) => run_scenarios(&cli, a, Some(Kind::HeatTrace)),
        Command::JloNumeric(a) => run_scenarios(&cli, a, Some(Kind::JloNumeric)),
        Command::VolterraCheck(a) => run_scenarios(&cli, a, Some(Kind::VolterraCheck)),
        Command::Verify { filter } => verify(filter.as_deref()),
    }
}
