use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use slicesim_core::golden::{self, GoldenDiff, GOLDEN_DIR_ENV};
use slicesim_core::switching::CaseId;
use slicesim_core::{run_scenario, RunArtifacts, RunError, Scenario, ScenarioError};

const EXIT_VALIDATION: u8 = 1;
const EXIT_INVARIANT: u8 = 2;
const EXIT_GOLDEN: u8 = 3;

#[derive(Parser)]
#[command(name = "slicesim", version, about = "Inter-slice switching simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a scenario file and list every violation.
    Validate { scenario: PathBuf },
    /// Run a scenario to completion.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the event trace here (stdout if omitted and no metrics path given).
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
        /// Check invariants after every event even if the scenario does not ask for it.
        #[arg(long)]
        check_invariants: bool,
    },
    /// Compare a trace against a golden trace, ignoring seq and timestamps.
    DiffGolden {
        trace: PathBuf,
        /// Golden file. Omit and pass --case to use the golden directory.
        golden: Option<PathBuf>,
        #[arg(long, conflicts_with = "golden")]
        case: Option<CaseId>,
        #[arg(long, env = GOLDEN_DIR_ENV, default_value = "golden")]
        golden_dir: PathBuf,
    },
    /// Run several scenarios over a range of seeds and write one metrics CSV.
    Sweep {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
        #[arg(long)]
        check_invariants: bool,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn run_error_code(e: &RunError) -> u8 {
    match e {
        RunError::Scenario(_) => EXIT_VALIDATION,
        RunError::Sim(_) => EXIT_INVARIANT,
    }
}

fn report_scenario_error(e: &ScenarioError) {
    match e {
        ScenarioError::Invalid(list) => {
            for v in list {
                eprintln!("{v}");
            }
        }
        other => eprintln!("error: {other}"),
    }
}

fn validate(path: &Path) -> ExitCode {
    let sc = match Scenario::load(path) {
        Ok(sc) => sc,
        Err(e) => {
            report_scenario_error(&e);
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let violations = sc.validate();
    if violations.is_empty() {
        println!("OK");
        return ExitCode::SUCCESS;
    }
    for v in &violations {
        println!("{v}");
    }
    ExitCode::from(EXIT_VALIDATION)
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn run(path: &Path, seed: u64, trace_out: Option<&Path>, metrics_out: Option<&Path>, checks: bool) -> ExitCode {
    let sc = match Scenario::load(path) {
        Ok(sc) => sc,
        Err(e) => {
            report_scenario_error(&e);
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let art = match run_scenario(&sc, seed, checks) {
        Ok(a) => a,
        Err(RunError::Scenario(e)) => {
            report_scenario_error(&e);
            return ExitCode::from(EXIT_VALIDATION);
        }
        Err(e) => return fail(run_error_code(&e), e),
    };
    let outputs = [(trace_out, art.trace_text()), (metrics_out, art.metrics_csv())];
    for (p, text) in &outputs {
        if let Some(p) = p {
            if let Err(e) = write(p, text) {
                return fail(1, e);
            }
        }
    }
    if trace_out.is_none() && metrics_out.is_none() {
        print!("{}", art.trace_text());
    }
    ExitCode::SUCCESS
}

fn diff_golden(trace: &Path, golden: &Path) -> ExitCode {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()));
    let (actual, expected) = match (read(trace), read(golden)) {
        (Ok(a), Ok(g)) => (a, g),
        (Err(e), _) | (_, Err(e)) => return fail(EXIT_VALIDATION, e),
    };
    match golden::diff(&actual, &expected) {
        Ok(GoldenDiff::Equal) => {
            println!("OK");
            ExitCode::SUCCESS
        }
        Ok(GoldenDiff::Diverged { line, expected, actual }) => {
            println!("first divergence at line {line}");
            println!("  golden: {}", expected.as_deref().unwrap_or("<end of trace>"));
            println!("  actual: {}", actual.as_deref().unwrap_or("<end of trace>"));
            ExitCode::from(EXIT_GOLDEN)
        }
        Err(e) => fail(EXIT_GOLDEN, format!("malformed trace: {e}")),
    }
}

fn sweep(paths: &[PathBuf], seeds: std::ops::Range<u64>, jobs: usize, out: Option<&Path>, checks: bool) -> ExitCode {
    let mut scenarios = Vec::new();
    for p in paths {
        match Scenario::load(p) {
            Ok(sc) => scenarios.push(sc),
            Err(e) => {
                report_scenario_error(&e);
                return ExitCode::from(EXIT_VALIDATION);
            }
        }
    }
    let work: Vec<(&Scenario, u64)> = scenarios.iter().flat_map(|s| seeds.clone().map(move |seed| (s, seed))).collect();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => return fail(1, e),
    };
    let results: Vec<Result<RunArtifacts, RunError>> =
        pool.install(|| work.par_iter().map(|(sc, seed)| run_scenario(sc, *seed, checks)).collect());
    let mut csv = String::new();
    for r in results {
        let art = match r {
            Ok(a) => a,
            Err(e) => return fail(run_error_code(&e), e),
        };
        let text = art.metrics_csv();
        // keep the header only once
        let body = if csv.is_empty() { &text[..] } else { text.split_once('\n').map_or("", |x| x.1) };
        csv.push_str(body);
    }
    match out {
        Some(p) => {
            if let Err(e) = write(p, &csv) {
                return fail(1, e);
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Validate { scenario } => validate(&scenario),
        Cmd::Run {
            scenario,
            seed,
            trace_out,
            metrics_out,
            check_invariants,
        } => run(&scenario, seed, trace_out.as_deref(), metrics_out.as_deref(), check_invariants),
        Cmd::DiffGolden {
            trace,
            golden,
            case,
            golden_dir,
        } => {
            let golden = match (golden, case) {
                (Some(g), _) => g,
                (None, Some(c)) => golden_dir.join(golden::case_file_name(c)),
                (None, None) => return fail(EXIT_VALIDATION, "give a golden file or --case"),
            };
            diff_golden(&trace, &golden)
        }
        Cmd::Sweep {
            scenarios,
            seeds,
            first_seed,
            jobs,
            metrics_out,
            check_invariants,
        } => sweep(
            &scenarios,
            first_seed..first_seed + seeds,
            jobs,
            metrics_out.as_deref(),
            check_invariants,
        ),
    }
}
