use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use relaxed_minimax::harness::{
    generate, generate_many, load_scenario, load_suite, run_scenario, run_suite, GenParams, Kind, RunOptions,
    SuiteReport, Variant, REPORT_DIR_ENV,
};
use relaxed_minimax::Status;

#[derive(Parser)]
#[command(
    name = "relaxed-minimax",
    version,
    about = "Verify relaxed minimax inequalities on scenario suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a suite file.
    Run {
        suite: PathBuf,
        /// Default tolerance for exact assertions.
        #[arg(long)]
        tol: Option<f64>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the gap table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Directory for the JSON report when `--report` is absent.
        #[arg(long, env = REPORT_DIR_ENV)]
        report_dir: Option<PathBuf>,
        /// Only print the summary line.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Write seeded random scenarios to a suite file.
    Gen {
        #[arg(long)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Number of scenarios, with consecutive seeds.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Generators per family.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Variant>,
        #[arg(long)]
        p_non_lsc: Option<f64>,
        #[arg(long)]
        p_improper: Option<f64>,
    },
    /// Run a single scenario and print its report.
    Check {
        scenario: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn write(path: &Path, contents: &[u8]) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run {
            suite,
            tol,
            jobs,
            report,
            csv,
            report_dir,
            quiet,
        } => {
            let scenarios = load_suite(&suite).map_err(|e| format!("{}: {e}", suite.display()))?;
            let result = run_suite(&scenarios, &RunOptions { jobs, tol });
            let report = report.or_else(|| {
                let stem = suite.file_stem()?.to_string_lossy().into_owned();
                report_dir.map(|d| d.join(format!("{stem}.report.json")))
            });
            if let Some(path) = &report {
                write(path, result.to_json().as_bytes())?;
            }
            if let Some(path) = &csv {
                let mut buf = Vec::new();
                result.write_csv(&mut buf).map_err(|e| e.to_string())?;
                write(path, &buf)?;
            }
            print_suite(&result, quiet);
            Ok(ExitCode::from(result.summary.exit_code() as u8))
        }
        Command::Gen {
            kind,
            seed,
            out,
            count,
            n,
            variant,
            p_non_lsc,
            p_improper,
        } => {
            let params = GenParams {
                n,
                p_non_lsc,
                p_improper,
                variant,
                identity: None,
            };
            let text = if count == 1 {
                serde_json::to_string_pretty(&vec![generate(kind, seed, &params)])
            } else {
                serde_json::to_string_pretty(&generate_many(kind, seed, count, &params))
            }
            .map_err(|e| e.to_string())?;
            write(&out, text.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { scenario, tol } => {
            let s = load_scenario(&scenario).map_err(|e| format!("{}: {e}", scenario.display()))?;
            let r = run_scenario(&s, tol);
            println!("{}", serde_json::to_string_pretty(&r).map_err(|e| e.to_string())?);
            Ok(if matches!(r.status, Status::Fail | Status::Error) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

fn print_suite(r: &SuiteReport, quiet: bool) {
    if quiet {
        let s = r.summary;
        println!(
            "{} scenarios: {} pass, {} fail, {} vacuous, {} error",
            s.total, s.pass, s.fail, s.vacuous, s.error
        );
    } else {
        print!("{}", r.to_text());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
