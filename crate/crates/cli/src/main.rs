use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bvpdegree::config::Config;
use bvpdegree::degree::{builtin_map, degree_on_ball, BUILTIN_MAPS};
use bvpdegree::report::{self, Report, RunStatus};
use bvpdegree::selftest::{self, SelftestOptions};
use clap::{Parser, Subcommand};

/// Topological indices and solvability verdicts for 1-D Dirichlet problems.
#[derive(Parser)]
#[command(name = "bvpdegree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured verdicts and write a JSON report.
    Analyze {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the spectral tables of both linearizations.
    Spectrum { config: PathBuf },
    /// Print the degree of a built-in map on a ball.
    DegreeDemo {
        name: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Run the acceptance catalog.
    Selftest {
        #[arg(long)]
        list: bool,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0, hide = true)]
        tolerance_scale: f64,
    },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), String> {
    let mut text = report.to_json();
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Config, String> {
    Config::from_path(path).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze { config, out } => {
            let config = match load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let report = match report::analyze(&config) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            if let Err(e) = emit(&report, out.as_ref()) {
                return fail(e);
            }
            eprintln!("{}", report.summary.join("\n"));
            match report.status() {
                RunStatus::Ran => ExitCode::SUCCESS,
                RunStatus::Refused => ExitCode::from(2),
            }
        }
        Command::Spectrum { config } => {
            let config = match load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match report::spectrum(&config) {
                Ok(r) => match emit(&r, None) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(e),
                },
                Err(e) => fail(e),
            }
        }
        Command::DegreeDemo { name, radius } => {
            let Some(map) = builtin_map(&name) else {
                return fail(format!("unknown map {name}; available: {}", BUILTIN_MAPS.join(", ")));
            };
            if !(radius > 0.0 && radius.is_finite()) {
                return fail(format!("radius {radius} must be positive"));
            }
            match degree_on_ball(&map, radius) {
                Ok(d) => {
                    println!("{}", d.value);
                    if d.is_heuristic() {
                        eprintln!("note: sampled degree, not a certified winding count");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Selftest { list, tolerance_scale } => {
            if list {
                for line in selftest::list() {
                    println!("{line}");
                }
                return ExitCode::SUCCESS;
            }
            let results = selftest::run(SelftestOptions { tolerance_scale });
            let mut ok = true;
            for r in &results {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:>2} {} ({:.0} ms): {}", r.id, r.name, r.elapsed_ms, r.detail);
                ok &= r.passed;
            }
            let passed = results.iter().filter(|r| r.passed).count();
            println!("{passed}/{} criteria passed", results.len());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
