use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use hpqc_core::geometry::LogicalFootprint;
use hpqc_core::resources::{ChipCostModel, DEFAULT_CHIPS_PER_LOGICAL};
use hpqc_core::runner::verify::{run_verify, Suite};
use hpqc_core::runner::{estimate, resolve_seed, run_scenario, Scenario};

#[derive(Parser)]
#[command(name = "hpqc", version, about = "Multi-tenant topological cluster-state mainframe simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chips and logical qubits for one rectangular region.
    Estimate {
        #[arg(long)]
        width: u64,
        #[arg(long)]
        depth: u64,
        /// Logical-qubit footprint in cells, as WIDTHxDEPTH.
        #[arg(long, default_value = "20x40", value_parser = parse_footprint)]
        footprint: LogicalFootprint,
        #[arg(long, default_value_t = DEFAULT_CHIPS_PER_LOGICAL, value_parser = clap::value_parser!(u64).range(1..))]
        chips_per_logical: u64,
    },
    /// Runs a scenario file and writes its report.
    Run {
        scenario: PathBuf,
        /// Overrides the scenario seed and HPQC_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Report file; standard output when absent.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Runs the property suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        /// Defaults to HPQC_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Stabilizer,
    Allocator,
    Protocol,
    All,
}

fn parse_footprint(s: &str) -> Result<LogicalFootprint, String> {
    let (w, d) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{s}` is not WIDTHxDEPTH"))?;
    let w: u64 = w.trim().parse().map_err(|_| format!("bad width in `{s}`"))?;
    let d: u64 = d.trim().parse().map_err(|_| format!("bad depth in `{s}`"))?;
    LogicalFootprint::new(w, d).map_err(|e| e.to_string())
}

fn env_seed() -> Option<String> {
    std::env::var("HPQC_SEED").ok()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Estimate {
            width,
            depth,
            footprint,
            chips_per_logical,
        } => {
            let model = match ChipCostModel::new(chips_per_logical, footprint) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match estimate(width, depth, model) {
                Ok(e) => {
                    print!("{}", e.machine());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    let mut cmd = Cli::command();
                    cmd.build();
                    let usage = cmd
                        .find_subcommand_mut("estimate")
                        .map(|c| c.render_usage().to_string())
                        .unwrap_or_default();
                    eprintln!("error: {e}\n\n{usage}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Run {
            scenario,
            seed,
            report,
            format,
        } => {
            let parsed = Scenario::load(&scenario).and_then(|s| {
                let seed = resolve_seed(seed, s.seed, env_seed().as_deref())?;
                run_scenario(&s, seed, scenario.parent())
            });
            let r = match parsed {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {}: {e}", scenario.display());
                    return ExitCode::from(2);
                }
            };
            let body = match format {
                Format::Text => r.text(),
                Format::Machine => r.machine(),
            };
            match &report {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, body) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{body}"),
            }
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                for f in r.invariant_violations.iter().chain(&r.failures) {
                    eprintln!("failure: {f}");
                }
                ExitCode::from(1)
            }
        }
        Command::Verify {
            suite,
            trials,
            seed,
        } => {
            let seed = match seed {
                Some(s) => s,
                None => match env_seed() {
                    Some(v) => match v.trim().parse() {
                        Ok(s) => s,
                        Err(_) => {
                            eprintln!("error: HPQC_SEED `{v}` is not an unsigned integer");
                            return ExitCode::from(2);
                        }
                    },
                    None => 0,
                },
            };
            let suites: Vec<Suite> = match suite {
                SuiteArg::Stabilizer => vec![Suite::Stabilizer],
                SuiteArg::Allocator => vec![Suite::Allocator],
                SuiteArg::Protocol => vec![Suite::Protocol],
                SuiteArg::All => Suite::ALL.to_vec(),
            };
            let report = run_verify(&suites, trials, seed);
            print!("{}", report.text());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
