use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gffv::driver::{
    load_config, parse_assignment, run_convergence_study, run_mass_sweep, run_simulation,
    ReferenceMode, ScenarioRequest, SimConfig, SCENARIOS,
};
use gffv::{Error, Result};

#[derive(Parser)]
#[command(name = "gffv", version, about = "Finite volume solver for aggregation-diffusion equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run {
        #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        /// Scenario parameter override, `key=value` (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory (overrides the configured one).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refinement study with error norms and observed orders.
    Convergence {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Reference::ClosedForm)]
        reference: Reference,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Bisect the total mass between a decaying and a blowing-up run.
    SweepMass {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 4)]
        iters: usize,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List the built-in scenarios.
    ListScenarios,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Reference {
    ClosedForm,
    FinestGrid,
}

fn request(name: &str, set: &[String]) -> Result<ScenarioRequest> {
    let mut r = ScenarioRequest::new(name);
    for s in set {
        let (k, v) = parse_assignment(s)?;
        r.overrides.insert(k, v);
    }
    Ok(r)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GFFV_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::config("GFFV_THREADS", "expected a positive integer"))?;
        if n == 0 {
            return Err(Error::config("GFFV_THREADS", "expected a positive integer"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("GFFV_THREADS", e.to_string()))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Run {
            config,
            scenario,
            set,
            out,
        } => {
            let mut cfg: SimConfig = match (config, scenario) {
                (Some(path), _) => {
                    if !set.is_empty() {
                        return Err(Error::config("--set", "only valid with --scenario"));
                    }
                    load_config(&path)?
                }
                (None, Some(name)) => request(&name, &set)?.resolve()?,
                (None, None) => return Err(Error::config("run", "need --config or --scenario")),
            };
            if out.is_some() {
                cfg.output_dir = out;
            }
            let report = run_simulation(cfg)?;
            println!("{}", serde_json::to_string_pretty(&report.summary)?);
        }
        Command::Convergence {
            scenario,
            levels,
            reference,
            set,
        } => {
            let mode = match reference {
                Reference::ClosedForm => ReferenceMode::ClosedForm,
                Reference::FinestGrid => ReferenceMode::FinestGrid,
            };
            let table = run_convergence_study(&request(&scenario, &set)?, levels, mode)?;
            print!("{}", table.to_csv());
            for r in table.rows.iter().filter(|r| !r.steady) {
                eprintln!("warning: level with {} cells ended as `{}`", r.cells, r.status.label());
            }
        }
        Command::SweepMass {
            scenario,
            lo,
            hi,
            iters,
            set,
        } => {
            let sweep = run_mass_sweep(&request(&scenario, &set)?, lo, hi, iters)?;
            println!("{}", serde_json::to_string_pretty(&sweep)?);
        }
        Command::ListScenarios => {
            for s in SCENARIOS {
                println!("{:<20} {}", s.name, s.summary);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
