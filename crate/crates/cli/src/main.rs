use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epr_cqed::dynamics::TimeGrid;
use epr_cqed::experiments::{
    darkstate_table, run_scenario, run_sweep, verify, write_metadata, CheckStatus, ScenarioConfig, Solver,
};
use epr_cqed::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_INTEGRATION: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "epr-cqed", version, about = "Two-stage cavity STIRAP simulator for polarization-entangled photon pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Closed-system Schrödinger evolution.
    Evolve,
    /// Cavity-damped master equation, dense solver.
    Lindblad,
    /// Cavity-damped master equation, quantum-trajectory ensemble.
    Mcwf,
    /// Final P and F over a grid of κ/g₀.
    Sweep,
    /// Mixing angles and dark-state coordinates versus time.
    Darkstate,
    /// Run the invariant suite; exit code 3 on any failure.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Lindblad => "lindblad",
            Command::Mcwf => "mcwf",
            Command::Sweep => "sweep",
            Command::Darkstate => "darkstate",
            Command::Verify => "verify",
        }
    }
}

#[derive(Args)]
struct Common {
    /// key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: out/<command>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// schrodinger, lindblad or mcwf.
    #[arg(long, global = true)]
    solver: Option<String>,
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[arg(long, global = true)]
    trajectories: Option<usize>,
    #[arg(long = "kappa-ratio", global = true)]
    kappa_ratio: Option<f64>,
    /// Worker threads for trajectory ensembles (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::IntegrationFailure { .. } | Error::VanishingJumpWeights { .. } | Error::NonFinite(_) => EXIT_INTEGRATION,
        _ => EXIT_VALIDATION,
    }
}

fn build_config(command: Command, common: &Common) -> Result<ScenarioConfig, Error> {
    let mut config = match &common.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => ScenarioConfig::default(),
    };
    let flag_solver = common.solver.as_deref().map(str::parse::<Solver>).transpose()?;
    let fixed = match command {
        Command::Evolve => Some(Solver::Schrodinger),
        Command::Lindblad => Some(Solver::Lindblad),
        Command::Mcwf => Some(Solver::Mcwf),
        _ => None,
    };
    match (fixed, flag_solver) {
        (Some(f), Some(s)) if f != s => {
            return Err(Error::InvalidConfig(format!(
                "--solver {s} conflicts with the `{}` command",
                command.name()
            )))
        }
        (Some(f), _) => config.solver = f,
        (None, Some(s)) => config.solver = s,
        (None, None) if command == Command::Sweep && config.solver == Solver::Schrodinger => {
            config.solver = Solver::Lindblad
        }
        (None, None) => {}
    }
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    if let Some(n) = common.nmax {
        config.n_max = n;
    }
    if let Some(n) = common.trajectories {
        config.n_trajectories = n;
    }
    if let Some(r) = common.kappa_ratio {
        config.kappa_ratio = Some(r);
    }
    if let Some(out) = &common.out {
        config.out = Some(out.clone());
    }
    if common.workers == Some(0) {
        return Err(Error::InvalidConfig("--workers must be >= 1".into()));
    }
    config.validate()?;
    Ok(config)
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
}

fn run(command: Command, common: &Common) -> Result<u8, Error> {
    let config = build_config(command, common)?;
    let out_dir = config
        .out
        .clone()
        .unwrap_or_else(|| Path::new("out").join(command.name()));
    let workers = common.workers;
    match command {
        Command::Evolve | Command::Lindblad | Command::Mcwf => {
            let output = run_scenario(&config, workers)?;
            let m = &output.metrics;
            println!(
                "P = {:.6} (stderr {:.2e})  F_uncond = {:.6}  F_cond = {}  leakage = {:.3e}  <Q> = {:.6}",
                m.success_probability,
                output.stderr_p,
                m.fidelity_unconditional,
                fmt_opt(m.fidelity_conditional),
                m.leakage,
                m.q_expectation
            );
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            print_written(&output.write(&out_dir, command.name())?);
        }
        Command::Sweep => {
            let result = run_sweep(&config, workers)?;
            for r in &result.rows {
                println!(
                    "kappa/g0 = {:.4e}  P = {:.6e} (stderr {:.2e})  F_cond = {}  F_uncond = {:.6}",
                    r.kappa_over_g0,
                    r.success_probability,
                    r.stderr,
                    fmt_opt(r.fidelity_conditional),
                    r.fidelity_unconditional
                );
            }
            print_written(&result.write(&out_dir)?);
        }
        Command::Darkstate => {
            let start = std::time::Instant::now();
            let model = config.model()?;
            let grid: TimeGrid = config.grid;
            let table = darkstate_table(&model, &grid.output_times())?;
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("darkstate.csv");
            let header = config.to_text();
            table.write(&path, &header)?;
            write_metadata(&out_dir, &[("command", "darkstate".to_string())], &header, start.elapsed())?;
            print_written(&[path, out_dir.join("metadata.txt")]);
        }
        Command::Verify => {
            let report = verify(&config, workers)?;
            for c in &report.checks {
                let value = c.value.map_or(String::new(), |v| format!("{v:.3e}"));
                let bound = c.threshold.map_or(String::new(), |v| format!(" (<= {v:.1e})"));
                println!("{:<8} {:<28} {value}{bound}  {}", c.status.to_string().to_uppercase(), c.name, c.note);
            }
            print_written(&report.write(&out_dir)?);
            if !report.passed() {
                let failed = report.checks.iter().filter(|c| c.status == CheckStatus::Fail).count();
                eprintln!("verify: {failed} check(s) failed");
                return Ok(EXIT_VERIFY);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command, &cli.common) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
