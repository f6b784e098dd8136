use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use wiretap_core::config::{RateUnit, SolverConfig};
use wiretap_core::error::Error;
use wiretap_core::fading::RayleighFadingPair;
use wiretap_core::policies::PowerConstraint;
use wiretap_core::scheme::{evaluate, Diagnostics, Scheme};
use wiretap_core::sweep::run_sweep;
use wiretap_core::validation::run_validation;

const EXIT_VALIDATION: u8 = 1;
const EXIT_NO_CONVERGENCE: u8 = 2;
const EXIT_BAD_INPUT: u8 = 3;

/// Secrecy capacity of Rayleigh block-fading wiretap channels.
#[derive(Parser, Debug)]
#[command(name = "wiretap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one scheme at one power budget and print the result as JSON.
    Solve(SolveArgs),
    /// Evaluate schemes over a grid of power budgets and write CSV.
    Sweep(SweepArgs),
    /// Run the oracle suite and print a pass/fail table.
    Validate(ValidateArgs),
}

/// Options shared by every subcommand.
#[derive(Args, Debug)]
struct Common {
    /// Mean power gain of the main channel.
    #[arg(long, default_value_t = 1.0)]
    gamma_m: f64,

    /// Mean power gain of the eavesdropper channel.
    #[arg(long, default_value_t = 1.0)]
    gamma_e: f64,

    /// Rate unit for output: nats or bits.
    #[arg(long)]
    unit: Option<RateUnit>,

    /// Worker threads (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,

    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Solver configuration file (TOML, keys as in SolverConfig).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    scheme: Scheme,

    /// Average power budget (linear; noise variance is 1).
    #[arg(long, conflicts_with = "pbar_db")]
    pbar: Option<f64>,

    /// Average power budget in dB.
    #[arg(long, allow_hyphen_values = true)]
    pbar_db: Option<f64>,

    /// Fixed on/off threshold; optimized when omitted.
    #[arg(long)]
    tau: Option<f64>,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Grid in dB as START:STOP:STEP, both ends inclusive.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "pbar")]
    pbar_db_range: Option<String>,

    /// Explicit linear power budgets.
    #[arg(long, value_delimiter = ',')]
    pbar: Option<Vec<f64>>,

    /// Schemes to evaluate (default: all).
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Monte Carlo sample count per check.
    #[arg(long)]
    mc_samples: Option<usize>,

    #[command(flatten)]
    common: Common,
}

/// A failure together with the exit status it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain { .. } | Error::Config(_) | Error::Io(_) => EXIT_BAD_INPUT,
            _ => EXIT_NO_CONVERGENCE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn bad_input(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_BAD_INPUT,
        message: message.into(),
    }
}

impl Common {
    /// Defaults, then the config file, then flags.
    fn solver_config(&self) -> Result<SolverConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => SolverConfig::from_file(path)?,
            None => SolverConfig::default(),
        };
        if let Some(unit) = self.unit {
            cfg.unit = unit;
        }
        if let Some(seed) = self.seed {
            cfg.mc_seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn model(&self) -> Result<RayleighFadingPair, Failure> {
        Ok(RayleighFadingPair::new(self.gamma_m, self.gamma_e)?)
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| bad_input(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Serialize)]
struct SolveOutput {
    scheme: Scheme,
    gamma_m: f64,
    gamma_e: f64,
    p_bar: f64,
    p_bar_db: f64,
    rate: f64,
    unit: RateUnit,
    rate_nats: f64,
    realized_power: f64,
    diagnostics: Diagnostics,
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let cfg = args.common.solver_config()?;
    let model = args.common.model()?;
    let constraint = match (args.pbar, args.pbar_db) {
        (Some(p), None) => PowerConstraint::new(p)?,
        (None, Some(db)) => PowerConstraint::from_db(db)?,
        _ => return Err(bad_input("exactly one of --pbar or --pbar-db is required")),
    };
    let ev = evaluate(args.scheme, &model, &constraint, args.tau, &cfg)?;
    let out = SolveOutput {
        scheme: ev.scheme,
        gamma_m: model.gamma_m,
        gamma_e: model.gamma_e,
        p_bar: ev.p_bar,
        p_bar_db: 10.0 * ev.p_bar.log10(),
        rate: cfg.unit.convert(ev.rate_nats),
        unit: cfg.unit,
        rate_nats: ev.rate_nats,
        realized_power: ev.realized_power,
        diagnostics: ev.diagnostics.clone(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("plain data serializes");
    text.push('\n');
    args.common.emit(&text)?;
    if ev.diagnostics.converged {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_NO_CONVERGENCE,
            message: format!("{} solver did not converge", ev.scheme),
        })
    }
}

/// Parses START:STOP:STEP into the inclusive grid START, START+STEP, ...
fn parse_range(text: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(bad_input(format!("expected START:STOP:STEP, got '{text}'")));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad_input(format!("not a number: '{s}' in '{text}'")))
    };
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(bad_input(format!("need STOP >= START and STEP > 0 in '{text}'")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = args.common.solver_config()?;
    let model = args.common.model()?;
    let grid = match (&args.pbar_db_range, &args.pbar) {
        (Some(range), None) => parse_range(range)?,
        (None, Some(values)) => {
            if let Some(bad) = values.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
                return Err(bad_input(format!("power budgets must be positive, got {bad}")));
            }
            values.iter().map(|p| 10.0 * p.log10()).collect()
        }
        _ => return Err(bad_input("exactly one of --pbar-db-range or --pbar is required")),
    };
    let schemes = args.schemes.clone().unwrap_or_else(|| Scheme::ALL.to_vec());
    let result = run_sweep(&model, &grid, &schemes, &cfg, None)?;
    args.common.emit(&result.to_csv(cfg.unit))?;
    if result.all_converged() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_NO_CONVERGENCE,
            message: "some sweep points did not converge".into(),
        })
    }
}

fn validate(args: &ValidateArgs) -> Result<(), Failure> {
    let mut cfg = args.common.solver_config()?;
    if let Some(n) = args.mc_samples {
        cfg.mc_samples = n;
        cfg.validate()?;
    }
    let report = run_validation(&cfg)?;
    match &args.common.out {
        Some(_) => {
            let mut text = serde_json::to_string_pretty(&report).expect("plain data serializes");
            text.push('\n');
            args.common.emit(&text)?;
            eprintln!("{report}");
        }
        None => println!("{report}"),
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VALIDATION,
            message: "validation failed".into(),
        })
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let common = match &cli.command {
        Command::Solve(a) => &a.common,
        Command::Sweep(a) => &a.common,
        Command::Validate(a) => &a.common,
    };
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(bad_input("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| bad_input(format!("cannot start worker pool: {e}")))?;
    }
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Validate(a) => validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_BAD_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_inclusive() {
        let g = parse_range("-10:40:2").unwrap();
        assert_eq!(g.len(), 26);
        assert_eq!(g[0], -10.0);
        assert_eq!(*g.last().unwrap(), 40.0);
        assert_eq!(parse_range("0:0:1").unwrap(), vec![0.0]);
    }

    #[test]
    fn bad_ranges_are_rejected() {
        for r in ["1:2", "a:2:1", "5:0:1", "0:5:0", "0:5:-1"] {
            assert_eq!(parse_range(r).err().map(|f| f.code), Some(EXIT_BAD_INPUT), "{r}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
