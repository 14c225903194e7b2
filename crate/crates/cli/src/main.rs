//! `reliaforge`: path enumeration, reliability evaluation and budget
//! allocation for small generator/line/load networks.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use reliaforge_core::SolverConfig;

use commands::{Format, Workspace};

#[derive(Debug, Parser)]
#[command(name = "reliaforge", version, about)]
struct Cli {
    /// Directory receiving the CSV and JSON output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct NetworkArg {
    /// Network description (JSON).
    #[arg(long)]
    network: PathBuf,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Number of projected-gradient starts.
    #[arg(long, default_value_t = 64)]
    starts: usize,
    #[arg(long, env = "RELIAFORGE_SEED", default_value_t = 42)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        if self.starts == 0 {
            bail!("--starts must be at least 1");
        }
        Ok(SolverConfig {
            num_starts: self.starts,
            seed: self.seed,
            ..SolverConfig::default()
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every simple path per generator/load pair.
    Paths {
        #[command(flatten)]
        net: NetworkArg,
    },
    /// Path, pair and system reliability at the initial state.
    Evaluate {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Optimal increments for a single budget.
    AllocateTraditional {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long)]
        budget: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Optimal index over a range of budgets.
    Sweep {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Iterated attacker/defender allocation.
    AllocateGame {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        target: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Both allocators side by side.
    Compare {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        target: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Argument checks that do not need the network file.
fn check_numbers(cmd: &Command) -> Result<()> {
    let finite_nonneg = |name: &str, v: Option<f64>| -> Result<()> {
        match v {
            Some(x) if !(x.is_finite() && x >= 0.0) => {
                bail!("{name} must be a finite non-negative number, got {x}")
            }
            _ => Ok(()),
        }
    };
    let target = |t: f64| -> Result<()> {
        if !(t.is_finite() && t > 0.0 && t <= 1.0) {
            bail!("--target must lie in (0, 1], got {t}");
        }
        Ok(())
    };
    match cmd {
        Command::Paths { .. } | Command::Evaluate { .. } => Ok(()),
        Command::AllocateTraditional { budget, solver, .. } => {
            finite_nonneg("--budget", *budget)?;
            solver.config().map(drop)
        }
        Command::Sweep {
            from,
            to,
            step,
            solver,
            ..
        } => {
            finite_nonneg("--from", Some(*from))?;
            finite_nonneg("--to", Some(*to))?;
            if !(step.is_finite() && *step > 0.0) {
                bail!("--step must be positive, got {step}");
            }
            if to < from {
                bail!("--to ({to}) is below --from ({from})");
            }
            solver.config().map(drop)
        }
        Command::AllocateGame {
            budget, target: t, ..
        } => {
            finite_nonneg("--budget", *budget)?;
            target(*t)
        }
        Command::Compare {
            budget,
            target: t,
            solver,
            ..
        } => {
            finite_nonneg("--budget", *budget)?;
            target(*t)?;
            solver.config().map(drop)
        }
    }
}

fn run(cli: &Cli) -> Result<String> {
    let load = |net: &NetworkArg| Workspace::load(&net.network, &cli.out_dir);
    match &cli.command {
        Command::Paths { net } => commands::paths(&load(net)?),
        Command::Evaluate { net, format } => commands::evaluate(&load(net)?, *format),
        Command::AllocateTraditional {
            net,
            budget,
            solver,
            format,
        } => {
            let ws = load(net)?;
            let b = ws.budget(*budget)?;
            commands::allocate_traditional_cmd(&ws, b, &solver.config()?, *format)
        }
        Command::Sweep {
            net,
            from,
            to,
            step,
            solver,
        } => commands::sweep(&load(net)?, *from, *to, *step, &solver.config()?),
        Command::AllocateGame {
            net,
            budget,
            target,
            format,
        } => {
            let ws = load(net)?;
            let b = ws.budget(*budget)?;
            commands::allocate_game(&ws, b, *target, *format)
        }
        Command::Compare {
            net,
            budget,
            target,
            solver,
            format,
        } => {
            let ws = load(net)?;
            let b = ws.budget(*budget)?;
            commands::compare(&ws, b, *target, &solver.config()?, *format)
        }
    }
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
    if let Err(e) = check_numbers(&cli.command) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
