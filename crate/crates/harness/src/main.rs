use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phasefield_harness::{
    cmd_jump_sweep, cmd_report, cmd_simulate, cmd_sweep, cmd_validate_transport, ExperimentConfig, Format,
    HarnessError, Result,
};

#[derive(Parser)]
#[command(name = "phasefield", version, about = "Radial convective Cahn-Hilliard experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single solver run at (params.eps, params.alpha).
    Simulate(Common),
    /// Every (eps, alpha) pair of the sweep axes.
    Sweep(Common),
    /// Zero-mobility run against the characteristics solution, then again
    /// with half the grid spacing and time step.
    ValidateTransport(Common),
    /// Pressure jumps and discrepancy pairings of the closed-form profiles.
    JumpSweep(Common),
    /// Re-emit the stored table of a previous run.
    Report {
        /// Directory holding manifest.json.
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::from_json("{}")?,
        };
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(f) = self.format {
            cfg.format = f.into();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = c.load()?;
            cmd_simulate(&cfg, &cfg.out_dir)?;
            println!("wrote {}", cfg.out_dir.display());
        }
        Command::Sweep(c) => {
            let cfg = c.load()?;
            let (_, failures) = cmd_sweep(&cfg, &cfg.out_dir)?;
            println!("wrote {}", cfg.out_dir.display());
            if failures > 0 {
                return Err(HarnessError::Run {
                    stage: "sweep",
                    source: phasefield_core::Error::InvalidArgument(format!("{failures} run(s) failed; see the status column")),
                });
            }
        }
        Command::ValidateTransport(c) => {
            let cfg = c.load()?;
            let (_, check) = cmd_validate_transport(&cfg, &cfg.out_dir)?;
            println!(
                "L2 error {:.3e} (limit {:.1e}), reduction under halving {:.3} (need {:.1})",
                check.l2_error[0], check.tolerance, check.reduction, check.min_reduction
            );
            if !check.passed {
                return Err(HarnessError::Check("transport oracle comparison out of tolerance".into()));
            }
        }
        Command::JumpSweep(c) => {
            let cfg = c.load()?;
            let (_, js) = cmd_jump_sweep(&cfg, &cfg.out_dir)?;
            for l in &js.limits {
                println!(
                    "t = {} δ = {}: jump / Young-Laplace = {:.5} (κ = {:.5}, J = {:.5})",
                    l.t, l.delta_probe, l.ratio, l.kappa, l.compression
                );
            }
        }
        Command::Report { from, out, format } => {
            let out = out.unwrap_or_else(|| from.clone());
            let path = cmd_report(&from, format.into(), &out)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
