use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reachtime::cases::CASE_IDS;
use reachtime_cli::run::{self, GainSource, RunContext};
use reachtime_cli::{CliError, Overrides, ScenarioConfig};

/// Minimum reaching-time gain synthesis, simulation and reproduction runs.
#[derive(Parser)]
#[command(name = "reachtime", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory (default: the config's out_dir, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for audit samples and random polytope members.
    #[arg(long)]
    seed: Option<u64>,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    fixed_clock: bool,
    /// Euler step.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time span.
    #[arg(long)]
    horizon: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            dt: self.dt,
            horizon: self.horizon,
        }
    }

    fn context(&self, cfg_out: Option<&str>) -> RunContext {
        RunContext {
            out: self
                .out
                .clone()
                .or_else(|| cfg_out.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out")),
            fixed_clock: self.fixed_clock,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a gain and its reaching-time certificate.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the closed loop; the gain comes from --certificate, the
    /// config's "gain", or a fresh synthesis.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Report written by `synth`.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the UVC bound over a log-spaced rho grid.
    SweepRho {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rerun a reference case (or `all`) and compare with the reference figures.
    Reproduce {
        #[arg(long)]
        case: String,
        #[command(flatten)]
        common: Common,
    },
    /// Write the synthesis program as JSON.
    DumpProgram {
        #[arg(long)]
        config: PathBuf,
        /// Fixed rho for UVC programs.
        #[arg(long)]
        rho: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-verify the certificate stored in a report.
    Verify {
        #[arg(long)]
        report: PathBuf,
    },
}

fn load(path: &Path, common: &Common) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::load(path)?;
    cfg.apply(&common.overrides());
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth { config, common } => {
            let cfg = load(&config, &common)?;
            let ctx = common.context(cfg.out_dir.as_deref());
            let (report, outcome) = run::cmd_synth(cfg, &ctx);
            if let Some(c) = &report.certificate {
                println!(
                    "{} bound {:.6}{}",
                    c.kind(),
                    c.t_bound(),
                    c.rho().map(|r| format!(" at rho {r:.4}")).unwrap_or_default()
                );
            }
            outcome
        }
        Command::Simulate {
            config,
            certificate,
            common,
        } => {
            let cfg = load(&config, &common)?;
            let ctx = common.context(cfg.out_dir.as_deref());
            let source = certificate.map_or(GainSource::Config, GainSource::Report);
            let (report, outcome) = run::cmd_simulate(cfg, source, &ctx);
            for s in &report.simulations {
                println!(
                    "{:<12} reaching time {}",
                    s.label,
                    s.reaching_time.map_or("-".into(), |t| format!("{t:.6}"))
                );
            }
            outcome
        }
        Command::SweepRho { config, common } => {
            let cfg = load(&config, &common)?;
            let ctx = common.context(cfg.out_dir.as_deref());
            let (report, outcome) = run::cmd_sweep_rho(cfg, &ctx);
            if let Some(s) = &report.sweep {
                println!(
                    "{} of {} points feasible, best rho {:?}",
                    s.feasible, s.points, s.best_rho
                );
            }
            outcome
        }
        Command::Reproduce { case, common } => {
            let ids: Vec<String> = if case == "all" {
                CASE_IDS.iter().map(|s| s.to_string()).collect()
            } else {
                vec![case]
            };
            if let Some(bad) = ids.iter().find(|id| !CASE_IDS.contains(&id.as_str())) {
                return Err(CliError::Config(format!(
                    "unknown case '{bad}' (known: {}, all)",
                    CASE_IDS.join(", ")
                )));
            }
            let ctx = common.context(None);
            let (reports, outcome) = run::reproduce_many(&ids, &common.overrides(), &ctx);
            print!("{}", run::comparison_table(&reports));
            outcome
        }
        Command::DumpProgram { config, rho, common } => {
            let cfg = load(&config, &common)?;
            let ctx = common.context(cfg.out_dir.as_deref());
            let path = run::cmd_dump_program(&cfg, rho, &ctx)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Verify { report } => {
            let margin = run::cmd_verify(&report)?;
            println!("certificate verified, smallest block margin {margin:e}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REACHTIME_LOG", "warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
