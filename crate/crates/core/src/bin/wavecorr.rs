use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavecorr::config::load_config;
use wavecorr::pipeline::{run_command, Command};
use wavecorr::{Error, Result};

#[derive(Parser)]
#[command(
    name = "wavecorr",
    version,
    about = "Classically corresponding wave packets for symmetric oscillators"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalue report.
    Eigen(Common),
    /// |Psi|^2 field.
    Packet(Common),
    /// Classical trajectory.
    Classical(Common),
    /// Bohmian trajectories.
    Bohmian {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        /// Start point `u,v`; repeat for several trajectories.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        start: Vec<[f64; 2]>,
    },
    /// Residual of the hyperbolic equation and the quantum potential.
    Residual(Common),
    /// Crest, quantum-potential and Bohmian correspondence metrics.
    Compare(Common),
    /// Full pipeline.
    Run(Common),
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `u,v`, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok([p(a)?, p(b)?])
}

fn run(cli: Cli) -> Result<()> {
    let (cmd, common) = match &cli.command {
        Cmd::Eigen(c) => (Command::Eigen, c),
        Cmd::Packet(c) => (Command::Packet, c),
        Cmd::Classical(c) => (Command::Classical, c),
        Cmd::Bohmian { common, .. } => (Command::Bohmian, common),
        Cmd::Residual(c) => (Command::Residual, c),
        Cmd::Compare(c) => (Command::Compare, c),
        Cmd::Run(c) => (Command::Run, c),
    };
    let mut cfg = load_config(&common.config).map_err(|e| Error::Stage {
        stage: "config",
        source: Box::new(e),
    })?;
    if let Cmd::Bohmian {
        kappa,
        t_end,
        h,
        start,
        ..
    } = &cli.command
    {
        let bad = |path: &str, x: f64| Error::Stage {
            stage: "config",
            source: Box::new(Error::config(
                path,
                format!("must be positive and finite, got {x}"),
            )),
        };
        if let Some(k) = *kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(bad("--kappa", k));
            }
            cfg.bohmian.kappa = k;
        }
        if let Some(t) = *t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(bad("--t-end", t));
            }
            cfg.bohmian.t_end = Some(t);
        }
        if let Some(step) = *h {
            if !(step > 0.0 && step.is_finite()) {
                return Err(bad("--h", step));
            }
            cfg.bohmian.h = step;
        }
        if !start.is_empty() {
            cfg.bohmian.starts = start.clone();
        }
    }
    if let Some(dir) = &common.out {
        cfg.output.directory = dir.clone();
    }
    let manifest = run_command(cmd, &cfg, None)?;
    for e in &manifest.entries {
        println!(
            "{}  {}",
            e.sha256,
            cfg.output.directory.join(&e.name).display()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.stage() {
                Some(stage) => eprintln!("wavecorr: [{stage}] {}", source_chain(&e)),
                None => eprintln!("wavecorr: {}", source_chain(&e)),
            }
            ExitCode::FAILURE
        }
    }
}

/// The error message without the stage prefix; causes are already part of
/// each variant's message.
fn source_chain(e: &Error) -> String {
    match e {
        Error::Stage { source, .. } => source.to_string(),
        other => other.to_string(),
    }
}
