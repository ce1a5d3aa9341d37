//! Batch front end for the experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lipvol::report::{run, Config};
use lipvol::volume::PairingMode;
use lipvol::Error;

#[derive(Parser)]
#[command(name = "lipvol", version, about = "Simplicial volume experiments on hyperbolic surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Write a TSV trace (smear only).
    #[arg(long, global = true)]
    tsv: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (overridden by LIPVOL_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Pair the fan fundamental cycle with the volume form.
    Pair {
        #[arg(long)]
        genus: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the straightening homotopy on the subdivided fan cycle.
    Straighten {
        #[arg(long)]
        genus: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact ℓ¹ minimization over subdivision rounds.
    Lpnorm {
        #[arg(long)]
        genus: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo smearing between two surfaces.
    Smear {
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        mesh: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Sparsify the product of two fan cycles.
    Sparsify {
        #[arg(long)]
        genus: Option<usize>,
        #[arg(long)]
        mesh: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Verify combined cover multiplicities.
    Covers {
        #[command(flatten)]
        common: Common,
    },
    /// Run the full invariant suite.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mode {
    Exact,
    Quadrature,
}

fn load(common: &Common) -> Result<Config, Error> {
    let mut cfg = match &common.config {
        Some(p) => {
            let s = std::fs::read_to_string(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
            Config::from_json(&s)?
        }
        None => Config::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(w) = common.workers {
        cfg.workers = Some(w);
    }
    if let Ok(w) = std::env::var("LIPVOL_WORKERS") {
        cfg.workers = Some(w.parse().map_err(|_| Error::Input(format!("LIPVOL_WORKERS={w}")))?);
    }
    Ok(cfg)
}

fn configure(command: &Command) -> Result<(&'static str, Config, Common), Error> {
    let (name, common) = match command {
        Command::Pair { common, .. } => ("pair", common),
        Command::Straighten { common, .. } => ("straighten", common),
        Command::Lpnorm { common, .. } => ("lpnorm", common),
        Command::Smear { common, .. } => ("smear", common),
        Command::Sparsify { common, .. } => ("sparsify", common),
        Command::Covers { common } => ("covers", common),
        Command::Selftest { common } => ("selftest", common),
    };
    let mut cfg = load(common)?;
    match *command {
        Command::Pair { genus, mode, .. } => {
            cfg.genus = genus.unwrap_or(cfg.genus);
            if let Some(m) = mode {
                cfg.mode = match m {
                    Mode::Exact => PairingMode::Exact,
                    Mode::Quadrature => PairingMode::Quadrature,
                };
            }
        }
        Command::Straighten { genus, .. } => cfg.genus = genus.unwrap_or(cfg.genus),
        Command::Lpnorm { genus, rounds, .. } => {
            cfg.genus = genus.unwrap_or(cfg.genus);
            cfg.rounds = rounds.unwrap_or(cfg.rounds);
        }
        Command::Smear { from, to, n, mesh, .. } => {
            cfg.from = from.unwrap_or(cfg.from);
            cfg.to = to.unwrap_or(cfg.to);
            cfg.n = n.unwrap_or(cfg.n);
            cfg.mesh = mesh.unwrap_or(cfg.mesh);
        }
        Command::Sparsify { genus, mesh, .. } => {
            cfg.genus = genus.unwrap_or(cfg.genus);
            cfg.sparsify_mesh = mesh.unwrap_or(cfg.sparsify_mesh);
        }
        Command::Covers { .. } | Command::Selftest { .. } => {}
    }
    Ok((name, cfg, common.clone()))
}

fn summary(name: &str, passed: bool, result: &serde_json::Value) {
    eprintln!("{name}: {}", if passed { "PASS" } else { "FAIL" });
    if let Some(obj) = result.as_object() {
        for (k, v) in obj {
            if v.is_number() || v.is_boolean() || v.is_string() {
                eprintln!("  {k:<24} {v}");
            }
        }
    }
}

fn write(path: &Option<PathBuf>, body: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| Error::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let (name, cfg, common) = configure(&cli.command)?;
    let go = || -> Result<bool, Error> {
        let (report, tsv) = run(name, &cfg)?;
        write(&common.output, &report.to_json())?;
        if let (Some(p), Some(t)) = (&common.tsv, tsv) {
            std::fs::write(p, t).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
        }
        summary(name, report.passed, &report.result);
        Ok(report.passed)
    };
    match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Input(format!("workers: {e}")))?
            .install(go),
        None => go(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e @ (Error::Contract(_) | Error::Numerical(_) | Error::Internal(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
