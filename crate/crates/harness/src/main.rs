use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mie_harness::{
    emit_report, run_die, run_distribution, run_sweep, to_csv, to_json, Engine, Executor, ExperimentConfig,
    Format, HarnessError, StatReport,
};

/// Measurement-induced entanglement statistics: analytic predictions and
/// free-fermion lattice simulations.
#[derive(Debug, Parser)]
#[command(name = "mie", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (`key = value` lines or JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trajectories: Option<usize>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Comma-separated subset of `analytic,lattice`.
    #[arg(long, global = true, value_delimiter = ',')]
    engines: Option<Vec<Engine>>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Analytic cumulants only.
    Analytic,
    /// Lattice Monte-Carlo cumulants only.
    Simulate,
    /// Entropy histogram against the analytic distribution (n = 1).
    Distribution,
    /// Disorder-induced entanglement (uniform outcome weights).
    Die,
    /// Both engines with per-cumulant z-scores.
    Compare,
    /// Engines as configured.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Simulate => "simulate",
            Self::Distribution => "distribution",
            Self::Die => "die",
            Self::Compare => "compare",
            Self::Sweep => "sweep",
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.trajectories {
        cfg.trajectories = t;
    }
    if let Some(e) = &cli.engines {
        cfg.engines = e.clone();
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    match cli.command {
        Command::Analytic => cfg.engines = vec![Engine::Analytic],
        Command::Simulate => cfg.engines = vec![Engine::Lattice],
        Command::Compare => cfg.engines = vec![Engine::Analytic, Engine::Lattice],
        _ => {}
    }
    Ok(cfg)
}

fn summarize(reports: &[StatReport], z_scores: bool) {
    let mut err = std::io::stderr().lock();
    for r in reports {
        let _ = writeln!(err, "ζ = {:.6} ({:?}, {:.2?})", r.zeta, r.kind, r.wall_time);
        for row in &r.rows {
            let k: Vec<String> = row
                .kappa
                .iter()
                .zip(&row.err)
                .filter_map(|(k, e)| k.map(|k| format!("{k:.6e} ± {:.1e}", e.unwrap_or(f64::NAN))))
                .collect();
            let _ = writeln!(err, "  n = {} {:<22} {}", row.n, row.engine, k.join("  "));
        }
        if z_scores {
            for c in &r.comparisons {
                let z: Vec<String> = c.z.iter().map(|z| z.map_or("-".into(), |z| format!("{z:+.2}"))).collect();
                let _ = writeln!(err, "  n = {} z-scores {}", c.n, z.join(" "));
            }
        }
        if let Some(f) = &r.failure {
            let _ = writeln!(err, "  FAILED: {f}");
        }
    }
}

fn run(cli: &Cli) -> Result<bool, HarnessError> {
    let cfg = load_config(cli)?;
    let exec = Executor::from_env()?;
    let reports = match cli.command {
        Command::Distribution => run_distribution(&exec, &cfg)?,
        Command::Die => run_die(&exec, &cfg)?,
        _ => run_sweep(&exec, &cfg)?,
    };
    summarize(&reports, matches!(cli.command, Command::Compare | Command::Die));
    match &cfg.out {
        Some(dir) => {
            for path in emit_report(dir, cli.command.name(), &cfg, &reports, cfg.format)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            let text = match cfg.format {
                Some(Format::Json) => to_json(&cfg, &reports),
                _ => to_csv(&reports),
            };
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(reports.iter().all(|r| r.failure.is_none()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
