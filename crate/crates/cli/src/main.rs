use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rrw_core::experiment::{preset, presets, run_experiment, Artifacts, ExperimentConfig, Format, Kind};

/// Interacting reinforced random walks on polygons and generalized urns.
#[derive(Parser)]
#[command(name = "rrw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a walk experiment and report localization fractions.
    Walk(RunArgs),
    /// Run an urn experiment and report monochromatic-tail fractions.
    Urn(RunArgs),
    /// Run the numeric checker battery; exits 1 if any check fails.
    Verify(RunArgs),
    /// List built-in presets, or print one as a config file.
    Presets {
        /// Print this preset's TOML config.
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name (see `rrw presets`).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Detection windows, comma separated.
    #[arg(long, value_delimiter = ',')]
    windows: Option<Vec<u64>>,
    /// Base seed; replica r uses stream r.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads (default: all cores). Does not affect output.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write replica 0's trajectory or draw log.
    #[arg(long)]
    trajectory: bool,
}

fn load(args: &RunArgs, kind: Kind) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name)?.config,
        (None, None) if kind == Kind::Verify => ExperimentConfig::from_toml("kind = \"verify\"")?,
        (None, None) => bail!("give --config FILE or --preset NAME"),
    };
    if cfg.kind != kind {
        bail!("config has kind = {:?} but the subcommand expects {:?}", cfg.kind, kind);
    }
    if let Some(r) = args.replicas {
        cfg.replicas = r;
    }
    if let Some(h) = args.horizon {
        cfg.horizon = h;
        cfg.checkpoints.retain(|&c| c < h);
    }
    if let Some(w) = &args.windows {
        cfg.windows = w.clone();
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output.path = o.clone();
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    cfg.export_trajectory |= args.trajectory;
    cfg.validate().context("invalid experiment")?;
    Ok(cfg)
}

fn summarize(a: &Artifacts) {
    if let Some(r) = &a.attraction {
        println!("horizon\twindow\tscope\tfraction\t95% CI");
        for row in &r.rows {
            let p = &row.proportion;
            println!(
                "{}\t{}\t{}\t{:.4}\t[{:.4}, {:.4}]",
                row.horizon, row.window, row.scope, p.fraction, p.ci_low, p.ci_high
            );
        }
        println!("monotone in horizon: {}", r.monotone);
        if let Some(b) = r.kernel_bound {
            println!(
                "max kernel value {} (bound {b}, violations {})",
                r.max_kernel_value, r.kernel_violations
            );
        }
    }
    if let Some(v) = &a.verify {
        for c in &v.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            println!("{mark} {}: {} (tolerance {}) {}", c.name, c.value, c.tolerance, c.detail);
        }
    }
    for f in &a.files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (args, kind) = match cli.command {
        Command::Presets { show: Some(name) } => {
            print!("{}", preset(&name)?.config.to_toml()?);
            return Ok(true);
        }
        Command::Presets { show: None } => {
            for p in presets() {
                println!("{:<24} {}", p.name, p.description);
            }
            return Ok(true);
        }
        Command::Walk(a) => (a, Kind::Walk),
        Command::Urn(a) => (a, Kind::Urn),
        Command::Verify(a) => (a, Kind::Verify),
    };
    let cfg = load(&args, kind)?;
    let artifacts = run_experiment(&cfg, args.workers)?;
    summarize(&artifacts);
    Ok(artifacts.passed())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
