use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use secular_forge::config::ExperimentConfig;
use secular_forge::suite::{self, CriterionResult, SuiteOutput};
use secular_forge::{Error, Result};

#[derive(Parser)]
#[command(name = "secular-forge", version, about = "Secular normal forms, steepness checks and direct integration of the planetary three-body problem")]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to SECULAR_FORGE_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symplecticity, roundtrip and dipole checks of the reduction chart.
    VerifyChart,
    /// Quadrature against the closed forms and the symmetry rules.
    VerifySecular {
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Exact Birkhoff normalization and comparison with the reference table.
    Birkhoff {
        #[arg(long)]
        order: Option<u32>,
        /// Also write the full normalized series.
        #[arg(long)]
        dump: bool,
    },
    /// Partial reduction of the order-6 normal form.
    Reduce,
    /// Three-jet sweep over random parameter draws.
    Steepness {
        #[arg(long)]
        spatial: bool,
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Direct integration: conservation and secular frequency scaling.
    Integrate,
    /// Writes the golden coefficient tables.
    EmitGoldens,
    /// Writes the default configuration.
    DefaultConfig,
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    schema_version: u32,
    seed: u64,
    all_passed: bool,
    criteria: &'a [CriterionResult],
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cfg.threads.is_none() {
        if let Ok(v) = std::env::var("SECULAR_FORGE_THREADS") {
            cfg.threads = Some(v.parse().map_err(|_| Error::Config(format!("SECULAR_FORGE_THREADS={v} is not a count")))?);
        }
    }
    match &cli.command {
        Command::VerifySecular { nodes: Some(n) } => cfg.secular.nodes = *n,
        Command::Birkhoff { order: Some(k), .. } => cfg.birkhoff.order = *k,
        Command::Steepness { spatial, draws } => {
            cfg.steepness.spatial |= *spatial;
            if let Some(d) = draws {
                cfg.steepness.draws = *d;
                cfg.steepness.min_only_trivial = cfg.steepness.min_only_trivial.min(*d);
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::write(dir.join(name), bytes).map_err(|e| Error::Config(format!("writing {name}: {e}")))
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    if let Some(n) = cfg.threads {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    fs::create_dir_all(&cli.out).map_err(|e| Error::Config(format!("{}: {e}", cli.out.display())))?;
    let (name, out): (&str, SuiteOutput) = match &cli.command {
        Command::VerifyChart => ("verify-chart", suite::run_chart(&cfg)?),
        Command::VerifySecular { .. } => ("verify-secular", suite::run_secular(&cfg)?),
        Command::Birkhoff { dump, .. } => ("birkhoff", suite::run_birkhoff(&cfg, *dump)?),
        Command::Reduce => ("reduce", suite::run_reduce(&cfg)?),
        Command::Steepness { .. } => ("steepness", suite::run_steepness(&cfg)?),
        Command::Integrate => ("integrate", suite::run_integrate(&cfg)?),
        Command::EmitGoldens => {
            for (f, bytes) in suite::emit_goldens()? {
                write(&cli.out, &f, &bytes)?;
            }
            return Ok(true);
        }
        Command::DefaultConfig => {
            let text = serde_json::to_string_pretty(&cfg).map_err(|e| Error::Config(e.to_string()))?;
            write(&cli.out, "config.json", text.as_bytes())?;
            return Ok(true);
        }
    };
    for (f, bytes) in &out.artifacts {
        write(&cli.out, f, bytes)?;
    }
    let summary = Summary {
        command: name,
        schema_version: cfg.schema_version,
        seed: cfg.seed,
        all_passed: out.all_passed(),
        criteria: &out.criteria,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))?;
    write(&cli.out, &format!("{name}_summary.json"), json.as_bytes())?;
    let timings: serde_json::Map<String, serde_json::Value> =
        out.timings.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
    let tj = serde_json::to_string_pretty(&timings).map_err(|e| Error::Config(e.to_string()))?;
    write(&cli.out, &format!("{name}_timings.json"), tj.as_bytes())?;
    for c in &out.criteria {
        let status = match c.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "REPORT",
        };
        println!("{status} [{}] {}: {:.3e} (tol {:.1e}) {}", c.id, c.name, c.value, c.tolerance, c.detail);
    }
    Ok(out.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
