use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use stochwave::harness::{rerun, run_study, ExperimentConfig, RunManifest, StudyKind, StudyOutput};

#[derive(Parser)]
#[command(name = "stochwave", version, about = "Monte Carlo studies for the stochastic cubic wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate trajectories and record the energy at sample times.
    Simulate(StudyArgs),
    /// Compare mean V1 with the linear energy law.
    EnergyStudy(StudyArgs),
    /// Error against a reference truncation N_ref.
    ConvergeSpace(StudyArgs),
    /// Error against a reference step h_ref on shared noise paths.
    ConvergeTime(StudyArgs),
    /// Exponential moments of the integrated L6 norm.
    ExpMoment(StudyArgs),
    /// Re-run a study from its manifest.json.
    Rerun {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct StudyArgs {
    /// TOML configuration; the built-in reference model if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

fn load(args: StudyArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)
            .with_context(|| format!("loading {}", path.display()))?,
        None => ExperimentConfig::reference_model(),
    };
    cfg.apply_overrides(args.seed, args.trajectories, args.workers, args.out);
    Ok(cfg)
}

fn finish(out: StudyOutput, dir: PathBuf) -> Result<()> {
    for w in &out.manifest.warnings {
        eprintln!("warning: {w}");
    }
    let (csv, manifest) = out.write(&dir)?;
    println!("{}", csv.display());
    println!("{}", manifest.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Simulate(a) => (StudyKind::Simulate, a),
        Command::EnergyStudy(a) => (StudyKind::EnergyStudy, a),
        Command::ConvergeSpace(a) => (StudyKind::ConvergeSpace, a),
        Command::ConvergeTime(a) => (StudyKind::ConvergeTime, a),
        Command::ExpMoment(a) => (StudyKind::ExpMoment, a),
        Command::Rerun { manifest, out, workers } => {
            let m = RunManifest::from_path(&manifest)?;
            let dir = out
                .or_else(|| m.config.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            return finish(rerun(&m, workers)?, dir);
        }
    };
    let cfg = load(args)?;
    let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    finish(run_study(kind, &cfg)?, dir)
}
