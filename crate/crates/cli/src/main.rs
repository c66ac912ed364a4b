use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use strata::config::SolverMode;
use strata::pipeline::artifacts::{self, OutputOptions};
use strata::pipeline::report;
use strata::synth::{write_dataset, SceneSpec};
use strata::{Error, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "strata",
    version,
    about = "Support relations and scene hierarchy graphs from point clouds"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Pipeline config (TOML); missing keys take their default values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Always use the exact labeling solver.
    #[arg(long, global = true, conflicts_with = "heuristic")]
    exact: bool,
    /// Always use the heuristic labeling solver.
    #[arg(long, global = true)]
    heuristic: bool,
    /// Output (and, for single stages, working) directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Also write primitive-level DOT graphs.
    #[arg(long, global = true)]
    dot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Fit plane primitives: INPUT -> primitives.json.
    Extract { input: PathBuf },
    /// Classify primitive pairs: primitives.json -> patterns.json.
    Patterns,
    /// Solve the labeling: patterns.json -> assignment.json.
    Segment,
    /// Infer support: earlier artifacts -> hierarchy.json, hierarchy.dot,
    /// affinity.csv, and mask.png when INPUT is given and renderable.
    Infer {
        #[arg(long, value_name = "INPUT")]
        input: Option<PathBuf>,
    },
    /// Run every stage on a PLY, a depth PNG, a scene directory or a
    /// dataset manifest.
    Pipeline { input: PathBuf },
    /// Score predictions against ground truth: eval.csv and summary.json.
    Eval { pred: PathBuf, gt: PathBuf },
    /// Write a synthetic dataset with a manifest.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of scenes; seeds run from --seed (default 0).
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Fewest boxes per scene.
    #[arg(long, default_value_t = 4)]
    min_objects: usize,
    /// Most boxes per scene.
    #[arg(long, default_value_t = 8)]
    max_objects: usize,
    /// Keep only points visible from the scene camera.
    #[arg(long)]
    occlusion: bool,
    /// Scene parameters (TOML); missing keys take their default values.
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Parse(_) | Error::Image(_) | Error::Json(_) | Error::EmptyInput(_) | Error::Config(_) => {
            2
        }
        Error::Infeasible(_) | Error::Capacity { .. } => 3,
        _ => 1,
    }
}

fn load_config(g: &Global) -> strata::Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if g.exact {
        cfg.solver = SolverMode::Exact;
    } else if g.heuristic {
        cfg.solver = SolverMode::Heuristic;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_spec(path: Option<&Path>) -> strata::Result<SceneSpec> {
    let spec: SceneSpec = match path {
        Some(p) => toml::from_str(&std::fs::read_to_string(p)?).map_err(|e| Error::Config(e.to_string()))?,
        None => SceneSpec::default(),
    };
    spec.validate()?;
    Ok(spec)
}

fn run(cli: Cli) -> strata::Result<()> {
    let cfg = load_config(&cli.global)?;
    let out = cli.global.out.as_path();
    let opts = OutputOptions { dot: cli.global.dot };
    log::info!("config {}", cfg.hash());
    match cli.command {
        Command::Extract { input } => {
            artifacts::stage_extract(&input, out, &cfg)?;
        }
        Command::Patterns => {
            artifacts::stage_patterns(out, &cfg, opts)?;
        }
        Command::Segment => {
            artifacts::stage_segment(out, &cfg)?;
        }
        Command::Infer { input } => {
            artifacts::stage_infer(out, &cfg, input.as_deref(), opts)?;
        }
        Command::Pipeline { input } => {
            let dirs = artifacts::run_pipeline(&input, &cfg, out, opts)?;
            log::info!("wrote {} scene(s) under {}", dirs.len(), out.display());
        }
        Command::Eval { pred, gt } => {
            let r = report::run_eval(&pred, &gt, &cfg, out)?;
            let s = &r.summary;
            println!(
                "scenes {} skipped {} overlap F {:.4} boundary F {:.4} cheeger {:.4} spectral {:.4}",
                s.scenes,
                s.skipped.len(),
                s.overlap.f,
                s.boundary.f,
                s.cheeger_section.mean,
                s.spectral_section.mean
            );
        }
        Command::Synth(a) => {
            let mut spec = load_spec(a.spec.as_deref())?;
            spec.occlusion |= a.occlusion;
            let first = cli.global.seed.unwrap_or(0);
            let seeds: Vec<u64> = (first..first + a.count).collect();
            let m = write_dataset(out, &spec, &seeds, [a.min_objects, a.max_objects])?;
            log::info!("wrote {} scene(s) to {}", m.scenes.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STRATA_LOG", "info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
