use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use groundwork::{PipelineConfig, PipelineError, Stage, Workspace};

#[derive(Parser)]
#[command(
    name = "groundwork",
    version,
    about = "Clean dance keypoint sequences and measure them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    #[arg(long)]
    workspace: PathBuf,
    /// Only process this video.
    #[arg(long)]
    video: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    workspace: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    video: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Drop weak and duplicate detections.
    Filter(StageArgs),
    /// Link detections into tracks and pick the active dancer.
    Track(StageArgs),
    /// Choose frames for manual annotation.
    Select(StageArgs),
    /// Merge annotations and interpolate.
    Refine(StageArgs),
    /// Run filter, track, select and refine in order.
    Run(StageArgs),
    /// Compute the metrics report.
    Metrics(ReportArgs),
    /// Compute dataset statistics.
    Stats(ReportArgs),
    /// Serve the annotation API.
    Serve {
        #[arg(long)]
        workspace: PathBuf,
        /// Directory of extracted frames, one subdirectory per video.
        #[arg(long)]
        frames: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn config(path: &Option<PathBuf>) -> Result<PipelineConfig, PipelineError> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn stage(args: &StageArgs, stage: Stage) -> Result<(), PipelineError> {
    let cfg = config(&args.config)?;
    groundwork::run_stage(
        &Workspace::new(&args.workspace),
        args.video.as_deref(),
        stage,
        &cfg,
    )
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Filter(a) => stage(&a, Stage::Filter),
        Command::Track(a) => stage(&a, Stage::Track),
        Command::Select(a) => stage(&a, Stage::Select),
        Command::Refine(a) => stage(&a, Stage::Refine),
        Command::Run(a) => {
            let cfg = config(&a.config)?;
            groundwork::run_all(&Workspace::new(&a.workspace), a.video.as_deref(), &cfg)
        }
        Command::Metrics(a) => {
            let cfg = config(&a.config)?;
            groundwork::write_metrics(
                &Workspace::new(&a.workspace),
                a.video.as_deref(),
                &a.out,
                &cfg,
            )
            .map(|_| ())
        }
        Command::Stats(a) => {
            groundwork::write_stats(&Workspace::new(&a.workspace), a.video.as_deref(), &a.out)
                .map(|_| ())
        }
        Command::Serve {
            workspace,
            frames,
            port,
        } => {
            let rt = tokio::runtime::Runtime::new()
                .map_err(|e| PipelineError::Validation(format!("cannot start runtime: {e}")))?;
            rt.block_on(groundwork::server::serve(
                Workspace::new(workspace),
                frames,
                port,
            ))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
