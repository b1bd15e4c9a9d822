//! Workspace pipeline around `groundwork-core`: file formats, the
//! filter → track → select → refine stages, reports, and the annotation
//! HTTP service.

pub mod config;
pub mod error;
pub mod formats;
pub mod report;
pub mod server;
pub mod stages;
pub mod workspace;

pub use config::PipelineConfig;
pub use error::{PipelineError, Result};
pub use stages::Stage;
pub use workspace::{VideoDir, Workspace};

use std::path::Path;

use crate::formats::write_json;
use crate::report::{compute_metrics, compute_stats, VideoData};

/// Runs `stage` on each video, in parallel across videos. Returns the first
/// error in video order.
pub fn run_stage(
    workspace: &Workspace,
    video: Option<&str>,
    stage: Stage,
    cfg: &PipelineConfig,
) -> Result<()> {
    let videos = workspace.select(video)?;
    let results: Vec<Result<()>> = std::thread::scope(|s| {
        let handles: Vec<_> = videos
            .iter()
            .map(|v| s.spawn(move || stage.run(v, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("stage thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}

/// Runs every stage in order.
pub fn run_all(workspace: &Workspace, video: Option<&str>, cfg: &PipelineConfig) -> Result<()> {
    for stage in Stage::ALL {
        run_stage(workspace, video, stage, cfg)?;
    }
    Ok(())
}

fn load_all(workspace: &Workspace, video: Option<&str>) -> Result<Vec<VideoData>> {
    workspace
        .select(video)?
        .iter()
        .map(VideoData::load)
        .collect()
}

/// Writes per-video metrics and the aggregate report to `out`.
pub fn write_metrics(
    workspace: &Workspace,
    video: Option<&str>,
    out: &Path,
    cfg: &PipelineConfig,
) -> Result<report::MetricsReport> {
    let data = load_all(workspace, video)?;
    for (v, d) in workspace.select(video)?.iter().zip(&data) {
        write_json(&v.metrics(), &compute_metrics(std::slice::from_ref(d), cfg))?;
    }
    let all = compute_metrics(&data, cfg);
    write_json(out, &all)?;
    Ok(all)
}

/// Writes per-video statistics and the aggregate report to `out`.
pub fn write_stats(
    workspace: &Workspace,
    video: Option<&str>,
    out: &Path,
) -> Result<report::StatsReport> {
    let data = load_all(workspace, video)?;
    for (v, d) in workspace.select(video)?.iter().zip(&data) {
        write_json(&v.stats(), &compute_stats(std::slice::from_ref(d)))?;
    }
    let all = compute_stats(&data);
    write_json(out, &all)?;
    Ok(all)
}
