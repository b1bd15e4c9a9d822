//! HTTP API over the label manifests of a workspace.
//!
//! Reads go straight to disk; every write goes through one mutex so manifest
//! updates never interleave. A submission is acknowledged only after both the
//! manual annotation file and the manifest have been atomically replaced.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use groundwork_core::pose::{JOINT_NAMES, SKELETON_EDGES};
use groundwork_core::selector::{validate_keypoints, LabelStatus};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::error::PipelineError;
use crate::formats::{load_manifest, write_json, Manifest, ManualRecord};
use crate::workspace::{VideoDir, Workspace};

pub struct AppState {
    workspace: Workspace,
    frames: PathBuf,
    writer: Mutex<()>,
}

impl AppState {
    pub fn new(workspace: Workspace, frames: impl Into<PathBuf>) -> Arc<Self> {
        Arc::new(Self {
            workspace,
            frames: frames.into(),
            writer: Mutex::new(()),
        })
    }

    fn video(&self, id: &str) -> Result<VideoDir, ApiError> {
        let valid = !id.is_empty()
            && id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
            && id != "."
            && id != "..";
        let v = self.workspace.video(id);
        if !valid || !v.detections().is_file() {
            return Err(ApiError::NotFound(format!("unknown video {id}")));
        }
        Ok(v)
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Invalid(String),
    Conflict(String),
    Internal(String),
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Invalid(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Internal(m) => {
                log::error!("{m}");
                (StatusCode::INTERNAL_SERVER_ERROR, m)
            }
        };
        (status, Json(ErrorBody { error: msg })).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct ManifestQuery {
    pub video: Option<String>,
    pub status: Option<LabelStatus>,
}

async fn get_manifest(
    State(state): State<Arc<AppState>>,
    Query(q): Query<ManifestQuery>,
) -> Result<Json<Manifest>, ApiError> {
    let videos = match &q.video {
        Some(id) => vec![state.video(id)?],
        None => state.workspace.select(None)?,
    };
    let mut entries = Vec::new();
    for v in videos {
        let m = load_manifest(&v.manifest())?;
        entries.extend(
            m.entries
                .into_iter()
                .filter(|e| q.status.is_none_or(|s| s == e.status)),
        );
    }
    Ok(Json(Manifest { entries }))
}

async fn get_frame(
    State(state): State<Arc<AppState>>,
    Path((video, frame)): Path<(String, usize)>,
) -> Result<Response, ApiError> {
    let v = state.video(&video)?;
    let dir = state.frames.join(&v.id);
    for stem in [format!("{frame:06}"), frame.to_string()] {
        for (ext, mime) in [("jpg", "image/jpeg"), ("png", "image/png")] {
            let path = dir.join(format!("{stem}.{ext}"));
            if let Ok(bytes) = tokio::fs::read(&path).await {
                return Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response());
            }
        }
    }
    Err(ApiError::NotFound(format!(
        "no image for frame {frame} of {video}"
    )))
}

#[derive(Serialize)]
struct Skeleton {
    joints: Vec<&'static str>,
    edges: Vec<[usize; 2]>,
}

async fn get_skeleton() -> Json<Skeleton> {
    Json(Skeleton {
        joints: JOINT_NAMES.to_vec(),
        edges: SKELETON_EDGES.iter().map(|&(a, b)| [a, b]).collect(),
    })
}

async fn post_annotation(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let record: ManualRecord =
        serde_json::from_slice(&body).map_err(|e| ApiError::Invalid(e.to_string()))?;
    validate_keypoints(&record.keypoints).map_err(|e| ApiError::Invalid(e.to_string()))?;
    let v = state.video(&record.video_id)?;

    let _guard = state.writer.lock().await;
    let mut manifest = load_manifest(&v.manifest())?;
    let entry = manifest
        .entries
        .iter_mut()
        .find(|e| e.frame == record.frame)
        .ok_or_else(|| {
            ApiError::NotFound(format!(
                "frame {} of {} is not in the manifest",
                record.frame, v.id
            ))
        })?;
    if entry.status == LabelStatus::Done {
        return Err(ApiError::Conflict(format!(
            "frame {} of {} is already labelled",
            record.frame, v.id
        )));
    }
    entry
        .complete(record.keypoints.clone())
        .map_err(|e| ApiError::Invalid(e.to_string()))?;
    let updated = entry.clone();
    write_json(&v.manual_file(record.frame), &record)?;
    write_json(&v.manifest(), &manifest)?;
    log::info!("{}: frame {} labelled", v.id, record.frame);
    Ok(Json(updated).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/manifest", get(get_manifest))
        .route("/api/frames/{video}/{frame}", get(get_frame))
        .route("/api/skeleton", get(get_skeleton))
        .route("/api/annotations", post(post_annotation))
        .with_state(state)
}

/// Lock files marking every video's manifest as held by the service.
pub struct ManifestLocks {
    paths: Vec<PathBuf>,
}

impl ManifestLocks {
    pub fn acquire(workspace: &Workspace) -> Result<Self, PipelineError> {
        let mut paths = Vec::new();
        for v in workspace.select(None)? {
            let path = v.lock();
            std::fs::write(&path, format!("{}\n", std::process::id()))
                .map_err(|e| PipelineError::io(&path, e))?;
            paths.push(path);
        }
        Ok(Self { paths })
    }
}

impl Drop for ManifestLocks {
    fn drop(&mut self) {
        for p in &self.paths {
            let _ = std::fs::remove_file(p);
        }
    }
}

/// Serves until ctrl-c.
pub async fn serve(workspace: Workspace, frames: PathBuf, port: u16) -> Result<(), PipelineError> {
    let _locks = ManifestLocks::acquire(&workspace)?;
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| PipelineError::Validation(format!("cannot bind {addr}: {e}")))?;
    log::info!("annotation service listening on http://{addr}");
    axum::serve(listener, router(AppState::new(workspace, frames)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| PipelineError::Validation(format!("server error: {e}")))
}
