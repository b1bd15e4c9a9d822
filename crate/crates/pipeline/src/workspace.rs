use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{PipelineError, Result};

/// A directory holding one subdirectory per video.
#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Subdirectories containing a detections file, sorted by name.
    pub fn video_ids(&self) -> Result<Vec<String>> {
        let entries = fs::read_dir(&self.root).map_err(|e| PipelineError::io(&self.root, e))?;
        let mut ids: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().join("detections.jsonl").is_file())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        ids.sort();
        Ok(ids)
    }

    /// The named video, or every video when `None`.
    pub fn select(&self, video: Option<&str>) -> Result<Vec<VideoDir>> {
        match video {
            Some(id) => {
                let v = self.video(id);
                if !v.dir.is_dir() {
                    return Err(PipelineError::MissingInput(v.dir));
                }
                Ok(vec![v])
            }
            None => Ok(self
                .video_ids()?
                .into_iter()
                .map(|id| self.video(&id))
                .collect()),
        }
    }

    pub fn video(&self, id: &str) -> VideoDir {
        VideoDir {
            id: id.to_string(),
            dir: self.root.join(id),
        }
    }
}

/// Paths of one video's inputs and outputs.
#[derive(Debug, Clone)]
pub struct VideoDir {
    pub id: String,
    pub dir: PathBuf,
}

impl VideoDir {
    pub fn detections(&self) -> PathBuf {
        self.dir.join("detections.jsonl")
    }
    pub fn shots(&self) -> PathBuf {
        self.dir.join("shots.json")
    }
    pub fn segments(&self) -> PathBuf {
        self.dir.join("segments.json")
    }
    pub fn beats(&self) -> PathBuf {
        self.dir.join("beats.json")
    }
    pub fn meta(&self) -> PathBuf {
        self.dir.join("meta.json")
    }
    pub fn ground_truth(&self) -> PathBuf {
        self.dir.join("ground_truth.json")
    }
    pub fn manifest(&self) -> PathBuf {
        self.dir.join("manifest.json")
    }
    pub fn lock(&self) -> PathBuf {
        self.dir.join("manifest.lock")
    }
    pub fn manual_dir(&self) -> PathBuf {
        self.dir.join("manual")
    }
    pub fn manual_file(&self, frame: usize) -> PathBuf {
        self.manual_dir().join(format!("{frame}.json"))
    }
    pub fn out(&self) -> PathBuf {
        self.dir.join("out")
    }
    pub fn filtered(&self) -> PathBuf {
        self.out().join("filtered.jsonl")
    }
    pub fn tracks(&self) -> PathBuf {
        self.out().join("tracks.json")
    }
    pub fn selection(&self) -> PathBuf {
        self.out().join("selection.json")
    }
    pub fn statuses(&self) -> PathBuf {
        self.out().join("statuses.json")
    }
    pub fn sequences_dir(&self) -> PathBuf {
        self.out().join("sequences")
    }
    pub fn sequence(&self, segment_id: &str) -> PathBuf {
        self.sequences_dir().join(format!("{segment_id}.json"))
    }
    pub fn refine_report(&self) -> PathBuf {
        self.out().join("refine.json")
    }
    pub fn metrics(&self) -> PathBuf {
        self.out().join("metrics.json")
    }
    pub fn stats(&self) -> PathBuf {
        self.out().join("stats.json")
    }

    /// Fails while an annotation service holds the manifest.
    pub fn ensure_unlocked(&self) -> Result<()> {
        let lock = self.lock();
        if lock.exists() {
            return Err(PipelineError::Locked {
                video: self.id.clone(),
                lock,
            });
        }
        Ok(())
    }
}
