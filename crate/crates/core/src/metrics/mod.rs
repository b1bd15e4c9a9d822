//! Diversity, distribution and music-alignment measures.

pub mod beats;
pub mod diversity;
pub mod elements;
pub mod fid;
pub mod mae;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use beats::{
    beat_alignment_score, beat_dtw_cost, kinematic_beats, split_at_beat_frames, split_at_beats,
    BeatConfig, BeatTrack, DtwCost, UnitSpan,
};
pub use diversity::{movement_diversity, pose_diversity, Clip, MovementStats, PoseDiversity};
pub use elements::{element_distribution, ElementDistribution, ElementShares, Movement, Segment};
pub use fid::{frechet_distance, pose_fid, GaussianStats};
pub use mae::sequence_mae;

/// Per-video facts the metrics need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub video_id: String,
    pub fps: f64,
    pub frame_width: u32,
    pub frame_height: u32,
}

impl VideoMeta {
    pub fn new(
        video_id: impl Into<String>,
        fps: f64,
        frame_width: u32,
        frame_height: u32,
    ) -> Result<Self> {
        let meta = Self {
            video_id: video_id.into(),
            fps,
            frame_width,
            frame_height,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "fps must be positive, got {}",
                self.fps
            )));
        }
        if self.frame_width == 0 || self.frame_height == 0 {
            return Err(Error::InvalidConfig(
                "frame dimensions must be positive".into(),
            ));
        }
        Ok(())
    }
}
