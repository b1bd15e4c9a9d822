//! Choosing frames for manual annotation and merging the results back.
//!
//! Frames whose selected pose has a low labelling score are treated as
//! missing. The labelling discount then promotes only as many missing frames
//! to `must_label` as needed so that, in every window of `window` frames, no
//! more than `max_missing_per_window` remain missing and no run of missing
//! frames is longer than `max_consecutive_missing`. The rest are left for
//! curve interpolation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::{Pose, PoseCandidate, NUM_JOINTS};
use crate::sequence::{KeypointSequence, SequenceFrame};
use crate::tracker::ActiveSelection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameStatus {
    GoodAutomatic,
    Missing,
    MustLabel,
    Manual,
}

pub type StatusMap = BTreeMap<usize, FrameStatus>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectorConfig {
    pub labelling_threshold: f64,
    pub max_consecutive_missing: usize,
    pub max_missing_per_window: usize,
    pub window: usize,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            labelling_threshold: 0.5,
            max_consecutive_missing: 2,
            max_missing_per_window: 5,
            window: 10,
        }
    }
}

impl SelectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.labelling_threshold) {
            return Err(Error::InvalidConfig(format!(
                "labelling_threshold {} outside [0, 1]",
                self.labelling_threshold
            )));
        }
        if !(self.max_consecutive_missing < self.max_missing_per_window
            && self.max_missing_per_window <= self.window)
        {
            return Err(Error::InvalidConfig(
                "need max_consecutive_missing < max_missing_per_window <= window".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelReason {
    LowScore,
    Outlier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelStatus {
    Pending,
    Done,
}

/// One frame queued for (or returned from) manual annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelManifestEntry {
    pub video_id: String,
    pub frame: usize,
    pub reason: LabelReason,
    pub status: LabelStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keypoints: Option<Vec<[f64; 2]>>,
}

impl LabelManifestEntry {
    pub fn pending(video_id: impl Into<String>, frame: usize, reason: LabelReason) -> Self {
        Self {
            video_id: video_id.into(),
            frame,
            reason,
            status: LabelStatus::Pending,
            keypoints: None,
        }
    }

    /// Marks the entry done with the given pixel coordinates.
    pub fn complete(&mut self, keypoints: Vec<[f64; 2]>) -> Result<()> {
        validate_keypoints(&keypoints)?;
        self.status = LabelStatus::Done;
        self.keypoints = Some(keypoints);
        Ok(())
    }

    /// The submitted pose, when the entry is done.
    pub fn pose(&self) -> Option<Result<Pose>> {
        match (&self.status, &self.keypoints) {
            (LabelStatus::Done, Some(k)) => Some(coords_to_pose(k)),
            _ => None,
        }
    }
}

/// Checks a 17-point manual submission.
pub fn validate_keypoints(keypoints: &[[f64; 2]]) -> Result<()> {
    if keypoints.len() != NUM_JOINTS {
        return Err(Error::JointCount {
            expected: NUM_JOINTS,
            found: keypoints.len(),
        });
    }
    if keypoints.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidKeypoint("non-finite coordinate".into()));
    }
    Ok(())
}

fn coords_to_pose(k: &[[f64; 2]]) -> Result<Pose> {
    validate_keypoints(k)?;
    let arr: [[f64; 2]; NUM_JOINTS] = k.try_into().expect("length checked");
    Pose::from_coords(&arr)
}

/// Box confidence times mean keypoint confidence.
pub fn labelling_score(candidate: &PoseCandidate) -> f64 {
    candidate.box_score * candidate.pose.mean_score()
}

/// Status of every frame in the selection: missing when there is no
/// candidate or its labelling score is below the threshold.
pub fn mark_missing(selection: &ActiveSelection, cfg: &SelectorConfig) -> StatusMap {
    selection
        .choices
        .iter()
        .map(|(&f, choice)| {
            let status = match choice {
                Some(c) if labelling_score(&c.candidate) >= cfg.labelling_threshold => {
                    FrameStatus::GoodAutomatic
                }
                _ => FrameStatus::Missing,
            };
            (f, status)
        })
        .collect()
}

/// Promotes missing frames to `must_label` in a single left-to-right pass.
///
/// A missing frame is promoted when leaving it missing would either extend a
/// run of still-missing frames beyond `max_consecutive_missing`, or put more
/// than `max_missing_per_window` still-missing frames in the window of
/// `window` frames ending at it. Frames are positions in the map's order;
/// callers pass one contiguous region at a time.
pub fn apply_discount(statuses: &StatusMap, cfg: &SelectorConfig) -> StatusMap {
    let frames: Vec<usize> = statuses.keys().copied().collect();
    let mut missing: Vec<bool> = statuses
        .values()
        .map(|s| *s == FrameStatus::Missing)
        .collect();
    let promoted = discount_mask(&mut missing, cfg);
    let mut out = statuses.clone();
    for (i, p) in promoted.iter().enumerate() {
        if *p {
            out.insert(frames[i], FrameStatus::MustLabel);
        }
    }
    out
}

/// Core of [`apply_discount`] on a boolean mask. Returns the promoted mask
/// and clears promoted entries from `missing`.
pub fn discount_mask(missing: &mut [bool], cfg: &SelectorConfig) -> Vec<bool> {
    let n = missing.len();
    let mut promoted = vec![false; n];
    let mut run = 0usize;
    let mut in_window = 0usize;
    for i in 0..n {
        if i >= cfg.window && missing[i - cfg.window] {
            in_window -= 1;
        }
        if missing[i] {
            if run >= cfg.max_consecutive_missing || in_window + 1 > cfg.max_missing_per_window {
                missing[i] = false;
                promoted[i] = true;
                run = 0;
            } else {
                run += 1;
                in_window += 1;
            }
        } else {
            run = 0;
        }
    }
    promoted
}

/// True when no window and no run breaks the discount limits.
pub fn discount_feasible(missing: &[bool], cfg: &SelectorConfig) -> bool {
    let mut run = 0;
    for &m in missing {
        run = if m { run + 1 } else { 0 };
        if run > cfg.max_consecutive_missing {
            return false;
        }
    }
    let n = missing.len();
    (0..n).all(|end| {
        let start = (end + 1).saturating_sub(cfg.window);
        missing[start..=end].iter().filter(|&&m| m).count() <= cfg.max_missing_per_window
    })
}

/// Pending entries for every `must_label` frame, in frame order.
pub fn emit_manifest(
    statuses: &StatusMap,
    video_id: &str,
    reason: LabelReason,
) -> Vec<LabelManifestEntry> {
    statuses
        .iter()
        .filter(|(_, s)| **s == FrameStatus::MustLabel)
        .map(|(&f, _)| LabelManifestEntry::pending(video_id, f, reason))
        .collect()
}

/// Combines automatic selections, manual submissions and remaining gaps into
/// one keypoint stream over the frames of `statuses`.
pub fn merge_manual(
    selection: &ActiveSelection,
    statuses: &StatusMap,
    manifest: &[LabelManifestEntry],
) -> Result<KeypointSequence> {
    let done: BTreeMap<usize, &LabelManifestEntry> = manifest
        .iter()
        .filter(|e| e.status == LabelStatus::Done)
        .map(|e| (e.frame, e))
        .collect();

    let pending: BTreeSet<usize> = statuses
        .iter()
        .filter(|(f, s)| {
            matches!(s, FrameStatus::MustLabel | FrameStatus::Manual) && !done.contains_key(f)
        })
        .map(|(&f, _)| f)
        .collect();
    if !pending.is_empty() {
        return Err(Error::PendingFrames(pending.into_iter().collect()));
    }

    let mut frames = Vec::with_capacity(statuses.len());
    for (&f, status) in statuses {
        let frame = match status {
            FrameStatus::MustLabel | FrameStatus::Manual => {
                let pose = done[&f].pose().expect("done entry")?;
                SequenceFrame::manual(f, pose)
            }
            FrameStatus::GoodAutomatic => match selection.get(f) {
                Some(c) => {
                    SequenceFrame::automatic(f, c.candidate.pose, labelling_score(&c.candidate))
                }
                None => SequenceFrame::missing(f),
            },
            FrameStatus::Missing => SequenceFrame::missing(f),
        };
        frames.push(frame);
    }
    Ok(KeypointSequence::new(frames))
}

/// Marks detected outlier frames for relabelling.
pub fn mark_outliers(statuses: &StatusMap, outliers: &[usize]) -> StatusMap {
    let mut out = statuses.clone();
    for f in outliers {
        if let Some(s) = out.get_mut(f) {
            if *s == FrameStatus::GoodAutomatic {
                *s = FrameStatus::MustLabel;
            }
        }
    }
    out
}
