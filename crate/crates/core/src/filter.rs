//! Reduction of the multi-model detection ensemble to a clean candidate set:
//! confidence rejection, the largest boxes per model, then pooled NMS.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::{iou, PoseCandidate};

/// All candidates detected in one frame, from any model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameDetections {
    pub frame: usize,
    pub candidates: Vec<PoseCandidate>,
}

impl FrameDetections {
    pub fn new(frame: usize, candidates: Vec<PoseCandidate>) -> Self {
        Self { frame, candidates }
    }

    fn with(&self, candidates: Vec<PoseCandidate>) -> Self {
        Self {
            frame: self.frame,
            candidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub min_box_score: f64,
    pub top_k_per_model: usize,
    pub nms_iou: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_box_score: 0.5,
            top_k_per_model: 4,
            nms_iou: 0.7,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_box_score) {
            return Err(Error::InvalidConfig(format!(
                "min_box_score {} outside [0, 1]",
                self.min_box_score
            )));
        }
        if self.top_k_per_model == 0 {
            return Err(Error::InvalidConfig(
                "top_k_per_model must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.nms_iou) {
            return Err(Error::InvalidConfig(format!(
                "nms_iou {} outside [0, 1]",
                self.nms_iou
            )));
        }
        Ok(())
    }
}

/// Keeps candidates whose box score reaches `min_box_score`, in input order.
pub fn reject_low_confidence(frame: &FrameDetections, cfg: &FilterConfig) -> FrameDetections {
    let kept = frame
        .candidates
        .iter()
        .filter(|c| c.box_score >= cfg.min_box_score)
        .cloned()
        .collect();
    frame.with(kept)
}

/// Keeps the `top_k_per_model` largest boxes of every model.
///
/// Ties on area go to the higher box score, then to the earlier candidate.
/// Survivors keep their input order.
pub fn keep_largest_per_model(frame: &FrameDetections, cfg: &FilterConfig) -> FrameDetections {
    let mut by_model: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in frame.candidates.iter().enumerate() {
        by_model.entry(c.model_id.as_str()).or_default().push(i);
    }
    let mut keep = vec![false; frame.candidates.len()];
    for idxs in by_model.values_mut() {
        idxs.sort_by(|&a, &b| {
            let (ca, cb) = (&frame.candidates[a], &frame.candidates[b]);
            cb.bbox
                .area()
                .total_cmp(&ca.bbox.area())
                .then(cb.box_score.total_cmp(&ca.box_score))
                .then(a.cmp(&b))
        });
        for &i in idxs.iter().take(cfg.top_k_per_model) {
            keep[i] = true;
        }
    }
    let kept = frame
        .candidates
        .iter()
        .zip(keep)
        .filter(|&(_, k)| k)
        .map(|(c, _)| c.clone())
        .collect();
    frame.with(kept)
}

fn nms_order(cands: &[PoseCandidate], a: usize, b: usize) -> Ordering {
    cands[b]
        .box_score
        .total_cmp(&cands[a].box_score)
        .then(cands[b].bbox.area().total_cmp(&cands[a].bbox.area()))
        .then(a.cmp(&b))
}

/// Greedy hard NMS over boxes, pooled across models.
///
/// Output is in descending score order (ties: larger area, then input order).
pub fn nms(candidates: &[PoseCandidate], cfg: &FilterConfig) -> Vec<PoseCandidate> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| nms_order(candidates, a, b));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let suppressed = kept
            .iter()
            .any(|&k| iou(&candidates[k].bbox, &candidates[i].bbox) > cfg.nms_iou);
        if !suppressed {
            kept.push(i);
        }
    }
    kept.into_iter().map(|i| candidates[i].clone()).collect()
}

/// Rejection, per-model top-k and NMS, in that order.
pub fn filter_frame(frame: &FrameDetections, cfg: &FilterConfig) -> FrameDetections {
    let confident = reject_low_confidence(frame, cfg);
    let largest = keep_largest_per_model(&confident, cfg);
    frame.with(nms(&largest.candidates, cfg))
}
