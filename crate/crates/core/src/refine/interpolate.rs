use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bezier::{bernstein_matrix, fit_columns};
use crate::error::{Error, Result};
use crate::pose::{Keypoint, Pose, NUM_JOINTS};
use crate::sequence::{Cuts, KeypointSequence, Provenance, SequenceFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapBlend {
    #[default]
    Average,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BezierConfig {
    pub window: usize,
    pub stride: usize,
    pub degree: usize,
    pub overlap_blend: OverlapBlend,
}

impl Default for BezierConfig {
    fn default() -> Self {
        Self {
            window: 15,
            stride: 14,
            degree: 7,
            overlap_blend: OverlapBlend::Average,
        }
    }
}

impl BezierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::InvalidConfig("window must be at least 2".into()));
        }
        if self.stride == 0 || self.stride >= self.window {
            return Err(Error::InvalidConfig(format!(
                "stride must be in 1..window, got {}",
                self.stride
            )));
        }
        if self.degree >= self.window {
            return Err(Error::InvalidConfig(format!(
                "degree {} must be below window {}",
                self.degree, self.window
            )));
        }
        Ok(())
    }
}

/// Result of interpolating a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolation {
    /// Curve values at every frame that could be filled.
    pub sequence: KeypointSequence,
    /// Input poses of manual frames, before smoothing.
    pub manual_originals: BTreeMap<usize, Pose>,
    /// `(frame, joint)` pairs no window could fill.
    pub unfilled: Vec<(usize, usize)>,
}

/// Window bounds (positions, inclusive) covering `0..len`. The final window
/// is moved back to end at the last frame so it keeps full length.
fn windows(len: usize, cfg: &BezierConfig) -> Vec<(usize, usize)> {
    if len <= cfg.window {
        return vec![(0, len - 1)];
    }
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        let end = start + cfg.window - 1;
        if end >= len - 1 {
            out.push((len - cfg.window, len - 1));
            break;
        }
        out.push((start, end));
        start += cfg.stride;
    }
    out
}

/// Fills and smooths every region of `sequence` with sliding-window
/// least-squares Bézier curves, one curve per joint and window.
///
/// Fitting parameters are proportional to frame numbers within a window.
/// Frames covered by two windows take the mean of both curves. Each joint's
/// samples are centred on their mean before the fit, so windows with fewer
/// samples than control points stay translation equivariant.
pub fn interpolate_sequence(
    sequence: &KeypointSequence,
    cuts: &Cuts,
    cfg: &BezierConfig,
) -> Result<Interpolation> {
    cfg.validate()?;
    let frames = sequence.frames();
    let mut out_frames = Vec::with_capacity(frames.len());
    let mut unfilled = Vec::new();
    let manual_originals = frames
        .iter()
        .filter(|f| f.provenance == Provenance::Manual)
        .filter_map(|f| f.pose.map(|p| (f.frame, p)))
        .collect();

    for piece in sequence.pieces(cuts) {
        let region = &frames[piece];
        if region.iter().filter(|f| f.pose.is_some()).count() < 2 {
            return Err(Error::SparseRegion {
                start: region[0].frame,
                end: region[region.len() - 1].frame,
            });
        }
        let mut sum = vec![[[0.0f64; 2]; NUM_JOINTS]; region.len()];
        let mut hits = vec![0u32; region.len()];

        for (ws, we) in windows(region.len(), cfg) {
            let f_first = region[ws].frame as f64;
            let span = (region[we].frame - region[ws].frame) as f64;
            let usable: Vec<usize> = (ws..=we).filter(|&i| region[i].pose.is_some()).collect();
            if usable.len() < 2 {
                continue;
            }
            let taus: Vec<f64> = usable
                .iter()
                .map(|&i| (region[i].frame as f64 - f_first) / span)
                .collect();
            let mut samples = DMatrix::from_fn(usable.len(), 2 * NUM_JOINTS, |r, c| {
                let k = region[usable[r]].pose.expect("usable").joints()[c / 2];
                if c % 2 == 0 {
                    k.x
                } else {
                    k.y
                }
            });
            let means: Vec<f64> = samples.column_iter().map(|c| c.mean()).collect();
            for (c, m) in means.iter().enumerate() {
                samples.column_mut(c).add_scalar_mut(-m);
            }
            let control = fit_columns(&taus, cfg.degree, &samples)?;
            let eval_taus: Vec<f64> = (ws..=we)
                .map(|i| (region[i].frame as f64 - f_first) / span)
                .collect();
            let curve = bernstein_matrix(cfg.degree, &eval_taus)? * control;
            for (row, i) in (ws..=we).enumerate() {
                for j in 0..NUM_JOINTS {
                    sum[i][j][0] += curve[(row, 2 * j)] + means[2 * j];
                    sum[i][j][1] += curve[(row, 2 * j + 1)] + means[2 * j + 1];
                }
                hits[i] += 1;
            }
        }

        for (i, input) in region.iter().enumerate() {
            if hits[i] == 0 {
                unfilled.extend((0..NUM_JOINTS).map(|j| (input.frame, j)));
                out_frames.push(SequenceFrame::missing(input.frame));
                continue;
            }
            let n = hits[i] as f64;
            let mut joints = [Keypoint::new(0.0, 0.0, 0.0); NUM_JOINTS];
            for (j, k) in joints.iter_mut().enumerate() {
                k.x = sum[i][j][0] / n;
                k.y = sum[i][j][1] / n;
                k.score = input.pose.map_or(0.0, |p| p.joints()[j].score);
            }
            let provenance = if input.provenance == Provenance::Manual {
                Provenance::Manual
            } else {
                Provenance::Interpolated
            };
            out_frames.push(SequenceFrame {
                frame: input.frame,
                pose: Some(Pose::new(joints)?),
                provenance,
                labelling_score: input.labelling_score,
            });
        }
    }

    Ok(Interpolation {
        sequence: KeypointSequence::new(out_frames),
        manual_originals,
        unfilled,
    })
}
