use crate::error::{Error, Result};
use crate::pose::{self_normalize, NormalizedPose, NUM_JOINTS};
use crate::sequence::{Cuts, KeypointSequence};

use super::VideoMeta;

/// A sequence together with its frame rate and shot cuts.
#[derive(Debug, Clone, Copy)]
pub struct Clip<'a> {
    pub sequence: &'a KeypointSequence,
    pub meta: &'a VideoMeta,
    pub cuts: &'a Cuts,
}

/// Runs of consecutive, posed frames that do not cross a cut, normalised per
/// frame against their own tightest box.
fn posed_runs(clip: &Clip<'_>) -> Result<Vec<Vec<NormalizedPose>>> {
    let frames = clip.sequence.frames();
    let mut runs = Vec::new();
    for piece in clip.sequence.pieces(clip.cuts) {
        let mut run = Vec::new();
        for f in &frames[piece] {
            match &f.pose {
                Some(p) => run.push(self_normalize(p)?),
                None => {
                    if run.len() >= 2 {
                        runs.push(std::mem::take(&mut run));
                    }
                    run.clear();
                }
            }
        }
        if run.len() >= 2 {
            runs.push(run);
        }
    }
    Ok(runs)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovementStats {
    /// Mean speed over joints, in normalised units per second.
    pub overall: f64,
    pub per_joint: [f64; NUM_JOINTS],
}

/// Average per-joint speed of normalised keypoints.
///
/// A joint's speed in a sequence is its mean frame-to-frame displacement
/// times the frame rate, over transitions that stay within one shot piece.
/// Sequences are averaged per joint, then joints are averaged.
pub fn movement_diversity(clips: &[Clip<'_>]) -> Result<MovementStats> {
    let mut per_joint = [0.0; NUM_JOINTS];
    let mut units = 0usize;
    for clip in clips {
        let runs = posed_runs(clip)?;
        if runs.is_empty() {
            return Err(Error::SequenceTooShort {
                needed: 2,
                got: clip.sequence.posed_count().min(1),
            });
        }
        let mut sums = [0.0; NUM_JOINTS];
        let mut steps = 0usize;
        for run in &runs {
            for w in run.windows(2) {
                for (j, s) in sums.iter_mut().enumerate() {
                    *s += dist(w[0].joints()[j], w[1].joints()[j]) * clip.meta.fps;
                }
                steps += 1;
            }
        }
        for (acc, s) in per_joint.iter_mut().zip(sums) {
            *acc += s / steps as f64;
        }
        units += 1;
    }
    if units == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    for v in &mut per_joint {
        *v /= units as f64;
    }
    let overall = per_joint.iter().sum::<f64>() / NUM_JOINTS as f64;
    Ok(MovementStats { overall, per_joint })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseDiversity {
    /// Mean of the per-axis values.
    pub overall: f64,
    pub per_axis: [f64; 2],
}

/// Standard deviation of normalised joint positions.
///
/// Population standard deviation per joint and axis within each shot piece,
/// averaged over pieces and joints.
pub fn pose_diversity(clips: &[Clip<'_>]) -> Result<PoseDiversity> {
    let mut acc = [0.0; 2];
    let mut units = 0usize;
    for clip in clips {
        let runs = posed_runs(clip)?;
        if runs.is_empty() {
            return Err(Error::SequenceTooShort {
                needed: 2,
                got: clip.sequence.posed_count().min(1),
            });
        }
        for run in &runs {
            let n = run.len() as f64;
            for (axis, a) in acc.iter_mut().enumerate() {
                let mut total = 0.0;
                for j in 0..NUM_JOINTS {
                    let mean = run.iter().map(|p| p.joints()[j][axis]).sum::<f64>() / n;
                    let var = run
                        .iter()
                        .map(|p| (p.joints()[j][axis] - mean).powi(2))
                        .sum::<f64>()
                        / n;
                    total += var.sqrt();
                }
                *a += total / NUM_JOINTS as f64;
            }
            units += 1;
        }
    }
    if units == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let per_axis = acc.map(|a| a / units as f64);
    Ok(PoseDiversity {
        overall: 0.5 * (per_axis[0] + per_axis[1]),
        per_axis,
    })
}
