use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::NUM_JOINTS;
use crate::sequence::{Cuts, KeypointSequence, Provenance};

/// Scale turning a median absolute deviation into a normal-consistent sigma.
pub const MAD_SCALE: f64 = 1.4826;

/// Smallest MAD used when computing the rejection threshold.
pub const MAD_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutlierConfig {
    pub median_window: usize,
    pub mad_sigmas: f64,
    pub min_flagged_joints: usize,
}

impl Default for OutlierConfig {
    fn default() -> Self {
        Self {
            median_window: 11,
            mad_sigmas: 3.0,
            min_flagged_joints: 5,
        }
    }
}

impl OutlierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.median_window < 3 || self.median_window.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "median_window must be odd and >= 3, got {}",
                self.median_window
            )));
        }
        if self.mad_sigmas.is_nan() || self.mad_sigmas <= 0.0 {
            return Err(Error::InvalidConfig("mad_sigmas must be positive".into()));
        }
        if !(1..=NUM_JOINTS).contains(&self.min_flagged_joints) {
            return Err(Error::InvalidConfig(format!(
                "min_flagged_joints must be in 1..=17, got {}",
                self.min_flagged_joints
            )));
        }
        Ok(())
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Frames whose pose deviates from the running median on at least
/// `min_flagged_joints` joints.
///
/// A joint is flagged when either coordinate lies more than
/// `mad_sigmas * 1.4826 * MAD` from the median of the centred window. Windows
/// are truncated at cuts and gaps; missing frames contribute no samples.
/// Manual frames feed the statistics but are never reported.
pub fn detect_outliers(
    sequence: &KeypointSequence,
    cuts: &Cuts,
    cfg: &OutlierConfig,
) -> Vec<usize> {
    let half = cfg.median_window / 2;
    let frames = sequence.frames();
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(cfg.median_window);
    let mut dev = Vec::with_capacity(cfg.median_window);

    for piece in sequence.pieces(cuts) {
        for i in piece.clone() {
            let Some(pose) = frames[i].pose.as_ref() else {
                continue;
            };
            if frames[i].provenance == Provenance::Manual {
                continue;
            }
            let lo = i.saturating_sub(half).max(piece.start);
            let hi = (i + half).min(piece.end - 1);
            let mut flagged = 0;
            for j in 0..NUM_JOINTS {
                let mut joint_flagged = false;
                for axis in 0..2 {
                    buf.clear();
                    buf.extend(frames[lo..=hi].iter().filter_map(|f| {
                        f.pose.as_ref().map(|p| {
                            let k = p.joints()[j];
                            if axis == 0 {
                                k.x
                            } else {
                                k.y
                            }
                        })
                    }));
                    let med = median(&mut buf);
                    dev.clear();
                    dev.extend(buf.iter().map(|v| (v - med).abs()));
                    let mad = median(&mut dev).max(MAD_FLOOR);
                    let k = pose.joints()[j];
                    let v = if axis == 0 { k.x } else { k.y };
                    if (v - med).abs() > cfg.mad_sigmas * MAD_SCALE * mad {
                        joint_flagged = true;
                    }
                }
                if joint_flagged {
                    flagged += 1;
                }
            }
            if flagged >= cfg.min_flagged_joints {
                out.push(frames[i].frame);
            }
        }
    }
    out
}
