use crate::error::{Error, Result};
use crate::pose::NUM_JOINTS;
use crate::sequence::KeypointSequence;

/// Mean absolute coordinate difference in pixels, over posed frames, joints
/// and both axes.
///
/// Both sequences must list the same frames with poses on the same frames.
pub fn sequence_mae(a: &KeypointSequence, b: &KeypointSequence) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::FrameMismatch);
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        if fa.frame != fb.frame {
            return Err(Error::FrameMismatch);
        }
        match (&fa.pose, &fb.pose) {
            (Some(pa), Some(pb)) => {
                for (ka, kb) in pa.joints().iter().zip(pb.joints()) {
                    total += (ka.x - kb.x).abs() + (ka.y - kb.y).abs();
                }
                count += 2 * NUM_JOINTS;
            }
            (None, None) => {}
            _ => return Err(Error::FrameMismatch),
        }
    }
    if count == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    Ok(total / count as f64)
}
