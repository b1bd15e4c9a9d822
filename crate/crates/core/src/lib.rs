//! Post-processing for 2D dance keypoints.
//!
//! The crate turns per-frame pose candidates from several detectors into one
//! clean keypoint sequence per dancer, and measures the result:
//!
//! 1. [`filter`] drops weak and duplicate candidates in each frame.
//! 2. [`tracker`] links candidates over time and picks the active dancer.
//! 3. [`selector`] decides which frames need a human label.
//! 4. [`refine`] flags outliers and fills gaps with Bézier curves.
//! 5. [`metrics`] computes diversity, FID and beat statistics.
//!
//! ```
//! use groundwork_core::pose::{iou, BBox};
//!
//! let a = BBox::new(0.0, 0.0, 10.0, 10.0)?;
//! let b = BBox::new(5.0, 0.0, 10.0, 10.0)?;
//! assert!((iou(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
//! # Ok::<(), groundwork_core::Error>(())
//! ```

pub mod error;
pub mod filter;
pub mod metrics;
pub mod pose;
pub mod refine;
pub mod selector;
pub mod sequence;
pub mod tracker;

pub use error::{Error, Result};
pub use pose::{BBox, Keypoint, Pose, PoseCandidate, NUM_JOINTS};
pub use sequence::{Cuts, KeypointSequence, Provenance, SequenceFrame};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/poses.md")]
    mod poses {}
    #[doc = include_str!("../../../book/src/filtering.md")]
    mod filtering {}
    #[doc = include_str!("../../../book/src/tracking.md")]
    mod tracking {}
    #[doc = include_str!("../../../book/src/selection.md")]
    mod selection {}
    #[doc = include_str!("../../../book/src/refinement.md")]
    mod refinement {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
