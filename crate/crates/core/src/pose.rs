//! Geometric primitives shared by every stage: boxes, COCO-17 poses, IOU and
//! tightest-box normalisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of joints in the COCO keypoint convention.
pub const NUM_JOINTS: usize = 17;

/// Extent given to a tightest box along an axis where all joints coincide.
pub const DEGENERATE_EXTENT: f64 = 1e-6;

/// COCO-17 joint names in storage order.
pub const JOINT_NAMES: [&str; NUM_JOINTS] = [
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
];

/// Limb connections used for drawing a COCO-17 skeleton.
pub const SKELETON_EDGES: [(usize, usize); 19] = [
    (15, 13),
    (13, 11),
    (16, 14),
    (14, 12),
    (11, 12),
    (5, 11),
    (6, 12),
    (5, 6),
    (5, 7),
    (6, 8),
    (7, 9),
    (8, 10),
    (1, 2),
    (0, 1),
    (0, 2),
    (1, 3),
    (2, 4),
    (3, 5),
    (4, 6),
];

/// Axis-aligned box in pixels: left, top, width, height.
///
/// Width and height are strictly positive and all values finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidBox(format!(
                "non-finite coordinates ({x}, {y}, {w}, {h})"
            )));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidBox(format!(
                "extents must be positive, got w={w} h={h}"
            )));
        }
        Ok(Self { x, y, w, h })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x && x <= self.right() && y >= self.y && y <= self.bottom()
    }
}

impl TryFrom<[f64; 4]> for BBox {
    type Error = Error;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

/// Intersection over union of two boxes, treated as continuous rectangles.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.right().min(b.right()) - a.x.max(b.x)).max(0.0);
    let ih = (a.bottom().min(b.bottom()) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    // Extents from the edges, so that a box compared with itself gives
    // exactly 1.
    let area = |r: &BBox| (r.right() - r.x) * (r.bottom() - r.y);
    let union = area(a) + area(b) - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// A 2D joint location with a detector confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, score: f64) -> Self {
        Self { x, y, score }
    }

    /// A manually placed point, which carries full confidence.
    pub fn manual(x: f64, y: f64) -> Self {
        Self { x, y, score: 1.0 }
    }

    fn validate(&self, idx: usize) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite()) {
            return Err(Error::InvalidKeypoint(format!(
                "joint {idx} has non-finite coordinates"
            )));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::InvalidKeypoint(format!(
                "joint {idx} score {} outside [0, 1]",
                self.score
            )));
        }
        Ok(())
    }
}

/// Seventeen keypoints in COCO order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    joints: [Keypoint; NUM_JOINTS],
}

impl Pose {
    pub fn new(joints: [Keypoint; NUM_JOINTS]) -> Result<Self> {
        for (i, j) in joints.iter().enumerate() {
            j.validate(i)?;
        }
        Ok(Self { joints })
    }

    /// Builds a pose from a slice, checking the joint count.
    pub fn from_slice(joints: &[Keypoint]) -> Result<Self> {
        let arr: [Keypoint; NUM_JOINTS] = joints.try_into().map_err(|_| Error::JointCount {
            expected: NUM_JOINTS,
            found: joints.len(),
        })?;
        Self::new(arr)
    }

    /// Builds a manual pose (score 1.0 everywhere) from pixel coordinates.
    pub fn from_coords(coords: &[[f64; 2]; NUM_JOINTS]) -> Result<Self> {
        Self::new(coords.map(|[x, y]| Keypoint::manual(x, y)))
    }

    pub fn joints(&self) -> &[Keypoint; NUM_JOINTS] {
        &self.joints
    }

    pub fn coords(&self) -> [[f64; 2]; NUM_JOINTS] {
        self.joints.map(|k| [k.x, k.y])
    }

    pub fn mean_score(&self) -> f64 {
        self.joints.iter().map(|k| k.score).sum::<f64>() / NUM_JOINTS as f64
    }

    /// Applies `f` to every joint's coordinates, keeping scores.
    pub fn map_coords(&self, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> Self {
        let joints = self.joints.map(|k| {
            let (x, y) = f(k.x, k.y);
            Keypoint {
                x,
                y,
                score: k.score,
            }
        });
        Self { joints }
    }
}

/// One detected person in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseCandidate {
    pub frame: usize,
    pub bbox: BBox,
    pub box_score: f64,
    pub pose: Pose,
    pub model_id: String,
}

impl PoseCandidate {
    pub fn new(
        frame: usize,
        bbox: BBox,
        box_score: f64,
        pose: Pose,
        model_id: impl Into<String>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&box_score) {
            return Err(Error::ParameterOutOfRange { value: box_score });
        }
        Ok(Self {
            frame,
            bbox,
            box_score,
            pose,
            model_id: model_id.into(),
        })
    }
}

/// Keypoints expressed relative to a box; nominally within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPose {
    joints: [[f64; 2]; NUM_JOINTS],
}

impl NormalizedPose {
    pub fn joints(&self) -> &[[f64; 2]; NUM_JOINTS] {
        &self.joints
    }

    /// Row-major flattening `x0, y0, x1, y1, ...`.
    pub fn flatten(&self) -> [f64; 2 * NUM_JOINTS] {
        let mut out = [0.0; 2 * NUM_JOINTS];
        for (i, [x, y]) in self.joints.iter().enumerate() {
            out[2 * i] = *x;
            out[2 * i + 1] = *y;
        }
        out
    }
}

/// Smallest axis-aligned box containing every finite joint.
///
/// Zero extents are inflated to [`DEGENERATE_EXTENT`].
pub fn tightest_box(pose: &Pose) -> Result<BBox> {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    let mut any = false;
    for k in pose.joints() {
        if !(k.x.is_finite() && k.y.is_finite()) {
            continue;
        }
        any = true;
        min[0] = min[0].min(k.x);
        min[1] = min[1].min(k.y);
        max[0] = max[0].max(k.x);
        max[1] = max[1].max(k.y);
    }
    if !any {
        return Err(Error::DegeneratePose);
    }
    let extent = |lo: f64, hi: f64| {
        let mut e = (hi - lo).max(DEGENERATE_EXTENT);
        while lo + e < hi {
            e = e.next_up();
        }
        e
    };
    let w = extent(min[0], max[0]);
    let h = extent(min[1], max[1]);
    BBox::new(min[0], min[1], w, h)
}

/// Maps each joint to `((x - x_b) / w, (y - y_b) / h)`.
pub fn normalize_pose(pose: &Pose, bbox: &BBox) -> NormalizedPose {
    let joints = pose
        .joints()
        .map(|k| [(k.x - bbox.x) / bbox.w, (k.y - bbox.y) / bbox.h]);
    NormalizedPose { joints }
}

/// Normalises a pose against its own tightest box.
pub fn self_normalize(pose: &Pose) -> Result<NormalizedPose> {
    Ok(normalize_pose(pose, &tightest_box(pose)?))
}
