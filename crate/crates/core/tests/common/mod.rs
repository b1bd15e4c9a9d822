#![allow(dead_code)]

use groundwork_core::pose::{BBox, Keypoint, Pose, PoseCandidate, NUM_JOINTS};
use proptest::prelude::*;

pub fn pose_at(cx: f64, cy: f64, scale: f64) -> Pose {
    let mut joints = [Keypoint::new(0.0, 0.0, 0.9); NUM_JOINTS];
    for (j, k) in joints.iter_mut().enumerate() {
        let a = j as f64 * 0.7;
        k.x = cx + scale * (0.3 * a.cos() + 0.02 * j as f64);
        k.y = cy + scale * (0.5 * a.sin() + 0.05 * j as f64);
    }
    Pose::new(joints).unwrap()
}

pub fn candidate(frame: usize, model: &str, b: [f64; 4], score: f64) -> PoseCandidate {
    let pose = pose_at(b[0] + b[2] / 2.0, b[1] + b[3] / 2.0, b[3] / 2.0);
    PoseCandidate::new(
        frame,
        BBox::new(b[0], b[1], b[2], b[3]).unwrap(),
        score,
        pose,
        model,
    )
    .unwrap()
}

pub fn arb_box() -> impl Strategy<Value = [f64; 4]> {
    (0.0..400.0f64, 0.0..400.0f64, 1.0..200.0f64, 1.0..200.0f64)
        .prop_map(|(x, y, w, h)| [x, y, w, h])
}

/// Candidates from up to nine models, clustered so that suppression happens.
pub fn arb_candidates(frame: usize) -> impl Strategy<Value = Vec<PoseCandidate>> {
    let one = (
        0..9usize,
        0..3usize,
        -8.0..8.0f64,
        -8.0..8.0f64,
        0.8..1.2f64,
        0.0..1.0f64,
    );
    prop::collection::vec(one, 0..40).prop_map(move |items| {
        items
            .into_iter()
            .map(|(m, cluster, dx, dy, s, score)| {
                let base = [50.0 + 150.0 * cluster as f64, 80.0, 60.0, 140.0];
                let b = [base[0] + dx, base[1] + dy, base[2] * s, base[3] * s];
                candidate(frame, &format!("m{m}"), b, score)
            })
            .collect()
    })
}
