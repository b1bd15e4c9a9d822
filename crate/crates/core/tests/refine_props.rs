use groundwork_core::pose::{Keypoint, Pose, NUM_JOINTS};
use groundwork_core::refine::{
    bernstein_matrix, detect_outliers, interpolate_sequence, BezierConfig, OutlierConfig,
};
use groundwork_core::sequence::{Cuts, KeypointSequence, Provenance, SequenceFrame};
use proptest::prelude::*;

fn pose(t: f64, jitter: &[f64]) -> Pose {
    let mut joints = [Keypoint::new(0.0, 0.0, 0.8); NUM_JOINTS];
    for (j, k) in joints.iter_mut().enumerate() {
        k.x = 300.0 + 40.0 * (0.1 * t + j as f64).sin() + jitter[(2 * j) % jitter.len()];
        k.y =
            200.0 + 10.0 * j as f64 + 25.0 * (0.07 * t).cos() + jitter[(2 * j + 1) % jitter.len()];
    }
    Pose::new(joints).unwrap()
}

/// A sequence starting at an arbitrary frame with missing, manual and spiked
/// frames mixed in.
fn arb_sequence() -> impl Strategy<Value = KeypointSequence> {
    let frame = (0..10u8, prop::collection::vec(-3.0..3.0f64, 4));
    (0..1000usize, prop::collection::vec(frame, 2..80)).prop_map(|(start, frames)| {
        let frames = frames
            .into_iter()
            .enumerate()
            .map(|(i, (kind, jitter))| {
                let f = start + i;
                let p = pose(f as f64, &jitter);
                match kind {
                    0 | 1 => SequenceFrame::missing(f),
                    2 => SequenceFrame::manual(f, p),
                    3 => {
                        SequenceFrame::automatic(f, p.map_coords(|x, y| (x + 150.0, y - 90.0)), 0.9)
                    }
                    _ => SequenceFrame::automatic(f, p, 0.9),
                }
            })
            .collect();
        KeypointSequence::new(frames)
    })
}

fn transformed(seq: &KeypointSequence, s: f64, dx: f64, dy: f64) -> KeypointSequence {
    let frames = seq
        .frames()
        .iter()
        .map(|f| SequenceFrame {
            pose: f
                .pose
                .map(|p| p.map_coords(|x, y| (s * x + dx, s * y + dy))),
            ..f.clone()
        })
        .collect();
    KeypointSequence::new(frames)
}

proptest! {
    #[test]
    fn bernstein_rows_are_a_partition_of_unity(
        degree in 0..=10usize,
        taus in prop::collection::vec(0.0..=1.0f64, 1..30),
    ) {
        let m = bernstein_matrix(degree, &taus).unwrap();
        for row in m.row_iter() {
            prop_assert!(row.iter().all(|v| *v >= 0.0));
            prop_assert!((row.sum() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn interpolation_covers_the_input_with_finite_values(seq in arb_sequence()) {
        prop_assume!(seq.posed_count() >= 2);
        let out = interpolate_sequence(&seq, &Cuts::none(), &BezierConfig::default()).unwrap();
        let frames: Vec<usize> = out.sequence.frames().iter().map(|f| f.frame).collect();
        let expected: Vec<usize> = seq.frames().iter().map(|f| f.frame).collect();
        prop_assert_eq!(frames, expected);
        for (o, i) in out.sequence.frames().iter().zip(seq.frames()) {
            if let Some(p) = o.pose {
                prop_assert!(p.joints().iter().all(|k| k.x.is_finite() && k.y.is_finite()));
            } else {
                prop_assert!(out.unfilled.iter().any(|(f, _)| *f == o.frame));
            }
            prop_assert_eq!(o.provenance == Provenance::Manual, i.provenance == Provenance::Manual);
        }
    }

    #[test]
    fn interpolation_commutes_with_translation_and_scale(
        seq in arb_sequence(),
        s in 0.25..4.0f64,
        dx in -500.0..500.0f64,
        dy in -500.0..500.0f64,
    ) {
        prop_assume!(seq.posed_count() >= 2);
        let cfg = BezierConfig::default();
        let a = interpolate_sequence(&seq, &Cuts::none(), &cfg).unwrap().sequence;
        let b = interpolate_sequence(&transformed(&seq, s, dx, dy), &Cuts::none(), &cfg).unwrap().sequence;
        let want = transformed(&a, s, dx, dy);
        for (x, y) in want.frames().iter().zip(b.frames()) {
            match (x.pose, y.pose) {
                (Some(p), Some(q)) => {
                    for (u, v) in p.joints().iter().zip(q.joints()) {
                        prop_assert!((u.x - v.x).abs() <= 1e-7 && (u.y - v.y).abs() <= 1e-7,
                            "frame {}: {:?} vs {:?}", x.frame, u, v);
                    }
                }
                (None, None) => {}
                _ => prop_assert!(false, "coverage differs at frame {}", x.frame),
            }
        }
    }

    #[test]
    fn outliers_ignore_translation_and_skip_manual_frames(
        seq in arb_sequence(),
        dx in -1000.0..1000.0f64,
        dy in -1000.0..1000.0f64,
    ) {
        let cfg = OutlierConfig::default();
        let flagged = detect_outliers(&seq, &Cuts::none(), &cfg);
        for f in &flagged {
            prop_assert!(seq.get(*f).unwrap().provenance != Provenance::Manual);
        }
        // Shifted by whole pixels.
        let moved = transformed(&seq, 1.0, dx.round(), dy.round());
        prop_assert_eq!(detect_outliers(&moved, &Cuts::none(), &cfg), flagged);
    }
}
