mod common;

use std::fs;

use common::{fixtures, VIDEO};
use groundwork::formats::{
    load_beats, load_detections, load_manifest, load_manual, load_meta, load_segments, load_shots,
    save_detections, DetectionRecord, Shot,
};
use groundwork::{PipelineConfig, PipelineError};
use groundwork_core::filter::FrameDetections;
use groundwork_core::metrics::Movement;
use groundwork_core::pose::{BBox, Keypoint, Pose, PoseCandidate, NUM_JOINTS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn record(frame: usize, joints: usize) -> String {
    let keypoints: Vec<[f64; 3]> = (0..joints)
        .map(|i| [i as f64, 2.0 * i as f64, 0.5])
        .collect();
    serde_json::to_string(&DetectionRecord {
        frame,
        model_id: "m0".into(),
        bbox: [0.0, 0.0, 10.0, 20.0],
        box_score: 0.9,
        keypoints,
    })
    .unwrap()
}

#[test]
fn empty_file_gives_no_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("detections.jsonl");
    fs::write(&p, "").unwrap();
    assert!(load_detections(&p).unwrap().is_empty());
}

#[test]
fn sixteen_keypoints_name_line_and_field() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("detections.jsonl");
    fs::write(&p, format!("{}\n{}\n", record(0, 17), record(1, 16))).unwrap();
    let err = load_detections(&p).unwrap_err();
    match &err {
        PipelineError::Parse { line, message, .. } => {
            assert_eq!(*line, 2);
            assert!(message.contains("keypoints"), "{message}");
            assert!(message.contains("16"), "{message}");
        }
        other => panic!("unexpected {other}"),
    }
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains(":2:"));
}

#[test]
fn malformed_lines_report_their_number() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("detections.jsonl");
    let bad_box = record(3, 17).replace("[0.0,0.0,10.0,20.0]", "[0.0,0.0,-1.0,20.0]");
    for (body, line, needle) in [
        (format!("{}\n\n{{\"frame\": 1", record(0, 17)), 3, ""),
        (format!("{}\n{bad_box}\n", record(0, 17)), 2, "box"),
        (
            record(0, 17).replace("\"m0\"", "\"m0\",\"extra\":1"),
            1,
            "extra",
        ),
    ] {
        fs::write(&p, body).unwrap();
        match load_detections(&p).unwrap_err() {
            PipelineError::Parse {
                line: l, message, ..
            } => {
                assert_eq!(l, line, "{message}");
                assert!(message.contains(needle), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }
}

#[test]
fn frames_are_grouped_and_sorted() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("detections.jsonl");
    fs::write(&p, [record(5, 17), record(2, 17), record(5, 17)].join("\n")).unwrap();
    let frames = load_detections(&p).unwrap();
    assert_eq!(
        frames.iter().map(|f| f.frame).collect::<Vec<_>>(),
        vec![2, 5]
    );
    assert_eq!(frames[1].candidates.len(), 2);
}

#[test]
fn save_then_load_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let frames: Vec<FrameDetections> = (0..40)
        .map(|f| {
            let candidates = (0..rng.random_range(1..6))
                .map(|m| {
                    let mut joints = [Keypoint::new(0.0, 0.0, 0.0); NUM_JOINTS];
                    for k in &mut joints {
                        *k = Keypoint::new(
                            rng.random_range(0.0..1280.0),
                            rng.random_range(0.0..720.0),
                            rng.random(),
                        );
                    }
                    let bbox = BBox::new(
                        rng.random_range(0.0..1000.0),
                        rng.random_range(0.0..500.0),
                        rng.random_range(1.0..300.0),
                        rng.random_range(1.0..300.0),
                    )
                    .unwrap();
                    let pose = Pose::new(joints).unwrap();
                    PoseCandidate::new(3 * f, bbox, rng.random(), pose, format!("m{m}")).unwrap()
                })
                .collect();
            FrameDetections::new(3 * f, candidates)
        })
        .collect();
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("d.jsonl");
    save_detections(&p, &frames).unwrap();
    assert_eq!(load_detections(&p).unwrap(), frames);
}

#[test]
fn missing_beats_give_an_empty_track() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(load_beats(&tmp.path().join("beats.json"))
        .unwrap()
        .is_empty());
}

#[test]
fn unsorted_beats_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("beats.json");
    fs::write(&p, r#"{"times": [0.5, 0.4]}"#).unwrap();
    assert!(load_beats(&p).is_err());
}

#[test]
fn overlapping_segments_name_both() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("segments.json");
    fs::write(
        &p,
        r#"[
          {"start_frame": 50, "end_frame": 80, "movement": "footwork", "dancer_id": "d", "sequence_id": "late", "battle_order": 1},
          {"start_frame": 0, "end_frame": 60, "movement": "toprock", "dancer_id": "d", "sequence_id": "early", "battle_order": 1}
        ]"#,
    )
    .unwrap();
    let msg = load_segments(&p).unwrap_err().to_string();
    assert!(
        msg.contains("early 0..=60") && msg.contains("late 50..=80"),
        "{msg}"
    );
}

#[test]
fn unsorted_or_reversed_shots_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("shots.json");
    for body in [
        r#"[{"start_frame": 10, "end_frame": 20}, {"start_frame": 0, "end_frame": 9}]"#,
        r#"[{"start_frame": 0, "end_frame": 10}, {"start_frame": 10, "end_frame": 20}]"#,
        r#"[{"start_frame": 5, "end_frame": 4}]"#,
    ] {
        fs::write(&p, body).unwrap();
        assert!(
            matches!(load_shots(&p), Err(PipelineError::Invalid { .. })),
            "{body}"
        );
    }
}

#[test]
fn missing_required_files_map_to_exit_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let err = load_shots(&tmp.path().join("shots.json")).unwrap_err();
    assert!(matches!(err, PipelineError::MissingInput(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn fixture_side_files_parse_to_known_contents() {
    let dir = fixtures().join(VIDEO);
    assert_eq!(
        load_shots(&dir.join("shots.json")).unwrap(),
        vec![
            Shot {
                start_frame: 0,
                end_frame: 74
            },
            Shot {
                start_frame: 75,
                end_frame: 149
            }
        ]
    );
    let segs = load_segments(&dir.join("segments.json")).unwrap();
    assert_eq!(segs.len(), 2);
    assert_eq!(
        (
            segs[0].start_frame,
            segs[0].end_frame,
            segs[0].movement,
            segs[0].battle_order
        ),
        (5, 90, Movement::Toprock, 1)
    );
    assert_eq!(segs[1].segment_id(), "s2_95");
    assert!(segs.iter().all(|s| !s.wrong_dancer));

    let beats = load_beats(&dir.join("beats.json")).unwrap();
    assert_eq!(beats.len(), 13);
    assert!((beats.times()[1] - 0.68).abs() < 1e-12);

    let meta = load_meta(&dir.join("meta.json"), VIDEO).unwrap();
    assert_eq!(
        (meta.fps, meta.frame_width, meta.frame_height),
        (25.0, 1280, 720)
    );

    let manual = load_manual(&dir.join("manual"), VIDEO).unwrap();
    assert_eq!(
        manual.keys().copied().collect::<Vec<_>>(),
        vec![5, 22, 25, 27, 40, 60, 61, 62, 74, 102]
    );
    assert!(load_manifest(&dir.join("manifest.json"))
        .unwrap()
        .entries
        .is_empty());

    let frames = load_detections(&dir.join("detections.jsonl")).unwrap();
    assert_eq!(frames.len(), 150);
    // Nine models see the dancer and the idle person; three also report the
    // audience.
    assert_eq!(frames[0].candidates.len(), 9 * 2 + 3 * 5);
    assert_eq!(frames[61].candidates.len(), 9 + 3 * 5);
}

#[test]
fn manual_files_for_another_video_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("manual");
    fs::create_dir_all(&dir).unwrap();
    let kp: Vec<[f64; 2]> = vec![[1.0, 2.0]; 17];
    let body = serde_json::json!({"video_id": "other", "frame": 3, "keypoints": kp});
    fs::write(dir.join("3.json"), body.to_string()).unwrap();
    assert!(load_manual(&dir, "v1")
        .unwrap_err()
        .to_string()
        .contains("other"));
}

#[test]
fn config_file_overrides_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("cfg.toml");
    fs::write(&p, "[tracker]\nlookahead = 5\n\n[beats]\nsigma = 0.2\n").unwrap();
    let cfg = PipelineConfig::load(&p).unwrap();
    assert_eq!(cfg.tracker.lookahead, 5);
    assert_eq!(cfg.beats.sigma, 0.2);
    assert_eq!(cfg.bezier, Default::default());

    fs::write(&p, "[bezier]\nstride = 15\n").unwrap();
    assert!(matches!(
        PipelineConfig::load(&p),
        Err(PipelineError::Invalid { .. })
    ));
}
