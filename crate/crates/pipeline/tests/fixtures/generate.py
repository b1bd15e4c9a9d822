"""Writes the bundled synthetic battle workspace and its expected outputs.

    python3 generate.py

Inputs go to battle01/, expected outputs (computed by reference.py) to
expected/battle01/. The manual annotations in battle01/manual/ are exactly
the frames the reference asks for, labelled from ground truth.
"""

import json
import math
import shutil
from pathlib import Path

import numpy as np

import reference

HERE = Path(__file__).resolve().parent
VIDEO = "battle01"
FPS = 25.0
WIDTH, HEIGHT = 1280, 720
N_FRAMES = 150
CUT = 75
MODELS = [f"m{i}" for i in range(9)]

# Upright standing template, COCO order, offsets from the hip centre.
TEMPLATE = np.array(
    [
        [0, -160], [-8, -168], [8, -168], [-18, -164], [18, -164],
        [-40, -120], [40, -120], [-55, -70], [55, -70], [-60, -25], [60, -25],
        [-22, 0], [22, 0], [-25, 70], [25, 70], [-28, 140], [28, 140],
    ],
    dtype=float,
)

LOW_SCORE = set(range(20, 28)) | {50, 52} | set(range(100, 104))
DANCER_GAP = set(range(60, 63))
SWAP_FRAME = 40


def dancer_pose(t):
    shift = 200.0 if t >= CUT else 0.0
    cx = 500.0 + 80.0 * math.sin(2 * math.pi * t / 90.0) + shift
    cy = 380.0 + 10.0 * math.sin(2 * math.pi * t / 30.0)
    scale = 1.0 + 0.15 * math.sin(2 * math.pi * t / 40.0)
    pose = TEMPLATE * scale
    pose[9:11, 1] += 30.0 * math.sin(2 * math.pi * t / 20.0)
    return pose + [cx, cy]


def idle_pose(t):
    shift = -150.0 if t >= CUT else 0.0
    # Small sway so the idle track outranks the audience but not the dancer.
    return TEMPLATE * (0.8 + 0.01 * math.sin(t / 7.0)) + [1050.0 + shift, 400.0]


def audience_pose(i):
    return TEMPLATE * 0.3 + [120.0 + 140.0 * i, 640.0]


def box_of(pose, rng, margin=0.1, jitter=1.5):
    lo, hi = pose.min(axis=0), pose.max(axis=0)
    w, h = hi - lo
    x = lo[0] - margin * w + rng.normal(0, jitter)
    y = lo[1] - margin * h + rng.normal(0, jitter)
    return [float(x), float(y), float(w * (1 + 2 * margin)), float(h * (1 + 2 * margin))]


def record(frame, model, pose, box, box_score, kp_scores):
    return {
        "frame": frame,
        "model_id": model,
        "box": [round(v, 2) for v in box],
        "box_score": round(float(box_score), 4),
        "keypoints": [
            [round(float(x), 2), round(float(y), 2), round(float(s), 3)]
            for (x, y), s in zip(pose, kp_scores)
        ],
    }


def detections(rng):
    out = []
    for t in range(N_FRAMES):
        truth = dancer_pose(t)
        for m in MODELS:
            if t not in DANCER_GAP:
                pose = truth + rng.normal(0, 2.0, truth.shape)
                if t == SWAP_FRAME:
                    # Upside-down skeleton inside the dancer's box.
                    centre = truth.mean(axis=0)
                    pose = 2 * centre - pose
                box = box_of(truth, rng)
                if t in LOW_SCORE:
                    scores = rng.uniform(0.2, 0.45, 17)
                    box_score = rng.uniform(0.55, 0.7)
                else:
                    scores = rng.uniform(0.7, 0.95, 17)
                    box_score = rng.uniform(0.85, 0.97)
                    if t == SWAP_FRAME:
                        box_score = 0.995
                out.append(record(t, m, pose, box, box_score, scores))
            idle = idle_pose(t) + rng.normal(0, 1.0, (17, 2))
            out.append(
                record(t, m, idle, box_of(idle_pose(t), rng), rng.uniform(0.7, 0.8), rng.uniform(0.6, 0.9, 17))
            )
            if m not in MODELS[:3]:
                continue
            for i in range(5):
                p = audience_pose(i) + rng.normal(0, 1.0, (17, 2))
                score = rng.uniform(0.3, 0.45) if i % 2 else rng.uniform(0.5, 0.6)
                out.append(record(t, m, p, box_of(audience_pose(i), rng), score, rng.uniform(0.3, 0.6, 17)))
    return out


def write(path, value):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(value, indent=2) + "\n")


def main():
    rng = np.random.default_rng(20220519)
    root = HERE / VIDEO
    shutil.rmtree(root, ignore_errors=True)
    shutil.rmtree(HERE / "expected", ignore_errors=True)
    root.mkdir(parents=True)

    with open(root / "detections.jsonl", "w") as f:
        for r in detections(rng):
            f.write(json.dumps(r, separators=(",", ":")) + "\n")
    write(root / "shots.json", [{"start_frame": 0, "end_frame": CUT - 1}, {"start_frame": CUT, "end_frame": N_FRAMES - 1}])
    write(
        root / "segments.json",
        [
            {"start_frame": 5, "end_frame": 90, "movement": "toprock", "dancer_id": "bboy_a", "sequence_id": "s1", "battle_order": 1, "override": False},
            {"start_frame": 95, "end_frame": 145, "movement": "powermove", "dancer_id": "bboy_a", "sequence_id": "s2", "battle_order": 2, "override": False},
        ],
    )
    write(root / "beats.json", {"times": [round(0.2 + 0.48 * i, 4) for i in range(13)]})
    write(root / "meta.json", {"fps": FPS, "frame_width": WIDTH, "frame_height": HEIGHT})
    truth = {t: [[round(float(x), 3), round(float(y), 3)] for x, y in dancer_pose(t)] for t in range(N_FRAMES)}
    write(
        root / "ground_truth.json",
        {
            "video_id": VIDEO,
            "segment_id": "ground_truth",
            "fps": FPS,
            "frames": [
                {"frame": t, "keypoints": truth[t], "provenance": "manual", "labelling_score": 1.0}
                for t in range(N_FRAMES)
            ],
        },
    )

    def label(t):
        return [[round(x * 2) / 2, round(y * 2) / 2] for x, y in truth[t]]

    # First pass asks for low-score frames; the second for outliers found
    # once those are labelled.
    manual = {}
    _, _, low, _ = reference.run(root, VIDEO, manual, FPS)
    manual.update({f: label(f) for f in low})
    _, _, _, outliers = reference.run(root, VIDEO, manual, FPS)
    manual.update({f: label(f) for f in outliers})
    manifest, sequences, low2, outliers2 = reference.run(root, VIDEO, manual, FPS)
    assert low2 == low and outliers2 == outliers and sequences is not None
    for f, kp in manual.items():
        write(root / "manual" / f"{f}.json", {"video_id": VIDEO, "frame": f, "keypoints": kp})

    exp = HERE / "expected" / VIDEO
    write(exp / "manifest.json", manifest)
    for sid, doc in sequences.items():
        write(exp / "sequences" / f"{sid}.json", doc)
    print(f"low-score requests: {low}")
    print(f"outlier requests: {outliers}")


if __name__ == "__main__":
    main()
