#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use tempfile::TempDir;

pub const VIDEO: &str = "battle01";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let target = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &target);
        } else {
            fs::copy(e.path(), target).unwrap();
        }
    }
}

/// A fresh workspace holding a copy of the bundled battle video.
pub fn fixture_workspace() -> TempDir {
    let tmp = tempfile::tempdir().unwrap();
    copy_dir(&fixtures().join(VIDEO), &tmp.path().join(VIDEO));
    tmp
}

/// Every file below `dir`, relative path to bytes, sorted by path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn read_value(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Differences between a refined video directory and the reference output.
/// Coordinates are compared within 1e-6, everything else exactly.
pub fn golden_mismatches(video_dir: &Path) -> Vec<String> {
    let expected = fixtures().join("expected").join(VIDEO);
    let mut out = Vec::new();

    let got = read_value(&video_dir.join("manifest.json"));
    let want = read_value(&expected.join("manifest.json"));
    if got != want {
        out.push(format!("manifest differs:\n got {got}\nwant {want}"));
    }

    let want_dir = expected.join("sequences");
    let mut names: Vec<_> = fs::read_dir(&want_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut got_names: Vec<_> = fs::read_dir(video_dir.join("out/sequences"))
        .map(|d| d.map(|e| e.unwrap().file_name()).collect())
        .unwrap_or_default();
    got_names.sort();
    if names != got_names {
        out.push(format!("sequence files {got_names:?}, expected {names:?}"));
    }

    for name in names {
        let path = video_dir.join("out/sequences").join(&name);
        if !path.exists() {
            continue;
        }
        let got = read_value(&path);
        let want = read_value(&want_dir.join(&name));
        let label = name.to_string_lossy().to_string();
        for key in ["video_id", "segment_id", "fps"] {
            if got[key] != want[key] {
                out.push(format!("{label}: {key} {} != {}", got[key], want[key]));
            }
        }
        let (gf, wf) = (
            got["frames"].as_array().unwrap(),
            want["frames"].as_array().unwrap(),
        );
        if gf.len() != wf.len() {
            out.push(format!(
                "{label}: {} frames, expected {}",
                gf.len(),
                wf.len()
            ));
            continue;
        }
        for (g, w) in gf.iter().zip(wf) {
            let frame = &w["frame"];
            if g["frame"] != *frame || g["provenance"] != w["provenance"] {
                out.push(format!("{label}: frame {frame}: {g:?} vs {w:?}"));
                continue;
            }
            match (g["labelling_score"].as_f64(), w["labelling_score"].as_f64()) {
                (Some(a), Some(b)) if (a - b).abs() <= 1e-9 => {}
                (None, None) => {}
                (a, b) => out.push(format!("{label}: frame {frame}: score {a:?} vs {b:?}")),
            }
            match (g["keypoints"].as_array(), w["keypoints"].as_array()) {
                (None, None) => {}
                (Some(a), Some(b)) if a.len() == b.len() => {
                    let worst = a
                        .iter()
                        .flat_map(|p| p.as_array().unwrap().iter())
                        .zip(b.iter().flat_map(|p| p.as_array().unwrap().iter()))
                        .map(|(x, y)| (x.as_f64().unwrap() - y.as_f64().unwrap()).abs())
                        .fold(0.0, f64::max);
                    if worst > 1e-6 {
                        out.push(format!("{label}: frame {frame}: keypoints off by {worst}"));
                    }
                }
                _ => out.push(format!("{label}: frame {frame}: keypoint presence differs")),
            }
        }
    }
    out
}
