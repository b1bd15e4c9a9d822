//! On-disk document formats and their validation.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use groundwork_core::filter::FrameDetections;
use groundwork_core::metrics::{BeatTrack, Movement, Segment, VideoMeta};
use groundwork_core::pose::{BBox, Keypoint, Pose, PoseCandidate, NUM_JOINTS};
use groundwork_core::selector::{validate_keypoints, LabelManifestEntry};
use groundwork_core::sequence::{KeypointSequence, Provenance, SequenceFrame};
use groundwork_core::tracker::{OverrideSegment, Track};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

/// One line of a detections file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub frame: usize,
    pub model_id: String,
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
    pub box_score: f64,
    pub keypoints: Vec<[f64; 3]>,
}

impl DetectionRecord {
    pub fn from_candidate(c: &PoseCandidate) -> Self {
        Self {
            frame: c.frame,
            model_id: c.model_id.clone(),
            bbox: c.bbox.into(),
            box_score: c.box_score,
            keypoints: c
                .pose
                .joints()
                .iter()
                .map(|k| [k.x, k.y, k.score])
                .collect(),
        }
    }

    /// Validates the record. Errors name the offending field.
    pub fn to_candidate(&self) -> std::result::Result<PoseCandidate, String> {
        let bbox = BBox::try_from(self.bbox).map_err(|e| format!("field `box`: {e}"))?;
        if self.keypoints.len() != NUM_JOINTS {
            return Err(format!(
                "field `keypoints`: expected {NUM_JOINTS} keypoints, found {}",
                self.keypoints.len()
            ));
        }
        let joints: Vec<Keypoint> = self
            .keypoints
            .iter()
            .map(|[x, y, s]| Keypoint::new(*x, *y, *s))
            .collect();
        let pose = Pose::from_slice(&joints).map_err(|e| format!("field `keypoints`: {e}"))?;
        PoseCandidate::new(
            self.frame,
            bbox,
            self.box_score,
            pose,
            self.model_id.clone(),
        )
        .map_err(|e| format!("field `box_score`: {e}"))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))
}

/// Parses JSON lines, reporting the 1-based line of the first failure.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(line).map_err(|e| PipelineError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers see either the old or the new content.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| PipelineError::io(dir, e))?;
    tmp.write_all(bytes)
        .map_err(|e| PipelineError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| PipelineError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| PipelineError::io(path, e.error))?;
    Ok(())
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("documents serialize");
    bytes.push(b'\n');
    bytes
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &to_json_bytes(value))
}

pub fn write_jsonl<T: Serialize>(path: &Path, values: &[T]) -> Result<()> {
    let mut bytes = Vec::new();
    for v in values {
        serde_json::to_writer(&mut bytes, v).expect("records serialize");
        bytes.push(b'\n');
    }
    write_atomic(path, &bytes)
}

/// Candidates grouped by frame, frames ascending, file order kept within a
/// frame.
pub fn load_detections(path: &Path) -> Result<Vec<FrameDetections>> {
    let text = read(path)?;
    let mut frames: BTreeMap<usize, Vec<PoseCandidate>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| PipelineError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let record: DetectionRecord =
            serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        let candidate = record.to_candidate().map_err(parse_err)?;
        frames.entry(candidate.frame).or_default().push(candidate);
    }
    Ok(frames
        .into_iter()
        .map(|(frame, candidates)| FrameDetections::new(frame, candidates))
        .collect())
}

pub fn save_detections(path: &Path, frames: &[FrameDetections]) -> Result<()> {
    let records: Vec<DetectionRecord> = frames
        .iter()
        .flat_map(|f| f.candidates.iter().map(DetectionRecord::from_candidate))
        .collect();
    write_jsonl(path, &records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shot {
    pub start_frame: usize,
    pub end_frame: usize,
}

/// Shots must be non-empty, sorted and disjoint.
pub fn load_shots(path: &Path) -> Result<Vec<Shot>> {
    let shots: Vec<Shot> = read_json(path)?;
    for s in &shots {
        if s.start_frame > s.end_frame {
            return Err(PipelineError::invalid(
                path,
                format!(
                    "shot {}..={} ends before it starts",
                    s.start_frame, s.end_frame
                ),
            ));
        }
    }
    for w in shots.windows(2) {
        if w[1].start_frame <= w[0].end_frame {
            return Err(PipelineError::invalid(
                path,
                format!(
                    "shots are not sorted and disjoint: {}..={} then {}..={}",
                    w[0].start_frame, w[0].end_frame, w[1].start_frame, w[1].end_frame
                ),
            ));
        }
    }
    Ok(shots)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRecord {
    pub start_frame: usize,
    pub end_frame: usize,
    pub movement: Movement,
    pub dancer_id: String,
    pub sequence_id: String,
    pub battle_order: u32,
    #[serde(default, rename = "override")]
    pub wrong_dancer: bool,
}

impl SegmentRecord {
    pub fn segment(&self) -> Segment {
        Segment {
            start_frame: self.start_frame,
            end_frame: self.end_frame,
            movement: self.movement,
            dancer_id: self.dancer_id.clone(),
            sequence_id: self.sequence_id.clone(),
            battle_order: self.battle_order,
        }
    }

    /// Output file stem for this segment.
    pub fn segment_id(&self) -> String {
        format!("{}_{}", self.sequence_id, self.start_frame)
    }

    pub fn override_segment(&self) -> Option<OverrideSegment> {
        self.wrong_dancer
            .then(|| OverrideSegment::auto(self.start_frame, self.end_frame))
    }
}

/// Segments sorted by start frame; they may not overlap anywhere in the
/// video, since one video shows one dancer at a time.
pub fn load_segments(path: &Path) -> Result<Vec<SegmentRecord>> {
    let mut segs: Vec<SegmentRecord> = read_json(path)?;
    for s in &segs {
        s.segment()
            .validate()
            .map_err(|e| PipelineError::invalid(path, e.to_string()))?;
    }
    segs.sort_by_key(|s| (s.start_frame, s.end_frame));
    for w in segs.windows(2) {
        if w[1].start_frame <= w[0].end_frame {
            return Err(PipelineError::invalid(
                path,
                format!(
                    "segments overlap: {} {}..={} and {} {}..={}",
                    w[0].sequence_id,
                    w[0].start_frame,
                    w[0].end_frame,
                    w[1].sequence_id,
                    w[1].start_frame,
                    w[1].end_frame
                ),
            ));
        }
    }
    Ok(segs)
}

/// Music beats; a missing file yields an empty track.
pub fn load_beats(path: &Path) -> Result<BeatTrack> {
    if !path.exists() {
        log::warn!(
            "{} not found; music beat metrics will be skipped",
            path.display()
        );
        return Ok(BeatTrack::empty());
    }
    read_json(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaRecord {
    pub fps: f64,
    pub frame_width: u32,
    pub frame_height: u32,
}

pub fn load_meta(path: &Path, video_id: &str) -> Result<VideoMeta> {
    let m: MetaRecord = read_json(path)?;
    VideoMeta::new(video_id, m.fps, m.frame_width, m.frame_height)
        .map_err(|e| PipelineError::invalid(path, e.to_string()))
}

/// A manual annotation, as dropped in `manual/<frame>.json` or posted to the
/// annotation service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManualRecord {
    pub video_id: String,
    pub frame: usize,
    pub keypoints: Vec<[f64; 2]>,
}

/// Manual annotations keyed by frame. A missing directory is empty.
pub fn load_manual(dir: &Path, video_id: &str) -> Result<BTreeMap<usize, ManualRecord>> {
    let mut out = BTreeMap::new();
    if !dir.exists() {
        return Ok(out);
    }
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| PipelineError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    for p in paths {
        let r: ManualRecord = read_json(&p)?;
        if r.video_id != video_id {
            return Err(PipelineError::invalid(
                &p,
                format!("annotation for video {} found under {video_id}", r.video_id),
            ));
        }
        validate_keypoints(&r.keypoints).map_err(|e| PipelineError::invalid(&p, e.to_string()))?;
        if let Some(prev) = out.insert(r.frame, r) {
            return Err(PipelineError::invalid(
                &p,
                format!("duplicate annotation for frame {}", prev.frame),
            ));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub entries: Vec<LabelManifestEntry>,
}

/// A missing manifest is empty.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    if !path.exists() {
        return Ok(Manifest::default());
    }
    let m: Manifest = read_json(path)?;
    for e in &m.entries {
        if let Some(k) = &e.keypoints {
            validate_keypoints(k)
                .map_err(|err| PipelineError::invalid(path, format!("frame {}: {err}", e.frame)))?;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub track_id: usize,
    pub entries: Vec<DetectionRecord>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TracksDoc {
    pub tracks: Vec<TrackRecord>,
}

impl TracksDoc {
    pub fn from_tracks(tracks: &[Track]) -> Self {
        Self {
            tracks: tracks
                .iter()
                .map(|t| TrackRecord {
                    track_id: t.track_id,
                    entries: t
                        .entries
                        .iter()
                        .map(DetectionRecord::from_candidate)
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_tracks(&self, path: &Path) -> Result<Vec<Track>> {
        self.tracks
            .iter()
            .map(|t| {
                let entries = t
                    .entries
                    .iter()
                    .map(|r| {
                        r.to_candidate()
                            .map_err(|m| PipelineError::invalid(path, m))
                    })
                    .collect::<Result<_>>()?;
                Ok(Track {
                    track_id: t.track_id,
                    entries,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub frame: usize,
    pub track_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionDoc {
    pub frames: Vec<SelectionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFileFrame {
    pub frame: usize,
    pub keypoints: Option<Vec<[f64; 2]>>,
    pub provenance: Provenance,
    pub labelling_score: Option<f64>,
}

/// A finished keypoint sequence for one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFile {
    pub video_id: String,
    pub segment_id: String,
    pub fps: f64,
    pub frames: Vec<SequenceFileFrame>,
}

impl SequenceFile {
    pub fn new(video_id: &str, segment_id: &str, fps: f64, seq: &KeypointSequence) -> Self {
        Self {
            video_id: video_id.into(),
            segment_id: segment_id.into(),
            fps,
            frames: seq
                .frames()
                .iter()
                .map(|f| SequenceFileFrame {
                    frame: f.frame,
                    keypoints: f.pose.map(|p| p.coords().to_vec()),
                    provenance: f.provenance,
                    labelling_score: f.labelling_score,
                })
                .collect(),
        }
    }

    /// Rebuilds the sequence. Keypoint scores are not stored, so poses carry
    /// score 1.
    pub fn to_sequence(&self, path: &Path) -> Result<KeypointSequence> {
        let frames = self
            .frames
            .iter()
            .map(|f| {
                let pose = match &f.keypoints {
                    Some(k) => {
                        let coords: &[[f64; 2]; NUM_JOINTS] =
                            k.as_slice().try_into().map_err(|_| {
                                PipelineError::invalid(
                                    path,
                                    format!(
                                        "frame {}: expected {NUM_JOINTS} keypoints, found {}",
                                        f.frame,
                                        k.len()
                                    ),
                                )
                            })?;
                        Some(
                            Pose::from_coords(coords)
                                .map_err(|e| PipelineError::invalid(path, e.to_string()))?,
                        )
                    }
                    None => None,
                };
                Ok(SequenceFrame {
                    frame: f.frame,
                    pose,
                    provenance: f.provenance,
                    labelling_score: f.labelling_score,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KeypointSequence::new(frames))
    }
}
