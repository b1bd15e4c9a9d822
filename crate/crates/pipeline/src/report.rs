//! Dataset-level metrics and statistics over refined sequences.

use std::collections::BTreeMap;

use groundwork_core::metrics::{
    beat_alignment_score, beat_dtw_cost, element_distribution, kinematic_beats, movement_diversity,
    pose_diversity, pose_fid, sequence_mae, BeatTrack, Clip, ElementDistribution, VideoMeta,
};
use groundwork_core::selector::LabelStatus;
use groundwork_core::sequence::{Cuts, KeypointSequence, Provenance, SequenceFrame};
use groundwork_core::Pose;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};
use crate::formats::{
    load_beats, load_manifest, load_meta, load_segments, load_shots, read_json, SegmentRecord,
    SequenceFile,
};
use crate::stages::{load_statuses, shot_cuts, StatusesDoc};
use crate::workspace::VideoDir;

/// Everything the metrics need from one refined video.
#[derive(Debug, Clone)]
pub struct VideoData {
    pub id: String,
    pub meta: VideoMeta,
    pub cuts: Cuts,
    pub music: BeatTrack,
    pub sequences: Vec<(SegmentRecord, KeypointSequence)>,
    pub ground_truth: Option<KeypointSequence>,
    pub statuses: StatusesDoc,
    pub manual_labels: usize,
}

impl VideoData {
    pub fn load(video: &VideoDir) -> Result<Self> {
        if !video.refine_report().exists() {
            return Err(PipelineError::MissingStage {
                stage: "refine",
                video: video.id.clone(),
            });
        }
        let meta = load_meta(&video.meta(), &video.id)?;
        let shots = load_shots(&video.shots())?;
        let segments = load_segments(&video.segments())?;
        let mut sequences = Vec::with_capacity(segments.len());
        for s in segments {
            let path = video.sequence(&s.segment_id());
            if !path.exists() {
                return Err(PipelineError::MissingStage {
                    stage: "refine",
                    video: video.id.clone(),
                });
            }
            let seq = read_json::<SequenceFile>(&path)?.to_sequence(&path)?;
            sequences.push((s, seq));
        }
        let gt_path = video.ground_truth();
        let ground_truth = if gt_path.exists() {
            Some(read_json::<SequenceFile>(&gt_path)?.to_sequence(&gt_path)?)
        } else {
            None
        };
        let manual_labels = load_manifest(&video.manifest())?
            .entries
            .iter()
            .filter(|e| e.status == LabelStatus::Done)
            .count();
        Ok(Self {
            id: video.id.clone(),
            meta,
            cuts: shot_cuts(&shots),
            music: load_beats(&video.beats())?,
            sequences,
            ground_truth,
            statuses: load_statuses(video)?,
            manual_labels,
        })
    }

    fn clips(&self) -> impl Iterator<Item = Clip<'_>> {
        self.sequences.iter().map(|(_, seq)| Clip {
            sequence: seq,
            meta: &self.meta,
            cuts: &self.cuts,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub videos: Vec<String>,
    pub sequences: usize,
    pub movement: Option<f64>,
    pub pose_diversity: Option<f64>,
    pub pose_fid: Option<f64>,
    pub beat_alignment: Option<f64>,
    pub beat_dtw_raw: Option<f64>,
    pub beat_dtw_normalized: Option<f64>,
    pub mae: Option<f64>,
    pub element_distribution: Option<ElementDistribution>,
}

fn warn_none<T>(what: &str, r: groundwork_core::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("{what} not reported: {e}");
            None
        }
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn poses(seq: &KeypointSequence) -> impl Iterator<Item = Pose> + '_ {
    seq.frames().iter().filter_map(|f| f.pose)
}

/// Output and ground truth restricted to the frames both have a pose for.
fn comparable(
    out: &KeypointSequence,
    gt: &KeypointSequence,
) -> (KeypointSequence, KeypointSequence) {
    let (a, b): (Vec<SequenceFrame>, Vec<SequenceFrame>) = out
        .frames()
        .iter()
        .filter(|f| f.pose.is_some())
        .filter_map(|f| {
            gt.get(f.frame)
                .filter(|g| g.pose.is_some())
                .map(|g| (f.clone(), g.clone()))
        })
        .unzip();
    (KeypointSequence::new(a), KeypointSequence::new(b))
}

/// Metrics pooled over every sequence of the given videos.
///
/// FID compares even-indexed against odd-indexed sequences. Beat metrics are
/// averaged over segments that have both kinematic and music beats; music
/// beats are taken from the segment's time span. MAE is pooled over frames
/// where both output and ground truth have a pose.
pub fn compute_metrics(videos: &[VideoData], cfg: &PipelineConfig) -> MetricsReport {
    let clips: Vec<Clip<'_>> = videos.iter().flat_map(VideoData::clips).collect();
    let movement = warn_none("movement", movement_diversity(&clips)).map(|m| m.overall);
    let pose_div = warn_none("pose_diversity", pose_diversity(&clips)).map(|p| p.overall);

    let all: Vec<&KeypointSequence> = videos
        .iter()
        .flat_map(|v| v.sequences.iter().map(|(_, s)| s))
        .collect();
    let split = |parity: usize| -> Vec<Pose> {
        all.iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == parity)
            .flat_map(|(_, s)| poses(s))
            .collect()
    };
    let fid = warn_none("pose_fid", pose_fid(&split(0), &split(1)));

    let (mut bas, mut dtw_raw, mut dtw_norm) = (Vec::new(), Vec::new(), Vec::new());
    for v in videos {
        if v.music.is_empty() {
            continue;
        }
        for (seg, seq) in &v.sequences {
            let Ok(kin) = kinematic_beats(seq, &v.meta, cfg.beats.prominence_k) else {
                continue;
            };
            let music = v.music.within(
                seg.start_frame as f64 / v.meta.fps,
                seg.end_frame as f64 / v.meta.fps,
            );
            if kin.is_empty() || music.is_empty() {
                continue;
            }
            if let Ok(s) = beat_alignment_score(&kin, &music, cfg.beats.sigma) {
                bas.push(s);
            }
            if let Ok(d) = beat_dtw_cost(&kin, &music) {
                dtw_raw.push(d.raw);
                dtw_norm.push(d.normalized);
            }
        }
    }

    let (mut mae_total, mut mae_frames) = (0.0, 0usize);
    for v in videos {
        let Some(gt) = &v.ground_truth else { continue };
        for (_, seq) in &v.sequences {
            let (a, b) = comparable(seq, gt);
            if let Ok(m) = sequence_mae(&a, &b) {
                mae_total += m * a.len() as f64;
                mae_frames += a.len();
            }
        }
    }

    let segments: Vec<_> = videos
        .iter()
        .flat_map(|v| {
            v.sequences.iter().map(move |(s, _)| {
                let mut seg = s.segment();
                seg.sequence_id = format!("{}/{}", v.id, seg.sequence_id);
                seg
            })
        })
        .collect();

    MetricsReport {
        videos: videos.iter().map(|v| v.id.clone()).collect(),
        sequences: all.len(),
        movement,
        pose_diversity: pose_div,
        pose_fid: fid,
        beat_alignment: mean(&bas),
        beat_dtw_raw: mean(&dtw_raw),
        beat_dtw_normalized: mean(&dtw_norm),
        mae: (mae_frames > 0).then(|| mae_total / mae_frames as f64),
        element_distribution: warn_none("element_distribution", element_distribution(&segments)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub videos: Vec<String>,
    pub sequences: usize,
    pub frames: usize,
    pub provenance: BTreeMap<Provenance, usize>,
    /// Frames whose automatic pose was below the labelling threshold.
    pub low_score_frames: usize,
    /// Of those, the frames sent to annotation after the discount.
    pub labelled_low_score_frames: usize,
    /// `labelled_low_score_frames / low_score_frames`.
    pub discount_ratio: Option<f64>,
    pub outlier_frames: usize,
    pub manual_labels: usize,
    pub movement: Option<f64>,
    pub pose_diversity: Option<[f64; 2]>,
    pub element_distribution: Option<ElementDistribution>,
}

pub fn compute_stats(videos: &[VideoData]) -> StatsReport {
    let mut provenance = BTreeMap::new();
    let mut frames = 0;
    for v in videos {
        for (_, seq) in &v.sequences {
            for f in seq.frames() {
                *provenance.entry(f.provenance).or_insert(0) += 1;
                frames += 1;
            }
        }
    }
    let low: usize = videos.iter().map(|v| v.statuses.low_score.len()).sum();
    let labelled: usize = videos
        .iter()
        .map(|v| v.statuses.labelled_low_score.len())
        .sum();
    let clips: Vec<Clip<'_>> = videos.iter().flat_map(VideoData::clips).collect();
    let segments: Vec<_> = videos
        .iter()
        .flat_map(|v| {
            v.sequences.iter().map(move |(s, _)| {
                let mut seg = s.segment();
                seg.sequence_id = format!("{}/{}", v.id, seg.sequence_id);
                seg
            })
        })
        .collect();
    StatsReport {
        videos: videos.iter().map(|v| v.id.clone()).collect(),
        sequences: clips.len(),
        frames,
        provenance,
        low_score_frames: low,
        labelled_low_score_frames: labelled,
        discount_ratio: (low > 0).then(|| labelled as f64 / low as f64),
        outlier_frames: videos.iter().map(|v| v.statuses.outliers.len()).sum(),
        manual_labels: videos.iter().map(|v| v.manual_labels).sum(),
        movement: warn_none("movement", movement_diversity(&clips)).map(|m| m.overall),
        pose_diversity: warn_none("pose_diversity", pose_diversity(&clips)).map(|p| p.per_axis),
        element_distribution: warn_none("element_distribution", element_distribution(&segments)),
    }
}
