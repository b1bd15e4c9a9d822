//! The per-video processing stages: filter, track, select and refine.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::ops::RangeInclusive;

use groundwork_core::filter::filter_frame;
use groundwork_core::refine::{detect_outliers, interpolate_sequence};
use groundwork_core::selector::{
    apply_discount, mark_missing, merge_manual, FrameStatus, LabelManifestEntry, LabelReason,
    LabelStatus, StatusMap,
};
use groundwork_core::sequence::{Cuts, SequenceFrame};
use groundwork_core::tracker::{
    apply_overrides, build_tracks, select_active_dancer, ActiveSelection, Choice, OverrideSegment,
    Track,
};
use groundwork_core::{Error as CoreError, KeypointSequence};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};
use crate::formats::{
    load_detections, load_manifest, load_manual, load_meta, load_segments, load_shots, read_json,
    save_detections, write_json, Manifest, SegmentRecord, SelectionDoc, SelectionRecord,
    SequenceFile, Shot, TracksDoc,
};
use crate::workspace::VideoDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Filter,
    Track,
    Select,
    Refine,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Filter, Stage::Track, Stage::Select, Stage::Refine];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Filter => "filter",
            Stage::Track => "track",
            Stage::Select => "select",
            Stage::Refine => "refine",
        }
    }

    pub fn run(self, video: &VideoDir, cfg: &PipelineConfig) -> Result<()> {
        match self {
            Stage::Filter => run_filter(video, cfg),
            Stage::Track => run_track(video, cfg),
            Stage::Select => run_select(video, cfg).map(|_| ()),
            Stage::Refine => run_refine(video, cfg).map(|_| ()),
        }
    }
}

fn require(video: &VideoDir, path: &std::path::Path, stage: &'static str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::MissingStage {
            stage,
            video: video.id.clone(),
        })
    }
}

/// Drops weak and duplicate candidates frame by frame.
pub fn run_filter(video: &VideoDir, cfg: &PipelineConfig) -> Result<()> {
    let frames = load_detections(&video.detections())?;
    let filtered: Vec<_> = frames
        .iter()
        .map(|f| filter_frame(f, &cfg.filter))
        .filter(|f| !f.candidates.is_empty())
        .collect();
    log::info!(
        "{}: kept {} of {} candidates",
        video.id,
        filtered.iter().map(|f| f.candidates.len()).sum::<usize>(),
        frames.iter().map(|f| f.candidates.len()).sum::<usize>()
    );
    save_detections(&video.filtered(), &filtered)
}

/// Links candidates into tracks and picks the active dancer per frame,
/// honouring wrong-dancer overrides from the segment file.
pub fn run_track(video: &VideoDir, cfg: &PipelineConfig) -> Result<()> {
    require(video, &video.filtered(), "filter")?;
    let frames = load_detections(&video.filtered())?;
    let segments = load_segments(&video.segments())?;
    let tracks = build_tracks(&frames, &cfg.tracker);
    let selection = match select_active_dancer(&tracks) {
        Ok(s) => s,
        Err(CoreError::NoTracks) => ActiveSelection::default(),
        Err(e) => return Err(e.into()),
    };
    let overrides: Vec<OverrideSegment> = segments
        .iter()
        .filter_map(SegmentRecord::override_segment)
        .collect();
    let selection = apply_overrides(&selection, &overrides, &tracks)?;
    log::info!("{}: {} tracks", video.id, tracks.len());

    write_json(&video.tracks(), &TracksDoc::from_tracks(&tracks))?;
    let doc = SelectionDoc {
        frames: selection
            .choices
            .iter()
            .map(|(&frame, c)| SelectionRecord {
                frame,
                track_id: c.as_ref().map(|c| c.track_id),
            })
            .collect(),
    };
    write_json(&video.selection(), &doc)
}

/// Tracks and the active-dancer selection written by the track stage.
pub fn load_selection(video: &VideoDir) -> Result<(Vec<Track>, ActiveSelection)> {
    require(video, &video.tracks(), "track")?;
    require(video, &video.selection(), "track")?;
    let tracks_path = video.tracks();
    let tracks = read_json::<TracksDoc>(&tracks_path)?.to_tracks(&tracks_path)?;
    let by_id: BTreeMap<usize, &Track> = tracks.iter().map(|t| (t.track_id, t)).collect();
    let doc: SelectionDoc = read_json(&video.selection())?;
    let mut choices = BTreeMap::new();
    for r in doc.frames {
        let choice = match r.track_id {
            None => None,
            Some(id) => {
                let candidate = by_id.get(&id).and_then(|t| t.at(r.frame)).ok_or_else(|| {
                    PipelineError::invalid(
                        &video.selection(),
                        format!(
                            "frame {} selects track {id}, which has no entry there",
                            r.frame
                        ),
                    )
                })?;
                Some(Choice {
                    track_id: id,
                    candidate: candidate.clone(),
                })
            }
        };
        choices.insert(r.frame, choice);
    }
    Ok((tracks, ActiveSelection { choices }))
}

/// One independently processed span: a segment clipped to one shot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub segment_id: String,
    pub start_frame: usize,
    pub end_frame: usize,
}

impl Region {
    pub fn range(&self) -> RangeInclusive<usize> {
        self.start_frame..=self.end_frame
    }
}

pub fn shot_cuts(shots: &[Shot]) -> Cuts {
    let spans: Vec<RangeInclusive<usize>> =
        shots.iter().map(|s| s.start_frame..=s.end_frame).collect();
    Cuts::from_spans(&spans)
}

pub fn regions(segments: &[SegmentRecord], shots: &[Shot]) -> Vec<Region> {
    let cuts = shot_cuts(shots);
    segments
        .iter()
        .flat_map(|s| {
            let id = s.segment_id();
            cuts.split(s.start_frame..=s.end_frame)
                .into_iter()
                .map(move |r| Region {
                    segment_id: id.clone(),
                    start_frame: *r.start(),
                    end_frame: *r.end(),
                })
        })
        .collect()
}

fn restrict(statuses: &StatusMap, range: RangeInclusive<usize>) -> StatusMap {
    statuses.range(range).map(|(&f, &s)| (f, s)).collect()
}

/// Frame statuses and bookkeeping written by the select stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusesDoc {
    /// Set once outlier detection ran on a fully labelled manifest.
    pub outliers_checked: bool,
    pub regions: Vec<Region>,
    pub statuses: BTreeMap<usize, FrameStatus>,
    /// Frames whose selected pose fell below the labelling threshold.
    pub low_score: Vec<usize>,
    /// Low-score frames the discount sent to annotation.
    pub labelled_low_score: Vec<usize>,
    pub outliers: Vec<usize>,
}

fn done_entry(
    video: &VideoDir,
    frame: usize,
    reason: LabelReason,
    keypoints: &[[f64; 2]],
) -> Result<LabelManifestEntry> {
    let mut e = LabelManifestEntry::pending(&video.id, frame, reason);
    e.complete(keypoints.to_vec())
        .map_err(|err| PipelineError::invalid(&video.manual_file(frame), err.to_string()))?;
    Ok(e)
}

/// Marks low-score frames, applies the labelling discount, folds in manual
/// annotations and, once nothing is pending, checks for outliers.
pub fn run_select(video: &VideoDir, cfg: &PipelineConfig) -> Result<StatusesDoc> {
    video.ensure_unlocked()?;
    let segments = load_segments(&video.segments())?;
    let shots = load_shots(&video.shots())?;
    let (_, selection) = load_selection(video)?;
    let manual = load_manual(&video.manual_dir(), &video.id)?;
    let old = load_manifest(&video.manifest())?;
    let done_old: BTreeMap<usize, LabelManifestEntry> = old
        .entries
        .into_iter()
        .filter(|e| e.status == LabelStatus::Done)
        .map(|e| (e.frame, e))
        .collect();

    let regions = regions(&segments, &shots);
    let mut statuses = StatusMap::new();
    let mut low_score = Vec::new();
    for r in &regions {
        let marked = mark_missing(&selection.restrict(r.range()), &cfg.selector);
        low_score.extend(
            marked
                .iter()
                .filter(|(_, s)| **s == FrameStatus::Missing)
                .map(|(&f, _)| f),
        );
        statuses.extend(apply_discount(&marked, &cfg.selector));
    }
    let labelled_low_score: Vec<usize> = statuses
        .iter()
        .filter(|(_, s)| **s == FrameStatus::MustLabel)
        .map(|(&f, _)| f)
        .collect();

    let mut entries: BTreeMap<usize, LabelManifestEntry> = BTreeMap::new();
    let request = |frame: usize,
                   reason: LabelReason,
                   statuses: &mut StatusMap,
                   entries: &mut BTreeMap<usize, LabelManifestEntry>|
     -> Result<()> {
        let entry = match (done_old.get(&frame), manual.get(&frame)) {
            (Some(e), _) => e.clone(),
            (None, Some(m)) => done_entry(video, frame, reason, &m.keypoints)?,
            (None, None) => LabelManifestEntry::pending(&video.id, frame, reason),
        };
        if entry.status == LabelStatus::Done {
            statuses.insert(frame, FrameStatus::Manual);
        }
        entries.insert(frame, entry);
        Ok(())
    };
    for &f in &labelled_low_score {
        request(f, LabelReason::LowScore, &mut statuses, &mut entries)?;
    }
    // Earlier human labels stay in use even where no longer requested.
    for (f, e) in &done_old {
        if statuses.contains_key(f) && !entries.contains_key(f) {
            statuses.insert(*f, FrameStatus::Manual);
            entries.insert(*f, e.clone());
        }
    }

    let pending = entries.values().any(|e| e.status == LabelStatus::Pending);
    if !pending {
        let merged: Vec<LabelManifestEntry> = entries.values().cloned().collect();
        let mut flagged = Vec::new();
        for r in &regions {
            let seq = merge_manual(
                &selection.restrict(r.range()),
                &restrict(&statuses, r.range()),
                &merged,
            )?;
            flagged.extend(detect_outliers(&seq, &Cuts::none(), &cfg.outlier));
        }
        for f in flagged {
            statuses.insert(f, FrameStatus::MustLabel);
            request(f, LabelReason::Outlier, &mut statuses, &mut entries)?;
        }
    }
    // Includes outliers flagged by earlier runs and labelled since.
    let outliers: Vec<usize> = entries
        .values()
        .filter(|e| e.reason == LabelReason::Outlier)
        .map(|e| e.frame)
        .collect();

    let manifest = Manifest {
        entries: entries.into_values().collect(),
    };
    let n_pending = manifest
        .entries
        .iter()
        .filter(|e| e.status == LabelStatus::Pending)
        .count();
    log::info!(
        "{}: {} low-score frames, {} sent to annotation, {} outliers, {} pending",
        video.id,
        low_score.len(),
        labelled_low_score.len(),
        outliers.len(),
        n_pending
    );
    write_json(&video.manifest(), &manifest)?;
    let doc = StatusesDoc {
        outliers_checked: !pending,
        regions,
        statuses,
        low_score,
        labelled_low_score,
        outliers,
    };
    write_json(&video.statuses(), &doc)?;
    Ok(doc)
}

pub fn load_statuses(video: &VideoDir) -> Result<StatusesDoc> {
    require(video, &video.statuses(), "select")?;
    read_json(&video.statuses())
}

/// Bookkeeping written by the refine stage.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RefineReport {
    /// Regions with fewer than two posed frames, written through unchanged.
    pub sparse_regions: Vec<Region>,
    /// Frames no fitting window reached.
    pub unfilled_frames: Vec<usize>,
}

/// Merges manual annotations and interpolates every region, writing one
/// sequence file per segment.
pub fn run_refine(video: &VideoDir, cfg: &PipelineConfig) -> Result<RefineReport> {
    video.ensure_unlocked()?;
    let doc = load_statuses(video)?;
    let manifest = load_manifest(&video.manifest())?;
    let pending: Vec<usize> = manifest
        .entries
        .iter()
        .filter(|e| e.status == LabelStatus::Pending)
        .map(|e| e.frame)
        .collect();
    if !pending.is_empty() {
        return Err(CoreError::PendingFrames(pending).into());
    }
    if !doc.outliers_checked {
        return Err(PipelineError::MissingStage {
            stage: "select (outlier check on the completed manifest)",
            video: video.id.clone(),
        });
    }
    let meta = load_meta(&video.meta(), &video.id)?;
    let (_, selection) = load_selection(video)?;

    let mut report = RefineReport::default();
    let mut per_segment: BTreeMap<String, Vec<SequenceFrame>> = BTreeMap::new();
    for r in &doc.regions {
        let seq = merge_manual(
            &selection.restrict(r.range()),
            &restrict(&doc.statuses, r.range()),
            &manifest.entries,
        )?;
        let frames = match interpolate_sequence(&seq, &Cuts::none(), &cfg.bezier) {
            Ok(out) => {
                report.unfilled_frames.extend(
                    out.unfilled
                        .iter()
                        .map(|(f, _)| *f)
                        .collect::<BTreeSet<_>>(),
                );
                out.sequence.into_frames()
            }
            Err(CoreError::SparseRegion { .. }) => {
                log::warn!(
                    "{}: region {}..={} has fewer than two poses; left uninterpolated",
                    video.id,
                    r.start_frame,
                    r.end_frame
                );
                report.sparse_regions.push(r.clone());
                seq.into_frames()
            }
            Err(e) => return Err(e.into()),
        };
        per_segment
            .entry(r.segment_id.clone())
            .or_default()
            .extend(frames);
    }

    let dir = video.sequences_dir();
    if dir.exists() {
        for e in fs::read_dir(&dir)
            .map_err(|e| PipelineError::io(&dir, e))?
            .flatten()
        {
            let stem = e
                .path()
                .file_stem()
                .and_then(|s| s.to_str())
                .map(str::to_owned);
            if stem.is_some_and(|s| !per_segment.contains_key(&s)) {
                fs::remove_file(e.path()).map_err(|err| PipelineError::io(&e.path(), err))?;
            }
        }
    }
    for (id, frames) in per_segment {
        let seq = KeypointSequence::new(frames);
        write_json(
            &video.sequence(&id),
            &SequenceFile::new(&video.id, &id, meta.fps, &seq),
        )?;
    }
    write_json(&video.refine_report(), &report)?;
    Ok(report)
}
