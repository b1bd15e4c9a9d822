//! Box-only person tracking and active dancer selection.
//!
//! Tracks are grown greedily forward in time. A track whose last box sits at
//! frame `t` links to the best-overlapping candidate at the first frame in
//! `t + 1 ..= t + lookahead` that has any candidate overlapping it above
//! `link_iou`. The active dancer at each frame is the covering track whose
//! box area changes the most on average.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::FrameDetections;
use crate::pose::{iou, PoseCandidate};

pub type TrackId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub link_iou: f64,
    pub lookahead: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            link_iou: 0.4,
            lookahead: 10,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.link_iou) {
            return Err(Error::InvalidConfig(format!(
                "link_iou {} outside [0, 1]",
                self.link_iou
            )));
        }
        if self.lookahead == 0 {
            return Err(Error::InvalidConfig("lookahead must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub track_id: TrackId,
    /// Time-ordered; each candidate carries its own frame index.
    pub entries: Vec<PoseCandidate>,
}

impl Track {
    pub fn first_frame(&self) -> Option<usize> {
        self.entries.first().map(|c| c.frame)
    }

    pub fn last_frame(&self) -> Option<usize> {
        self.entries.last().map(|c| c.frame)
    }

    pub fn at(&self, frame: usize) -> Option<&PoseCandidate> {
        self.entries
            .binary_search_by_key(&frame, |c| c.frame)
            .ok()
            .map(|i| &self.entries[i])
    }

    fn within<'a>(
        &'a self,
        span: &'a RangeInclusive<usize>,
    ) -> impl Iterator<Item = &'a PoseCandidate> + 'a {
        self.entries.iter().filter(move |c| span.contains(&c.frame))
    }
}

/// Links filtered detections into tracks. Track ids follow creation order.
pub fn build_tracks(frames: &[FrameDetections], cfg: &TrackerConfig) -> Vec<Track> {
    let mut tracks: Vec<Track> = Vec::new();
    // Indices into `tracks` still accepting links.
    let mut open: Vec<usize> = Vec::new();

    let mut sorted: Vec<&FrameDetections> = frames.iter().collect();
    sorted.sort_by_key(|f| f.frame);

    for det in sorted {
        let f = det.frame;
        open.retain(|&t| {
            let last = tracks[t].last_frame().unwrap_or(0);
            f <= last + cfg.lookahead
        });

        // Candidate (track, detection) pairs above the link threshold, best first.
        let mut pairs: Vec<(f64, f64, usize, usize)> = Vec::new();
        for &t in &open {
            let Some(last) = tracks[t].entries.last() else {
                continue;
            };
            if last.frame >= f {
                continue;
            }
            for (ci, c) in det.candidates.iter().enumerate() {
                let v = iou(&last.bbox, &c.bbox);
                if v > cfg.link_iou {
                    pairs.push((v, c.box_score, t, ci));
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(b.1.total_cmp(&a.1))
                .then(tracks[b.2].last_frame().cmp(&tracks[a.2].last_frame()))
                .then(a.2.cmp(&b.2))
                .then(a.3.cmp(&b.3))
        });

        let mut track_used = vec![false; tracks.len()];
        let mut cand_used = vec![false; det.candidates.len()];
        for (_, _, t, ci) in pairs {
            if track_used[t] || cand_used[ci] {
                continue;
            }
            track_used[t] = true;
            cand_used[ci] = true;
            tracks[t].entries.push(det.candidates[ci].clone());
        }

        for (ci, c) in det.candidates.iter().enumerate() {
            if cand_used[ci] {
                continue;
            }
            let id = tracks.len();
            tracks.push(Track {
                track_id: id,
                entries: vec![c.clone()],
            });
            open.push(id);
        }
    }
    tracks
}

fn mean_area_change<'a>(entries: impl Iterator<Item = &'a PoseCandidate>) -> f64 {
    let areas: Vec<f64> = entries.map(|c| c.bbox.area()).collect();
    if areas.len() < 2 {
        return 0.0;
    }
    let total: f64 = areas.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    total / (areas.len() - 1) as f64
}

/// Mean absolute change in box area over consecutive entries; 0 for tracks
/// with fewer than two entries.
pub fn track_movement_score(track: &Track) -> f64 {
    mean_area_change(track.entries.iter())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub track_id: TrackId,
    pub candidate: PoseCandidate,
}

/// Per-frame active dancer choice; `None` where no track covers the frame.
///
/// Frames absent from the map are treated as `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActiveSelection {
    pub choices: BTreeMap<usize, Option<Choice>>,
}

impl ActiveSelection {
    pub fn get(&self, frame: usize) -> Option<&Choice> {
        self.choices.get(&frame).and_then(|c| c.as_ref())
    }

    /// The selection over exactly `range`, filling absent frames with `None`.
    pub fn restrict(&self, range: RangeInclusive<usize>) -> ActiveSelection {
        let choices = range.map(|f| (f, self.get(f).cloned())).collect();
        ActiveSelection { choices }
    }

    pub fn frames(&self) -> impl Iterator<Item = usize> + '_ {
        self.choices.keys().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    /// Exclude whichever tracks were selected inside the span.
    Auto,
    Track(TrackId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverrideSegment {
    pub start_frame: usize,
    pub end_frame: usize,
    pub excluded_track: Exclusion,
}

impl OverrideSegment {
    pub fn auto(start_frame: usize, end_frame: usize) -> Self {
        Self {
            start_frame,
            end_frame,
            excluded_track: Exclusion::Auto,
        }
    }

    fn span(&self) -> RangeInclusive<usize> {
        self.start_frame..=self.end_frame
    }
}

/// Picks the best track with an entry at `frame`: highest score, then more
/// entries, then lowest id.
fn best_at<'a>(
    ranked: &'a [(f64, usize, &'a Track)],
    frame: usize,
) -> Option<(TrackId, &'a PoseCandidate)> {
    ranked
        .iter()
        .find_map(|(_, _, t)| t.at(frame).map(|c| (t.track_id, c)))
}

fn rank(mut scored: Vec<(f64, usize, &Track)>) -> Vec<(f64, usize, &Track)> {
    scored.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(a.2.track_id.cmp(&b.2.track_id))
    });
    scored
}

/// Chooses, at every frame between the first and last tracked frame, the
/// highest-movement track that has an entry there.
pub fn select_active_dancer(tracks: &[Track]) -> Result<ActiveSelection> {
    let lo = tracks.iter().filter_map(Track::first_frame).min();
    let hi = tracks.iter().filter_map(Track::last_frame).max();
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::NoTracks);
    };
    let ranked = rank(
        tracks
            .iter()
            .filter(|t| !t.entries.is_empty())
            .map(|t| (track_movement_score(t), t.entries.len(), t))
            .collect(),
    );
    let choices = (lo..=hi)
        .map(|f| {
            let choice = best_at(&ranked, f).map(|(track_id, c)| Choice {
                track_id,
                candidate: c.clone(),
            });
            (f, choice)
        })
        .collect();
    Ok(ActiveSelection { choices })
}

/// Replaces the selection inside each override span with the best track not
/// excluded there, ranked by movement restricted to the span.
pub fn apply_overrides(
    selection: &ActiveSelection,
    overrides: &[OverrideSegment],
    tracks: &[Track],
) -> Result<ActiveSelection> {
    let mut sorted: Vec<&OverrideSegment> = overrides.iter().collect();
    sorted.sort_by_key(|o| (o.start_frame, o.end_frame));
    for o in &sorted {
        if o.start_frame > o.end_frame {
            return Err(Error::InvalidConfig(format!(
                "override span {}..={} is reversed",
                o.start_frame, o.end_frame
            )));
        }
    }
    for w in sorted.windows(2) {
        if w[1].start_frame <= w[0].end_frame {
            return Err(Error::OverlappingOverrides {
                first: (w[0].start_frame, w[0].end_frame),
                second: (w[1].start_frame, w[1].end_frame),
            });
        }
    }

    let mut out = selection.clone();
    for o in sorted {
        let span = o.span();
        let excluded: Vec<TrackId> = match o.excluded_track {
            Exclusion::Track(id) => vec![id],
            Exclusion::Auto => {
                let mut ids: Vec<TrackId> = span
                    .clone()
                    .filter_map(|f| selection.get(f).map(|c| c.track_id))
                    .collect();
                ids.sort_unstable();
                ids.dedup();
                ids
            }
        };
        let ranked = rank(
            tracks
                .iter()
                .filter(|t| !excluded.contains(&t.track_id))
                .filter_map(|t| {
                    let n = t.within(&span).count();
                    (n > 0).then(|| (mean_area_change(t.within(&span)), n, t))
                })
                .collect(),
        );
        for f in span {
            let choice = best_at(&ranked, f).map(|(track_id, c)| Choice {
                track_id,
                candidate: c.clone(),
            });
            out.choices.insert(f, choice);
        }
    }
    Ok(out)
}
