//! Per-frame pose streams for a single dancer, and the cut lists that split
//! them into independently processed regions.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::pose::Pose;

/// Where the pose at a frame came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Automatic,
    Manual,
    Interpolated,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFrame {
    pub frame: usize,
    pub pose: Option<Pose>,
    pub provenance: Provenance,
    pub labelling_score: Option<f64>,
}

impl SequenceFrame {
    pub fn missing(frame: usize) -> Self {
        Self {
            frame,
            pose: None,
            provenance: Provenance::Missing,
            labelling_score: None,
        }
    }

    pub fn automatic(frame: usize, pose: Pose, labelling_score: f64) -> Self {
        Self {
            frame,
            pose: Some(pose),
            provenance: Provenance::Automatic,
            labelling_score: Some(labelling_score),
        }
    }

    pub fn manual(frame: usize, pose: Pose) -> Self {
        Self {
            frame,
            pose: Some(pose),
            provenance: Provenance::Manual,
            labelling_score: Some(1.0),
        }
    }
}

/// Frames in strictly increasing order, each carrying an optional pose.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KeypointSequence {
    frames: Vec<SequenceFrame>,
}

impl KeypointSequence {
    /// Sorts frames by index; later duplicates replace earlier ones.
    pub fn new(mut frames: Vec<SequenceFrame>) -> Self {
        frames.sort_by_key(|f| f.frame);
        frames.dedup_by(|later, earlier| {
            if later.frame == earlier.frame {
                std::mem::swap(later, earlier);
                true
            } else {
                false
            }
        });
        Self { frames }
    }

    /// A sequence where every frame has an automatic pose of score 1.
    pub fn from_poses(start: usize, poses: impl IntoIterator<Item = Pose>) -> Self {
        let frames = poses
            .into_iter()
            .enumerate()
            .map(|(i, p)| SequenceFrame::automatic(start + i, p, 1.0))
            .collect();
        Self { frames }
    }

    pub fn frames(&self) -> &[SequenceFrame] {
        &self.frames
    }

    pub fn frames_mut(&mut self) -> &mut [SequenceFrame] {
        &mut self.frames
    }

    pub fn into_frames(self) -> Vec<SequenceFrame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn get(&self, frame: usize) -> Option<&SequenceFrame> {
        self.frames
            .binary_search_by_key(&frame, |f| f.frame)
            .ok()
            .map(|i| &self.frames[i])
    }

    pub fn posed_count(&self) -> usize {
        self.frames.iter().filter(|f| f.pose.is_some()).count()
    }

    /// Index ranges (into [`frames`](Self::frames)) of the contiguous pieces
    /// left after splitting at `cuts` and at gaps in the frame numbering.
    pub fn pieces(&self, cuts: &Cuts) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..self.frames.len() {
            let prev = self.frames[i - 1].frame;
            let cur = self.frames[i].frame;
            if cur != prev + 1 || cuts.separates(prev, cur) {
                out.push(start..i);
                start = i;
            }
        }
        if start < self.frames.len() {
            out.push(start..self.frames.len());
        }
        out
    }
}

/// Frame indices at which a new region begins (shot changes and segment
/// starts). Consecutive frames `f - 1` and `f` are never processed together
/// when `f` is a cut.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cuts {
    starts: BTreeSet<usize>,
}

impl Cuts {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(starts: impl IntoIterator<Item = usize>) -> Self {
        Self {
            starts: starts.into_iter().collect(),
        }
    }

    /// Cuts at the start of each span and just after its end.
    pub fn from_spans<'a>(spans: impl IntoIterator<Item = &'a RangeInclusive<usize>>) -> Self {
        let mut starts = BTreeSet::new();
        for s in spans {
            starts.insert(*s.start());
            starts.insert(*s.end() + 1);
        }
        Self { starts }
    }

    pub fn merge(&self, other: &Cuts) -> Cuts {
        Cuts {
            starts: self.starts.union(&other.starts).copied().collect(),
        }
    }

    pub fn starts(&self) -> impl Iterator<Item = usize> + '_ {
        self.starts.iter().copied()
    }

    /// True when some cut lies in `(a, b]`.
    pub fn separates(&self, a: usize, b: usize) -> bool {
        a < b && self.starts.range(a + 1..=b).next().is_some()
    }

    /// Splits an inclusive frame range into the regions between cuts.
    pub fn split(&self, range: RangeInclusive<usize>) -> Vec<RangeInclusive<usize>> {
        let (lo, hi) = (*range.start(), *range.end());
        if lo > hi {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut start = lo;
        for c in self.starts.range(lo + 1..=hi) {
            out.push(start..=c - 1);
            start = *c;
        }
        out.push(start..=hi);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_ranges_at_cuts() {
        let cuts = Cuts::new([5, 10, 40]);
        assert_eq!(cuts.split(0..=20), vec![0..=4, 5..=9, 10..=20]);
        assert_eq!(cuts.split(5..=9), vec![5..=9]);
        assert_eq!(Cuts::none().split(3..=3), vec![3..=3]);
    }

    #[test]
    fn spans_become_cuts() {
        let cuts = Cuts::from_spans(&[0..=9, 10..=19]);
        assert_eq!(cuts.starts().collect::<Vec<_>>(), vec![0, 10, 20]);
        assert!(cuts.separates(9, 10));
        assert!(!cuts.separates(10, 11));
    }

    #[test]
    fn pieces_split_on_gaps_and_cuts() {
        let frames = [0, 1, 2, 3, 7, 8, 9]
            .iter()
            .map(|&f| SequenceFrame::missing(f))
            .collect();
        let seq = KeypointSequence::new(frames);
        assert_eq!(seq.pieces(&Cuts::new([2])), vec![0..2, 2..4, 4..7]);
    }

    #[test]
    fn new_sorts_and_dedups() {
        let seq = KeypointSequence::new(vec![
            SequenceFrame::missing(3),
            SequenceFrame::missing(1),
            SequenceFrame {
                labelling_score: Some(0.5),
                ..SequenceFrame::missing(3)
            },
        ]);
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.get(3).unwrap().labelling_score, Some(0.5));
    }
}
