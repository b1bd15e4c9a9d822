use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::{self_normalize, NUM_JOINTS};
use crate::sequence::KeypointSequence;

use super::VideoMeta;

/// Beat timestamps in seconds, strictly increasing and non-negative.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawBeatTrack")]
pub struct BeatTrack {
    times: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeatTrack {
    times: Vec<f64>,
}

impl TryFrom<RawBeatTrack> for BeatTrack {
    type Error = Error;
    fn try_from(raw: RawBeatTrack) -> Result<Self> {
        Self::new(raw.times)
    }
}

impl BeatTrack {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::UnsortedBeats);
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedBeats);
        }
        Ok(Self { times })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Beats inside `[from, to]`.
    pub fn within(&self, from: f64, to: f64) -> Self {
        Self {
            times: self
                .times
                .iter()
                .copied()
                .filter(|t| (from..=to).contains(t))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeatConfig {
    /// Kernel width of the alignment score, in seconds.
    pub sigma: f64,
    /// Peaks must exceed `mean + prominence_k * std` of the acceleration signal.
    pub prominence_k: f64,
    /// Target unit length for beat splitting, in frames.
    pub unit_len: usize,
}

impl Default for BeatConfig {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            prominence_k: 1.0,
            unit_len: 32,
        }
    }
}

impl BeatConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig("sigma must be positive".into()));
        }
        if !self.prominence_k.is_finite() {
            return Err(Error::InvalidConfig("prominence_k must be finite".into()));
        }
        if self.unit_len < 2 {
            return Err(Error::InvalidConfig("unit_len must be at least 2".into()));
        }
        Ok(())
    }
}

/// Accelerations below this are treated as rounding noise and set to zero.
pub const ACCELERATION_FLOOR: f64 = 1e-9;

/// Per-frame kinematic acceleration: the mean over joints of the norm of the
/// second difference of normalised positions. Entries are `(frame, a)`, one
/// per frame whose two neighbours are also posed.
pub fn kinematic_acceleration(sequence: &KeypointSequence) -> Result<Vec<(usize, f64)>> {
    let frames = sequence.frames();
    let mut out = Vec::new();
    let mut prev: Vec<(usize, [[f64; 2]; NUM_JOINTS])> = Vec::with_capacity(3);
    for f in frames {
        let Some(p) = &f.pose else {
            prev.clear();
            continue;
        };
        if prev.last().is_some_and(|(g, _)| g + 1 != f.frame) {
            prev.clear();
        }
        prev.push((f.frame, *self_normalize(p)?.joints()));
        if prev.len() > 3 {
            prev.remove(0);
        }
        if prev.len() == 3 {
            let (a, b, c) = (&prev[0].1, &prev[1].1, &prev[2].1);
            let acc = (0..NUM_JOINTS)
                .map(|j| {
                    let dx = c[j][0] - 2.0 * b[j][0] + a[j][0];
                    let dy = c[j][1] - 2.0 * b[j][1] + a[j][1];
                    (dx * dx + dy * dy).sqrt()
                })
                .sum::<f64>()
                / NUM_JOINTS as f64;
            out.push((prev[1].0, if acc < ACCELERATION_FLOOR { 0.0 } else { acc }));
        }
    }
    Ok(out)
}

/// Indices of peaks in `values`. A peak is a sample, or a flat run of equal
/// samples, strictly above both neighbours; a flat run reports its middle
/// (lower middle for even runs). Endpoints are never peaks.
pub fn find_peaks(values: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < values.len() {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < values.len() && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < values.len() && values[j + 1] < values[i] {
                peaks.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Kinematic beats: peaks of the acceleration signal above
/// `mean + prominence_k * std`, as timestamps `frame / fps`.
///
/// Peaks are searched within runs of consecutive posed frames; the threshold
/// uses statistics of the whole sequence.
pub fn kinematic_beats(
    sequence: &KeypointSequence,
    meta: &VideoMeta,
    prominence_k: f64,
) -> Result<BeatTrack> {
    if sequence.len() < 4 {
        return Err(Error::SequenceTooShort {
            needed: 4,
            got: sequence.len(),
        });
    }
    let acc = kinematic_acceleration(sequence)?;
    if acc.is_empty() {
        return Ok(BeatTrack::empty());
    }
    let n = acc.len() as f64;
    let mean = acc.iter().map(|a| a.1).sum::<f64>() / n;
    let std = (acc.iter().map(|a| (a.1 - mean).powi(2)).sum::<f64>() / n).sqrt();
    let threshold = mean + prominence_k * std;

    let mut times = Vec::new();
    let mut start = 0;
    while start < acc.len() {
        let mut end = start + 1;
        while end < acc.len() && acc[end].0 == acc[end - 1].0 + 1 {
            end += 1;
        }
        let run: Vec<f64> = acc[start..end].iter().map(|a| a.1).collect();
        for p in find_peaks(&run) {
            if run[p] > threshold {
                times.push(acc[start + p].0 as f64 / meta.fps);
            }
        }
        start = end;
    }
    BeatTrack::new(times)
}

/// Mean over kinematic beats of `exp(-d² / 2σ²)`, where `d` is the distance to
/// the nearest music beat.
pub fn beat_alignment_score(kin: &BeatTrack, music: &BeatTrack, sigma: f64) -> Result<f64> {
    if kin.is_empty() || music.is_empty() {
        return Err(Error::EmptyBeatTrack);
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidConfig("sigma must be positive".into()));
    }
    let m = music.times();
    let total: f64 = kin
        .times()
        .iter()
        .map(|&k| {
            let i = m.partition_point(|&t| t < k);
            let mut d = f64::INFINITY;
            if i < m.len() {
                d = d.min(m[i] - k);
            }
            if i > 0 {
                d = d.min(k - m[i - 1]);
            }
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .sum();
    Ok(total / kin.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtwCost {
    /// Accumulated `|Δt|` along the optimal path, in seconds.
    pub raw: f64,
    /// `raw` divided by the number of aligned pairs on that path.
    pub normalized: f64,
    pub path_len: usize,
}

/// Dynamic time warping between two beat tracks with local cost `|k_i - m_j|`
/// and steps `(1,0)`, `(0,1)`, `(1,1)`. Among paths of minimum cost, the
/// shortest one determines `path_len`.
pub fn beat_dtw_cost(kin: &BeatTrack, music: &BeatTrack) -> Result<DtwCost> {
    if kin.is_empty() || music.is_empty() {
        return Err(Error::EmptyBeatTrack);
    }
    let (a, b) = (kin.times(), music.times());
    let (n, m) = (a.len(), b.len());
    let mut cost = vec![(f64::INFINITY, 0usize); (n + 1) * (m + 1)];
    let idx = |i: usize, j: usize| i * (m + 1) + j;
    cost[idx(0, 0)] = (0.0, 0);
    let better = |x: (f64, usize), y: (f64, usize)| x.0 < y.0 || (x.0 == y.0 && x.1 < y.1);
    for i in 1..=n {
        for j in 1..=m {
            let mut best = cost[idx(i - 1, j - 1)];
            for c in [cost[idx(i - 1, j)], cost[idx(i, j - 1)]] {
                if better(c, best) {
                    best = c;
                }
            }
            cost[idx(i, j)] = (best.0 + (a[i - 1] - b[j - 1]).abs(), best.1 + 1);
        }
    }
    let (raw, path_len) = cost[idx(n, m)];
    Ok(DtwCost {
        raw,
        normalized: raw / path_len as f64,
        path_len,
    })
}

/// A half-open frame range `[start, end)` produced by beat splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitSpan {
    pub start: usize,
    pub end: usize,
    /// Set on a final unit shorter than the target length.
    pub short: bool,
}

impl UnitSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Greedy splitting of `[start, end)` into units of about `target_len`
/// frames. Each cut goes to the beat closest to `previous + target_len`
/// (earlier beat on ties) if one lies within `target_len / 2`, otherwise
/// exactly at `previous + target_len`.
pub fn split_at_beat_frames(
    start: usize,
    end: usize,
    beat_frames: &[usize],
    target_len: usize,
) -> Result<Vec<UnitSpan>> {
    if end < start + 2 {
        return Err(Error::SequenceTooShort {
            needed: 2,
            got: end.saturating_sub(start),
        });
    }
    if target_len < 2 {
        return Err(Error::InvalidConfig("target_len must be at least 2".into()));
    }
    let reach = target_len / 2;
    let mut units = Vec::new();
    let mut prev = start;
    while prev + target_len < end {
        let target = prev + target_len;
        let cut = beat_frames
            .iter()
            .copied()
            .filter(|&b| b > prev && b < end && b.abs_diff(target) <= reach)
            .min_by_key(|&b| (b.abs_diff(target), b))
            .unwrap_or(target);
        units.push(UnitSpan {
            start: prev,
            end: cut,
            short: false,
        });
        prev = cut;
    }
    units.push(UnitSpan {
        start: prev,
        end,
        short: end - prev < target_len,
    });
    Ok(units)
}

/// Splits a sequence into units at its kinematic beats.
pub fn split_at_beats(
    sequence: &KeypointSequence,
    meta: &VideoMeta,
    cfg: &BeatConfig,
) -> Result<Vec<UnitSpan>> {
    let frames = sequence.frames();
    if frames.len() < 2 {
        return Err(Error::SequenceTooShort {
            needed: 2,
            got: frames.len(),
        });
    }
    let beats = kinematic_beats(sequence, meta, cfg.prominence_k)?;
    let beat_frames: Vec<usize> = beats
        .times()
        .iter()
        .map(|t| (t * meta.fps).round() as usize)
        .collect();
    let start = frames[0].frame;
    let end = frames[frames.len() - 1].frame + 1;
    split_at_beat_frames(start, end, &beat_frames, cfg.unit_len)
}
