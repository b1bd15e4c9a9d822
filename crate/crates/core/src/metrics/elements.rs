use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Movement {
    Toprock,
    Footwork,
    Powermove,
}

/// A labelled span of one dance sequence; frames are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start_frame: usize,
    pub end_frame: usize,
    pub movement: Movement,
    pub dancer_id: String,
    pub sequence_id: String,
    pub battle_order: u32,
}

impl Segment {
    pub fn validate(&self) -> Result<()> {
        if self.start_frame > self.end_frame {
            return Err(Error::InvalidConfig(format!(
                "segment {}..={} ends before it starts",
                self.start_frame, self.end_frame
            )));
        }
        if self.battle_order == 0 {
            return Err(Error::InvalidConfig("battle_order starts at 1".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Percentages of frames per element.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ElementShares {
    pub toprock: f64,
    pub footwork: f64,
    pub powermove: f64,
}

impl ElementShares {
    pub fn get(&self, m: Movement) -> f64 {
        match m {
            Movement::Toprock => self.toprock,
            Movement::Footwork => self.footwork,
            Movement::Powermove => self.powermove,
        }
    }

    fn add(&mut self, m: Movement, v: f64) {
        match m {
            Movement::Toprock => self.toprock += v,
            Movement::Footwork => self.footwork += v,
            Movement::Powermove => self.powermove += v,
        }
    }

    fn scaled(self, s: f64) -> Self {
        Self {
            toprock: self.toprock * s,
            footwork: self.footwork * s,
            powermove: self.powermove * s,
        }
    }

    fn plus(self, o: Self) -> Self {
        Self {
            toprock: self.toprock + o.toprock,
            footwork: self.footwork + o.footwork,
            powermove: self.powermove + o.powermove,
        }
    }

    pub fn total(&self) -> f64 {
        self.toprock + self.footwork + self.powermove
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDistribution {
    pub global: ElementShares,
    pub by_battle_order: BTreeMap<u32, ElementShares>,
}

/// Average share of frames per element, per battle order and globally.
///
/// Each sequence contributes its own percentages, so long and short
/// sequences weigh the same. A sequence's battle order is taken from its
/// first segment.
pub fn element_distribution(segments: &[Segment]) -> Result<ElementDistribution> {
    let mut by_sequence: BTreeMap<&str, Vec<&Segment>> = BTreeMap::new();
    for s in segments {
        s.validate()?;
        by_sequence.entry(&s.sequence_id).or_default().push(s);
    }
    if by_sequence.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut global = ElementShares::default();
    let mut groups: BTreeMap<u32, (ElementShares, usize)> = BTreeMap::new();
    for (id, mut segs) in by_sequence {
        segs.sort_by_key(|s| (s.start_frame, s.end_frame));
        for w in segs.windows(2) {
            if w[1].start_frame <= w[0].end_frame {
                return Err(Error::OverlappingSegments {
                    sequence: id.to_string(),
                    first: (w[0].start_frame, w[0].end_frame),
                    second: (w[1].start_frame, w[1].end_frame),
                });
            }
        }
        let total: usize = segs.iter().map(|s| s.len()).sum();
        let mut shares = ElementShares::default();
        for s in &segs {
            shares.add(s.movement, 100.0 * s.len() as f64 / total as f64);
        }
        global = global.plus(shares);
        let g = groups.entry(segs[0].battle_order).or_default();
        g.0 = g.0.plus(shares);
        g.1 += 1;
    }
    let n: usize = groups.values().map(|g| g.1).sum();
    Ok(ElementDistribution {
        global: global.scaled(1.0 / n as f64),
        by_battle_order: groups
            .into_iter()
            .map(|(k, (s, c))| (k, s.scaled(1.0 / c as f64)))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(seq: &str, order: u32, start: usize, end: usize, m: Movement) -> Segment {
        Segment {
            start_frame: start,
            end_frame: end,
            movement: m,
            dancer_id: "d".into(),
            sequence_id: seq.into(),
            battle_order: order,
        }
    }

    #[test]
    fn single_element() {
        let d = element_distribution(&[seg("a", 1, 0, 99, Movement::Toprock)]).unwrap();
        assert_eq!(
            d.global,
            ElementShares {
                toprock: 100.0,
                footwork: 0.0,
                powermove: 0.0
            }
        );
    }

    #[test]
    fn even_split() {
        let d = element_distribution(&[
            seg("a", 1, 0, 49, Movement::Toprock),
            seg("a", 1, 50, 99, Movement::Footwork),
        ])
        .unwrap();
        assert_eq!(
            d.global,
            ElementShares {
                toprock: 50.0,
                footwork: 50.0,
                powermove: 0.0
            }
        );
    }

    #[test]
    fn sequences_weigh_equally() {
        let d = element_distribution(&[
            seg("a", 1, 0, 9, Movement::Toprock),
            seg("b", 2, 0, 999, Movement::Powermove),
        ])
        .unwrap();
        assert_eq!(d.global.toprock, 50.0);
        assert_eq!(d.by_battle_order[&1].toprock, 100.0);
        assert_eq!(d.by_battle_order[&2].powermove, 100.0);
    }

    #[test]
    fn overlap_is_an_error() {
        let e = element_distribution(&[
            seg("a", 1, 0, 10, Movement::Toprock),
            seg("a", 1, 10, 20, Movement::Footwork),
        ]);
        assert!(matches!(e, Err(Error::OverlappingSegments { .. })));
    }

    fn arb_segments() -> impl Strategy<Value = Vec<Segment>> {
        prop::collection::vec((0usize..4, 1u32..4, 1usize..200, 0usize..3), 1..20).prop_map(|raw| {
            let mut next = [0usize; 4];
            raw.into_iter()
                .map(|(s, order, len, m)| {
                    let start = next[s];
                    next[s] += len;
                    let m = [Movement::Toprock, Movement::Footwork, Movement::Powermove][m];
                    seg(&format!("s{s}"), order, start, start + len - 1, m)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn groups_sum_to_100(segs in arb_segments()) {
            let d = element_distribution(&segs).unwrap();
            prop_assert!((d.global.total() - 100.0).abs() < 1e-9);
            for s in d.by_battle_order.values().chain([&d.global]) {
                prop_assert!(s.toprock >= 0.0 && s.footwork >= 0.0 && s.powermove >= 0.0);
                prop_assert!((s.total() - 100.0).abs() < 1e-9);
            }
        }
    }
}
