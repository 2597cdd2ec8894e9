use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::classify::Classifier;
use super::MetricsError;
use crate::recommender::{FeedItem, Provenance};
use crate::world::{AttributeId, World};

/// Item counts on the four analysed surfaces: main feed from liked pages,
/// suggested/recommended/sponsored, main video feed and latest video feed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceCounts {
    pub main: u64,
    pub suggested: u64,
    pub main_video: u64,
    pub latest_video: u64,
}

impl SurfaceCounts {
    pub const fn new(main: u64, suggested: u64, main_video: u64, latest_video: u64) -> Self {
        Self {
            main,
            suggested,
            main_video,
            latest_video,
        }
    }

    pub fn as_array(&self) -> [u64; 4] {
        [self.main, self.suggested, self.main_video, self.latest_video]
    }

    pub fn from_array([main, suggested, main_video, latest_video]: [u64; 4]) -> Self {
        Self::new(main, suggested, main_video, latest_video)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (self.as_array(), other.as_array());
        Self::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

/// Which surface totals feed the strength denominators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenominatorPolicy {
    /// Only real- or noise-classified items count.
    #[default]
    RelatedOnly,
    /// Every item on the surface counts (friends excluded from the
    /// suggested total only because they never appear there).
    FullTotal,
}

/// Counts for one analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedCounts {
    pub policy: DenominatorPolicy,
    pub real: SurfaceCounts,
    pub noise: SurfaceCounts,
    pub total: SurfaceCounts,
    pub per_attribute: BTreeMap<AttributeId, SurfaceCounts>,
    pub real_attrs: BTreeSet<AttributeId>,
    pub noise_attrs: BTreeSet<AttributeId>,
}

impl FeedCounts {
    /// Counts for a single real group and a single noise group, with totals
    /// `real + noise` (related-only).
    pub fn from_groups(real: SurfaceCounts, noise: SurfaceCounts) -> Self {
        Self::with_totals(real, noise, real.add(&noise), DenominatorPolicy::RelatedOnly)
    }

    pub fn with_totals(real: SurfaceCounts, noise: SurfaceCounts, total: SurfaceCounts, policy: DenominatorPolicy) -> Self {
        let (r, n) = (AttributeId(0), AttributeId(1));
        Self {
            policy,
            real,
            noise,
            total,
            per_attribute: BTreeMap::from([(r, real), (n, noise)]),
            real_attrs: BTreeSet::from([r]),
            noise_attrs: BTreeSet::from([n]),
        }
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let (r, n, t) = (self.real.as_array(), self.noise.as_array(), self.total.as_array());
        for i in 0..4 {
            if r[i] + n[i] > t[i] {
                return Err(MetricsError::InvalidCounts(format!(
                    "surface {i}: real {} + noise {} exceeds total {}",
                    r[i], n[i], t[i]
                )));
            }
        }
        Ok(())
    }
}

/// The three analysed feeds of one window.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeedSet {
    pub main: Vec<FeedItem>,
    pub latest_video: Vec<FeedItem>,
    pub main_video: Vec<FeedItem>,
}

/// Classifies feed items into real/noise counts per surface.
///
/// Main-feed items from liked pages count toward `main`, suggested and
/// sponsored items toward `suggested`; trending items are never counted as
/// real or noise there. Every non-friend video item is classified. Friend
/// posts are always skipped.
pub fn analyze_feeds(
    world: &World,
    feeds: &FeedSet,
    classifier: &Classifier,
    real: &BTreeSet<AttributeId>,
    noise: &BTreeSet<AttributeId>,
    policy: DenominatorPolicy,
) -> FeedCounts {
    let mut per_attribute: BTreeMap<AttributeId, [u64; 4]> = BTreeMap::new();
    for a in real.iter().chain(noise) {
        per_attribute.insert(*a, [0; 4]);
    }
    let mut raw = [0u64; 4];
    let mut count = |slot: usize, item: &FeedItem| {
        if let Some(a) = classifier.classify_post(world, item.post).attribute() {
            if let Some(c) = per_attribute.get_mut(&a) {
                c[slot] += 1;
            }
        }
    };
    for item in &feeds.main {
        match item.provenance {
            Provenance::LikedPage => count(0, item),
            Provenance::Suggested => {
                raw[1] += 1;
                count(1, item)
            }
            Provenance::TrendingUnrelated | Provenance::Friend => {}
        }
    }
    raw[0] = feeds.main.len() as u64;
    for item in feeds.main_video.iter().filter(|i| i.provenance != Provenance::Friend) {
        count(2, item);
    }
    raw[2] = feeds.main_video.len() as u64;
    for item in feeds.latest_video.iter().filter(|i| i.provenance != Provenance::Friend) {
        count(3, item);
    }
    raw[3] = feeds.latest_video.len() as u64;

    let sum = |set: &BTreeSet<AttributeId>| {
        set.iter().fold(SurfaceCounts::default(), |acc, a| {
            acc.add(&SurfaceCounts::from_array(per_attribute[a]))
        })
    };
    let (real_counts, noise_counts) = (sum(real), sum(noise));
    let total = match policy {
        DenominatorPolicy::RelatedOnly => real_counts.add(&noise_counts),
        DenominatorPolicy::FullTotal => SurfaceCounts::from_array(raw),
    };
    FeedCounts {
        policy,
        real: real_counts,
        noise: noise_counts,
        total,
        per_attribute: per_attribute
            .into_iter()
            .map(|(a, c)| (a, SurfaceCounts::from_array(c)))
            .collect(),
        real_attrs: real.clone(),
        noise_attrs: noise.clone(),
    }
}
