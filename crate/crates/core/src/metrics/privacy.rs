//! Theoretical and effective privacy.
//!
//! All arithmetic is done on exact rationals; `f64` values are derived
//! from them only for reporting.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::counts::{FeedCounts, SurfaceCounts};
use super::MetricsError;
use crate::world::{AttributeId, InteractionEvent, Verb};

pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Liked-post counts per attribute.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikeTally {
    pub per_attribute: BTreeMap<AttributeId, u64>,
    pub unrelated: u64,
}

impl LikeTally {
    /// Tallies `like_post` events; every like lands on exactly one
    /// attribute or on `unrelated`.
    pub fn from_events<'a, I: IntoIterator<Item = &'a InteractionEvent>>(events: I) -> Self {
        let mut tally = Self::default();
        for e in events.into_iter().filter(|e| e.verb == Verb::LikePost) {
            tally.add(e.attribute, 1);
        }
        tally
    }

    pub fn add(&mut self, attr: Option<AttributeId>, count: u64) {
        match attr {
            Some(a) => *self.per_attribute.entry(a).or_insert(0) += count,
            None => self.unrelated += count,
        }
    }

    pub fn get(&self, attr: AttributeId) -> u64 {
        self.per_attribute.get(&attr).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.per_attribute.values().sum::<u64>() + self.unrelated
    }

    pub fn sum_over(&self, attrs: &BTreeSet<AttributeId>) -> u64 {
        attrs.iter().map(|a| self.get(*a)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalPrivacy {
    pub real_likes: u64,
    pub noise_likes: u64,
    pub total_likes: u64,
    pub exact: BigRational,
}

impl TheoreticalPrivacy {
    pub fn value(&self) -> f64 {
        to_f64(&self.exact)
    }
}

/// `(sum of real-attribute likes - sum of noise-attribute likes) / total likes`
/// over the whole like history. Unrelated likes only enlarge the total.
pub fn theoretical_privacy(
    tally: &LikeTally,
    real: &BTreeSet<AttributeId>,
    noise: &BTreeSet<AttributeId>,
) -> Result<TheoreticalPrivacy, MetricsError> {
    let total = tally.total();
    if total == 0 {
        return Err(MetricsError::UndefinedPrivacy);
    }
    let (ra, na) = (tally.sum_over(real), tally.sum_over(noise));
    let exact = BigRational::new(BigInt::from(ra) - BigInt::from(na), BigInt::from(total));
    Ok(TheoreticalPrivacy {
        real_likes: ra,
        noise_likes: na,
        total_likes: total,
        exact,
    })
}

/// Effective strength of one attribute (or group) with its indicator
/// variables.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthBreakdown {
    /// Indicators for main, suggested, main video, latest video.
    pub indicators: [u8; 4],
    pub fractions: [BigRational; 4],
    pub exact: BigRational,
}

impl StrengthBreakdown {
    /// Number of surfaces that contribute.
    pub fn n(&self) -> u8 {
        self.indicators.iter().sum()
    }

    pub fn value(&self) -> f64 {
        to_f64(&self.exact)
    }

    pub fn fraction_values(&self) -> [f64; 4] {
        std::array::from_fn(|i| to_f64(&self.fractions[i]))
    }
}

/// `(1/n) * sum(indicator * count / total)` over the four surfaces. A
/// surface whose fraction is zero (no items, or an empty total) gets
/// indicator 0 and drops out of `n`; with `n = 0` the strength is 0.
pub fn effective_strength(counts: &SurfaceCounts, totals: &SurfaceCounts) -> Result<StrengthBreakdown, MetricsError> {
    let (x, t) = (counts.as_array(), totals.as_array());
    let mut indicators = [0u8; 4];
    let mut fractions: [BigRational; 4] = std::array::from_fn(|_| BigRational::zero());
    for i in 0..4 {
        if x[i] > t[i] {
            return Err(MetricsError::InvalidCounts(format!(
                "count {} exceeds surface total {}",
                x[i], t[i]
            )));
        }
        if x[i] > 0 {
            indicators[i] = 1;
            fractions[i] = ratio(x[i], t[i]);
        }
    }
    let n: u8 = indicators.iter().sum();
    let exact = if n == 0 {
        BigRational::zero()
    } else {
        let sum = fractions.iter().fold(BigRational::zero(), |acc, f| acc + f);
        sum / BigRational::from_integer(BigInt::from(n))
    };
    Ok(StrengthBreakdown {
        indicators,
        fractions,
        exact,
    })
}

/// How attribute strengths are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// One strength for all real attributes and one for all noise attributes.
    #[default]
    Grouped,
    /// Sum of per-attribute strengths on each side (not clamped to [-1, 1]).
    PerAttribute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePrivacy {
    pub grouping: Grouping,
    pub real: StrengthBreakdown,
    pub noise: StrengthBreakdown,
    pub per_attribute: BTreeMap<AttributeId, StrengthBreakdown>,
    pub exact: BigRational,
}

impl EffectivePrivacy {
    pub fn value(&self) -> f64 {
        to_f64(&self.exact)
    }
}

/// Sum of real strengths minus sum of noise strengths.
pub fn effective_privacy(counts: &FeedCounts, grouping: Grouping) -> Result<EffectivePrivacy, MetricsError> {
    counts.validate()?;
    let real = effective_strength(&counts.real, &counts.total)?;
    let noise = effective_strength(&counts.noise, &counts.total)?;
    let mut per_attribute = BTreeMap::new();
    for (attr, c) in &counts.per_attribute {
        per_attribute.insert(*attr, effective_strength(c, &counts.total)?);
    }
    let exact = match grouping {
        Grouping::Grouped => &real.exact - &noise.exact,
        Grouping::PerAttribute => {
            let side = |set: &BTreeSet<AttributeId>| {
                set.iter()
                    .filter_map(|a| per_attribute.get(a))
                    .fold(BigRational::zero(), |acc, s: &StrengthBreakdown| acc + &s.exact)
            };
            side(&counts.real_attrs) - side(&counts.noise_attrs)
        }
    };
    Ok(EffectivePrivacy {
        grouping,
        real,
        noise,
        per_attribute,
        exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Private,
    NotPrivate,
}

/// Private when the value is at or below zero, or within `threshold` of it.
pub fn verdict(p_eff: f64, threshold: f64) -> Verdict {
    if p_eff <= 0.0 || p_eff.abs() <= threshold {
        Verdict::Private
    } else {
        Verdict::NotPrivate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ACCOUNT_A_REAL: SurfaceCounts = SurfaceCounts::new(86, 11, 27, 123);
    const ACCOUNT_A_NOISE: SurfaceCounts = SurfaceCounts::new(127, 67, 15, 9);

    #[test]
    fn all_real_likes_give_one() {
        let mut t = LikeTally::default();
        t.add(Some(AttributeId(0)), 100);
        let p = theoretical_privacy(&t, &BTreeSet::from([AttributeId(0)]), &BTreeSet::new()).unwrap();
        assert_eq!(p.value(), 1.0);
    }

    #[test]
    fn balanced_likes_give_zero() {
        let mut t = LikeTally::default();
        t.add(Some(AttributeId(0)), 50);
        t.add(Some(AttributeId(1)), 50);
        let p = theoretical_privacy(
            &t,
            &BTreeSet::from([AttributeId(0)]),
            &BTreeSet::from([AttributeId(1)]),
        )
        .unwrap();
        assert_eq!(p.value(), 0.0);
    }

    #[test]
    fn no_likes_is_undefined() {
        assert_eq!(
            theoretical_privacy(&LikeTally::default(), &BTreeSet::new(), &BTreeSet::new()),
            Err(MetricsError::UndefinedPrivacy)
        );
    }

    #[test]
    fn week_three_cumulative() {
        let mut t = LikeTally::default();
        t.add(Some(AttributeId(0)), 1056 + 482);
        t.add(Some(AttributeId(1)), 72);
        let p = theoretical_privacy(
            &t,
            &BTreeSet::from([AttributeId(0)]),
            &BTreeSet::from([AttributeId(1)]),
        )
        .unwrap();
        assert_eq!(p.exact, ratio(1466, 1610));
        assert!((p.value() - 0.9106).abs() < 5e-5);
    }

    #[test]
    fn empty_surfaces_give_zero_strength() {
        let s = effective_strength(&SurfaceCounts::default(), &SurfaceCounts::default()).unwrap();
        assert_eq!(s.n(), 0);
        assert_eq!(s.value(), 0.0);
    }

    #[test]
    fn single_surface_strength() {
        let s = effective_strength(&SurfaceCounts::new(0, 0, 1, 0), &SurfaceCounts::new(10, 0, 4, 3)).unwrap();
        assert_eq!(s.indicators, [0, 0, 1, 0]);
        assert_eq!(s.value(), 0.25);
    }

    #[test]
    fn account_a_real_strength() {
        let total = ACCOUNT_A_REAL.add(&ACCOUNT_A_NOISE);
        let s = effective_strength(&ACCOUNT_A_REAL, &total).unwrap();
        // (86/213 + 11/78 + 27/42 + 123/132) / 4
        let hand = (0.40376 + 0.14103 + 0.64286 + 0.93182) / 4.0;
        assert!((s.value() - hand).abs() < 1e-5, "{}", s.value());
        assert!((s.value() - 0.5299).abs() < 1e-4);
    }

    #[test]
    fn account_effective_privacy() {
        let a = FeedCounts::from_groups(ACCOUNT_A_REAL, ACCOUNT_A_NOISE);
        let pa = effective_privacy(&a, Grouping::Grouped).unwrap().value();
        assert!((pa - 0.0597).abs() < 1e-4, "{pa}");
        let b = FeedCounts::from_groups(SurfaceCounts::new(79, 4, 30, 100), SurfaceCounts::new(27, 4, 14, 200));
        let pb = effective_privacy(&b, Grouping::Grouped).unwrap().value();
        assert!((pb - 0.1302).abs() < 1e-4, "{pb}");
    }

    #[test]
    fn full_noise_is_minus_one() {
        let c = FeedCounts::from_groups(SurfaceCounts::default(), SurfaceCounts::new(5, 3, 2, 9));
        assert_eq!(effective_privacy(&c, Grouping::Grouped).unwrap().value(), -1.0);
    }

    #[test]
    fn count_above_total_is_rejected() {
        assert!(matches!(
            effective_strength(&SurfaceCounts::new(5, 0, 0, 0), &SurfaceCounts::new(4, 0, 0, 0)),
            Err(MetricsError::InvalidCounts(_))
        ));
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(verdict(0.06, 0.1), Verdict::Private);
        assert_eq!(verdict(0.13, 0.1), Verdict::NotPrivate);
        assert_eq!(verdict(-0.7, 0.1), Verdict::Private);
        assert_eq!(verdict(0.1, 0.1), Verdict::Private);
    }
}
