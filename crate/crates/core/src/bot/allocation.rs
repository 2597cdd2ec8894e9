use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use rand::Rng;

use super::BotError;
use crate::world::{AttributeId, User};

/// Target share of interactions per attribute over a tick range.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseAllocation {
    ratios: BTreeMap<AttributeId, f64>,
    pub period: Range<u64>,
}

impl NoiseAllocation {
    /// Normalizes non-negative weights into fractions summing to one.
    /// Zero-weight attributes are dropped.
    pub fn from_weights(weights: &BTreeMap<AttributeId, f64>, period: Range<u64>) -> Result<Self, BotError> {
        if weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(BotError::InvalidAllocation("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.values().sum();
        if total <= 0.0 {
            return Err(BotError::InvalidAllocation("allocation has no positive weight".into()));
        }
        let ratios = weights
            .iter()
            .filter(|(_, w)| **w > 0.0)
            .map(|(a, w)| (*a, w / total))
            .collect();
        Ok(Self { ratios, period })
    }

    pub fn ratios(&self) -> &BTreeMap<AttributeId, f64> {
        &self.ratios
    }

    pub fn ratio(&self, attr: AttributeId) -> f64 {
        self.ratios.get(&attr).copied().unwrap_or(0.0)
    }

    pub fn attributes(&self) -> impl Iterator<Item = AttributeId> + '_ {
        self.ratios.keys().copied()
    }

    /// Checks that every allocated attribute belongs to the user's real or
    /// noise set.
    pub fn validate_for(&self, user: &User) -> Result<(), BotError> {
        for attr in self.ratios.keys() {
            if !user.real_attrs.contains(attr) && !user.noise_attrs.contains(attr) {
                return Err(BotError::InvalidAllocation(format!(
                    "attribute {attr} is neither real nor noise for user {}",
                    user.id
                )));
            }
        }
        Ok(())
    }

    /// Share of the allocation assigned to `noise` attributes.
    pub fn noise_share(&self, noise: &BTreeSet<AttributeId>) -> f64 {
        self.ratios
            .iter()
            .filter(|(a, _)| noise.contains(a))
            .map(|(_, r)| r)
            .sum()
    }

    /// Draws one attribute. Each ratio is first scaled by an independent
    /// factor in `[1 - jitter, 1 + jitter]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, jitter: f64) -> AttributeId {
        let jittered: Vec<(AttributeId, f64)> = self
            .ratios
            .iter()
            .map(|(a, r)| {
                let factor = if jitter > 0.0 {
                    rng.random_range(1.0 - jitter..=1.0 + jitter)
                } else {
                    1.0
                };
                (*a, r * factor)
            })
            .collect();
        let total: f64 = jittered.iter().map(|(_, w)| w).sum();
        let mut target = rng.random_range(0.0..total);
        for (attr, w) in &jittered {
            if target < *w {
                return *attr;
            }
            target -= w;
        }
        jittered.last().expect("allocation is never empty").0
    }
}

/// Splits interactions between real and noise attributes.
///
/// Real attributes share `1 - privacy_level` and noise attributes share
/// `privacy_level`, each proportionally to `weights` (missing entries weigh
/// 1, so no map means uniform).
pub fn build_allocation(
    real: &[AttributeId],
    noise: &[AttributeId],
    privacy_level: f64,
    weights: Option<&BTreeMap<AttributeId, f64>>,
) -> Result<NoiseAllocation, BotError> {
    if !(0.0..=1.0).contains(&privacy_level) {
        return Err(BotError::InvalidAllocation(format!(
            "privacy level {privacy_level} outside [0, 1]"
        )));
    }
    if privacy_level > 0.0 && noise.is_empty() {
        return Err(BotError::InvalidAllocation(
            "positive privacy level needs at least one noise attribute".into(),
        ));
    }
    if privacy_level < 1.0 && real.is_empty() {
        return Err(BotError::InvalidAllocation(
            "privacy level below 1 needs at least one real attribute".into(),
        ));
    }
    let weight_of = |a: &AttributeId| weights.and_then(|w| w.get(a)).copied().unwrap_or(1.0);
    let mut combined = BTreeMap::new();
    for (group, share) in [(real, 1.0 - privacy_level), (noise, privacy_level)] {
        if share <= 0.0 {
            continue;
        }
        let total: f64 = group.iter().map(weight_of).sum();
        if !(total > 0.0) {
            return Err(BotError::InvalidAllocation("group weights must be positive".into()));
        }
        for a in group {
            if combined.contains_key(a) {
                return Err(BotError::InvalidAllocation(format!(
                    "attribute {a} appears in both groups"
                )));
            }
            combined.insert(*a, share * weight_of(a) / total);
        }
    }
    NoiseAllocation::from_weights(&combined, 0..u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAT: AttributeId = AttributeId(0);
    const GUNS: AttributeId = AttributeId(1);
    const COOKING: AttributeId = AttributeId(2);

    #[test]
    fn zero_level_is_all_real() {
        let a = build_allocation(&[CAT], &[], 0.0, None).unwrap();
        assert_eq!(a.ratio(CAT), 1.0);
        assert_eq!(a.ratios().len(), 1);
    }

    #[test]
    fn week_six_split() {
        let weights = BTreeMap::from([(GUNS, 3.0), (COOKING, 2.0)]);
        let a = build_allocation(&[CAT], &[GUNS, COOKING], 0.5, Some(&weights)).unwrap();
        assert!((a.ratio(CAT) - 0.5).abs() < 1e-12);
        assert!((a.ratio(GUNS) - 0.3).abs() < 1e-12);
        assert!((a.ratio(COOKING) - 0.2).abs() < 1e-12);
        assert!((a.ratios().values().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_noise_shares() {
        let noise: Vec<AttributeId> = (1..=4).map(AttributeId).collect();
        let a = build_allocation(&[CAT], &noise, 0.8, None).unwrap();
        for n in &noise {
            assert!((a.ratio(*n) - 0.2).abs() < 1e-12);
        }
        assert!((a.ratio(CAT) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn invalid_levels() {
        assert!(build_allocation(&[CAT], &[GUNS], 1.2, None).is_err());
        assert!(build_allocation(&[CAT], &[GUNS], -0.1, None).is_err());
        assert!(build_allocation(&[CAT], &[], 0.3, None).is_err());
        assert!(build_allocation(&[], &[GUNS], 0.3, None).is_err());
        assert!(build_allocation(&[], &[GUNS], 1.0, None).is_ok());
    }

    #[test]
    fn weights_normalize() {
        let w = BTreeMap::from([(CAT, 23.0), (GUNS, 23.0), (COOKING, 23.0), (AttributeId(3), 30.0)]);
        let a = NoiseAllocation::from_weights(&w, 0..10).unwrap();
        assert!((a.ratios().values().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((a.ratio(AttributeId(3)) - 30.0 / 99.0).abs() < 1e-12);
        assert!(NoiseAllocation::from_weights(&BTreeMap::new(), 0..1).is_err());
    }
}
