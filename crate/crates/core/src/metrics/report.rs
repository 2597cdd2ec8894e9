use serde::{Deserialize, Serialize};

use super::counts::FeedCounts;
use super::privacy::{verdict, EffectivePrivacy, StrengthBreakdown, TheoreticalPrivacy, Verdict};
use crate::world::AttributeId;

/// Rounds to two decimals for display.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// One strength with its surface fractions and indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthRow {
    pub attribute: Option<AttributeId>,
    pub indicators: [u8; 4],
    pub fractions: [f64; 4],
    pub strength: f64,
}

impl StrengthRow {
    pub fn new(attribute: Option<AttributeId>, s: &StrengthBreakdown) -> Self {
        Self {
            attribute,
            indicators: s.indicators,
            fractions: s.fraction_values(),
            strength: s.value(),
        }
    }
}

/// Privacy numbers for one analysis window, full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub p_th: Option<f64>,
    pub p_eff: f64,
    pub verdict: Verdict,
    pub threshold: f64,
    pub real: StrengthRow,
    pub noise: StrengthRow,
    pub per_attribute: Vec<StrengthRow>,
    pub counts: FeedCounts,
}

impl PrivacyReport {
    pub fn new(
        theoretical: Option<&TheoreticalPrivacy>,
        effective: &EffectivePrivacy,
        counts: FeedCounts,
        threshold: f64,
    ) -> Self {
        let p_eff = effective.value();
        Self {
            p_th: theoretical.map(|t| t.value()),
            p_eff,
            verdict: verdict(p_eff, threshold),
            threshold,
            real: StrengthRow::new(None, &effective.real),
            noise: StrengthRow::new(None, &effective.noise),
            per_attribute: effective
                .per_attribute
                .iter()
                .map(|(a, s)| StrengthRow::new(Some(*a), s))
                .collect(),
            counts,
        }
    }

    /// Human-readable summary, two decimals.
    pub fn summary_line(&self) -> String {
        let p_th = self.p_th.map_or("n/a".to_string(), |v| format!("{:.2}", round2(v)));
        format!(
            "P_th {p_th}  P_eff {:.2}  real {:.2}  noise {:.2}  {:?}",
            round2(self.p_eff),
            round2(self.real.strength),
            round2(self.noise.strength),
            self.verdict
        )
    }
}
