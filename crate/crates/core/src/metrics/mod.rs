//! Privacy measurement: feed classification, count extraction,
//! theoretical privacy, effective attribute strength and effective privacy.

mod classify;
mod counts;
mod privacy;
mod report;

use thiserror::Error;

use crate::world::AttributeId;

pub use classify::{classify_item, Classification, Classifier};
pub use counts::{analyze_feeds, DenominatorPolicy, FeedCounts, FeedSet, SurfaceCounts};
pub use privacy::{
    effective_privacy, effective_strength, ratio, theoretical_privacy, to_f64, verdict, EffectivePrivacy, Grouping,
    LikeTally, StrengthBreakdown, TheoreticalPrivacy, Verdict,
};
pub use report::{round2, PrivacyReport, StrengthRow};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("match term `{term}` belongs to attributes {first} and {second}")]
    AmbiguousClassification {
        term: String,
        first: AttributeId,
        second: AttributeId,
    },
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("privacy is undefined when no posts were liked")]
    UndefinedPrivacy,
}
