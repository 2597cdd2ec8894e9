use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bot::{BotConfig, KeywordGraph};
use crate::metrics::{DenominatorPolicy, Grouping};
use crate::recommender::RecommenderParams;
use crate::world::NetworkConfig;

/// Key in a `likes` map that stands for likes on friend posts.
pub const UNRELATED: &str = "unrelated";

/// A complete experiment: network, bot, recommender and the weekly
/// schedule, plus how each period is analysed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Ticks of publishing before the first period so pages have history.
    #[serde(default = "default_warmup")]
    pub warmup_ticks: u64,
    pub network: NetworkConfig,
    #[serde(default)]
    pub bot: BotConfig,
    #[serde(default)]
    pub recommender: RecommenderParams,
    /// Keywords of the account's genuine interests.
    pub real_attributes: Vec<String>,
    /// Keyword graph file (`keyword,keyword,weight` lines), relative to the
    /// scenario file. The bundled graph is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyword_graph: Option<PathBuf>,
    #[serde(default)]
    pub analysis: AnalysisPlan,
    pub schedule: Vec<Period>,
}

fn default_warmup() -> u64 {
    168
}

/// Feed sample sizes and metric options for end-of-period analyses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisPlan {
    pub main_feed: usize,
    pub main_video: usize,
    pub latest_video: usize,
    pub policy: DenominatorPolicy,
    pub grouping: Grouping,
    pub verdict_threshold: f64,
}

impl Default for AnalysisPlan {
    fn default() -> Self {
        Self {
            main_feed: 500,
            main_video: 200,
            latest_video: 100,
            policy: DenominatorPolicy::RelatedOnly,
            grouping: Grouping::Grouped,
            verdict_threshold: 0.1,
        }
    }
}

/// Feed sample sizes overriding the plan for one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSizes {
    pub main_feed: usize,
    pub main_video: usize,
    pub latest_video: usize,
}

/// One schedule entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Period {
    #[serde(default)]
    pub label: String,
    pub duration: u64,
    /// Stochastic bot activity. Mutually exclusive with `likes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allocation: Option<AllocationSpec>,
    /// Exact post-like counts per keyword to realise during the period;
    /// the key `unrelated` stands for likes on friend posts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likes: Option<BTreeMap<String, u64>>,
    /// Expected organic real-attribute post likes per tick.
    #[serde(default)]
    pub user_activity: f64,
    /// Watch videos and click ads during noise waits.
    #[serde(default)]
    pub extended: bool,
    /// Whether the period ends with a feed analysis. Unanalysed periods
    /// roll their likes into the next record.
    #[serde(default = "yes")]
    pub analyze: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_sizes: Option<SampleSizes>,
}

fn yes() -> bool {
    true
}

/// Either an explicit keyword mix, or a privacy level splitting activity
/// between the real attributes and a noise set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<BTreeMap<String, f64>>,
    /// Defaults to `bot.privacy_level`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub privacy_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_weights: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    /// Noise keywords derived from a seed keyword by graph expansion.
    Expand { seed: String, count: usize },
    /// Noise keywords with relative weights.
    Weights(BTreeMap<String, f64>),
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> HarnessError {
    HarnessError::Scenario {
        path: path.into(),
        message: message.into(),
    }
}

impl Scenario {
    /// Parses scenario JSON; errors carry the JSON path of the bad field.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })
    }

    /// Reads and validates a scenario file. A relative `keyword_graph` is
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut scenario = Self::from_json(&text)?;
        if let Some(graph) = &scenario.keyword_graph {
            if graph.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                scenario.keyword_graph = Some(base.join(graph));
            }
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// The keyword graph used for `expand` noise specs.
    pub fn keyword_graph(&self) -> Result<KeywordGraph, HarnessError> {
        match &self.keyword_graph {
            None => Ok(KeywordGraph::bundled()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                KeywordGraph::parse(&text).map_err(|e| invalid("keyword_graph", e.to_string()))
            }
        }
    }

    /// Total ticks including warm-up.
    pub fn total_ticks(&self) -> u64 {
        self.warmup_ticks + self.schedule.iter().map(|p| p.duration).sum::<u64>()
    }

    /// Checks everything that can be checked without building the world.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        self.network.validate().map_err(|e| invalid("network", e.to_string()))?;
        self.bot.validate().map_err(|e| invalid("bot", e.to_string()))?;
        self.recommender
            .validate()
            .map_err(|e| invalid("recommender", e.to_string()))?;
        let keywords: BTreeSet<&str> = self.network.attributes.iter().map(|a| a.keyword.as_str()).collect();
        let known = |path: String, k: &str| {
            if keywords.contains(k) {
                Ok(())
            } else {
                Err(invalid(path, format!("unknown attribute keyword `{k}`")))
            }
        };
        let real: BTreeSet<&str> = self.real_attributes.iter().map(String::as_str).collect();
        for (i, k) in self.real_attributes.iter().enumerate() {
            known(format!("real_attributes[{i}]"), k)?;
        }
        if real.len() != self.real_attributes.len() {
            return Err(invalid("real_attributes", "duplicate keyword"));
        }

        let plan = &self.analysis;
        for (field, size) in [
            ("main_feed", plan.main_feed),
            ("main_video", plan.main_video),
            ("latest_video", plan.latest_video),
        ] {
            if size == 0 {
                return Err(invalid(format!("analysis.{field}"), "sample size must be at least 1"));
            }
        }
        if !(plan.verdict_threshold >= 0.0 && plan.verdict_threshold.is_finite()) {
            return Err(invalid("analysis.verdict_threshold", "must be non-negative"));
        }

        if self.schedule.is_empty() {
            return Err(invalid("schedule", "needs at least one period"));
        }
        if !self.schedule.last().is_some_and(|p| p.analyze) {
            return Err(invalid("schedule", "the last period must be analysed"));
        }
        let graph = if self.schedule.iter().any(|p| {
            matches!(
                p.allocation.as_ref().and_then(|a| a.noise.as_ref()),
                Some(NoiseSpec::Expand { .. })
            )
        }) {
            Some(self.keyword_graph()?)
        } else {
            None
        };
        for (i, period) in self.schedule.iter().enumerate() {
            let at = |field: &str| format!("schedule[{i}].{field}");
            if period.duration == 0 {
                return Err(invalid(at("duration"), "must be positive"));
            }
            if !(period.user_activity >= 0.0 && period.user_activity.is_finite()) {
                return Err(invalid(at("user_activity"), "must be a non-negative rate"));
            }
            if period.user_activity > 0.0 && real.is_empty() {
                return Err(invalid(at("user_activity"), "needs at least one real attribute"));
            }
            if let Some(s) = period.sample_sizes {
                if s.main_feed == 0 || s.main_video == 0 || s.latest_video == 0 {
                    return Err(invalid(at("sample_sizes"), "sample sizes must be at least 1"));
                }
            }
            match (&period.allocation, &period.likes) {
                (Some(_), Some(_)) => {
                    return Err(invalid(at("likes"), "cannot be combined with `allocation`"));
                }
                (None, Some(likes)) => {
                    for k in likes.keys().filter(|k| *k != UNRELATED) {
                        known(at(&format!("likes.{k}")), k)?;
                    }
                }
                (Some(spec), None) => {
                    self.resolve_allocation(spec, graph.as_ref())
                        .map_err(|(field, message)| invalid(at(&format!("allocation{field}")), message))?;
                }
                (None, None) => {}
            }
        }
        Ok(())
    }

    /// Keyword weights of an allocation, with noise keywords flagged. The
    /// error carries a path suffix relative to the allocation.
    pub(crate) fn resolve_allocation(
        &self,
        spec: &AllocationSpec,
        graph: Option<&KeywordGraph>,
    ) -> Result<Vec<(String, f64, bool)>, (String, String)> {
        let keywords: BTreeSet<&str> = self.network.attributes.iter().map(|a| a.keyword.as_str()).collect();
        let real: BTreeSet<&str> = self.real_attributes.iter().map(String::as_str).collect();
        let check = |field: String, k: &str| -> Result<(), (String, String)> {
            if keywords.contains(k) {
                Ok(())
            } else {
                Err((field, format!("unknown attribute keyword `{k}`")))
            }
        };
        let finite = |field: String, w: f64| -> Result<(), (String, String)> {
            if w.is_finite() && w >= 0.0 {
                Ok(())
            } else {
                Err((field, "weights must be finite and non-negative".into()))
            }
        };

        let mut out = Vec::new();
        if let Some(mix) = &spec.mix {
            if spec.noise.is_some() || spec.privacy_level.is_some() || spec.real_weights.is_some() {
                return Err((".mix".into(), "`mix` excludes the other allocation fields".into()));
            }
            for (k, w) in mix {
                check(format!(".mix.{k}"), k)?;
                finite(format!(".mix.{k}"), *w)?;
                out.push((k.clone(), *w, !real.contains(k.as_str())));
            }
            if out.iter().all(|(_, w, _)| *w <= 0.0) {
                return Err((".mix".into(), "needs a positive weight".into()));
            }
            return Ok(out);
        }

        let level = spec.privacy_level.unwrap_or(self.bot.privacy_level);
        if !(0.0..=1.0).contains(&level) {
            return Err((".privacy_level".into(), "must lie in [0, 1]".into()));
        }
        let noise: Vec<(String, f64)> = match &spec.noise {
            None => Vec::new(),
            Some(NoiseSpec::Weights(w)) => w.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            Some(NoiseSpec::Expand { seed, count }) => {
                if *count == 0 {
                    return Err((".noise.count".into(), "must be at least 1".into()));
                }
                let graph = graph.ok_or((".noise".into(), "keyword graph unavailable".into()))?;
                graph
                    .expand(seed, *count)
                    .map_err(|e| (".noise.seed".to_string(), e.to_string()))?
                    .into_iter()
                    .map(|k| (k, 1.0))
                    .collect()
            }
        };
        for (k, w) in &noise {
            check(format!(".noise.{k}"), k)?;
            finite(format!(".noise.{k}"), *w)?;
            if real.contains(k.as_str()) {
                return Err((format!(".noise.{k}"), "is a real attribute".into()));
            }
        }
        let real_weights = |k: &str| spec.real_weights.as_ref().map_or(1.0, |w| w.get(k).copied().unwrap_or(0.0));
        if let Some(w) = &spec.real_weights {
            for (k, v) in w {
                check(format!(".real_weights.{k}"), k)?;
                finite(format!(".real_weights.{k}"), *v)?;
                if !real.contains(k.as_str()) {
                    return Err((format!(".real_weights.{k}"), "is not a real attribute".into()));
                }
            }
        }
        let real_total: f64 = self.real_attributes.iter().map(|k| real_weights(k)).sum();
        let noise_total: f64 = noise.iter().map(|(_, w)| w).sum();
        if level < 1.0 && real_total <= 0.0 {
            return Err((".privacy_level".into(), "below 1 needs a weighted real attribute".into()));
        }
        if level > 0.0 && noise_total <= 0.0 {
            return Err((".noise".into(), "positive privacy level needs noise keywords".into()));
        }
        if level < 1.0 {
            for k in &self.real_attributes {
                out.push((k.clone(), (1.0 - level) * real_weights(k) / real_total, false));
            }
        }
        if level > 0.0 {
            for (k, w) in noise {
                out.push((k, level * w / noise_total, true));
            }
        }
        Ok(out)
    }
}
