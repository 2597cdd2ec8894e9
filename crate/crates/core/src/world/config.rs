use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SimError;

/// Inclusive `[min, max]` range used for per-page parameter draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub min: f64,
    pub max: f64,
}

impl Span {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn fixed(value: f64) -> Self {
        Self {
            min: value,
            max: value,
        }
    }

    fn validate(&self, field: &str) -> Result<(), SimError> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(SimError::Config(format!(
                "{field}: range [{}, {}] must be finite with min <= max",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// One attribute of the network and the pages that carry it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSpec {
    pub keyword: String,
    /// Terms used to classify content; the keyword is always added.
    #[serde(default)]
    pub match_terms: Vec<String>,
    #[serde(default)]
    pub pages: u32,
    #[serde(default = "default_popularity")]
    pub popularity: Span,
    #[serde(default = "default_post_rate")]
    pub post_rate: Span,
    #[serde(default = "default_video_share")]
    pub video_share: Span,
}

impl AttributeSpec {
    pub fn new(keyword: impl Into<String>, pages: u32) -> Self {
        Self {
            keyword: keyword.into(),
            match_terms: Vec::new(),
            pages,
            popularity: default_popularity(),
            post_rate: default_post_rate(),
            video_share: default_video_share(),
        }
    }

    pub fn with_terms<I, S>(mut self, terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.match_terms = terms.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_post_rate(mut self, span: Span) -> Self {
        self.post_rate = span;
        self
    }

    pub fn with_video_share(mut self, span: Span) -> Self {
        self.video_share = span;
        self
    }

    pub fn with_popularity(mut self, span: Span) -> Self {
        self.popularity = span;
        self
    }

    /// Match terms with the keyword guaranteed present, in declaration order.
    pub fn resolved_terms(&self) -> Vec<String> {
        let mut terms = Vec::with_capacity(self.match_terms.len() + 2);
        let mut push = |t: String| {
            if !terms.contains(&t) {
                terms.push(t);
            }
        };
        push(self.keyword.clone());
        if self.match_terms.is_empty() {
            push(capitalize(&self.keyword));
        }
        for t in &self.match_terms {
            push(t.clone());
        }
        terms
    }
}

/// Friends of the simulated account and how often they post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FriendSpec {
    #[serde(default)]
    pub count: u32,
    #[serde(default = "default_friend_rate")]
    pub post_rate: f64,
    #[serde(default = "default_friend_video_share")]
    pub video_share: f64,
}

impl Default for FriendSpec {
    fn default() -> Self {
        Self {
            count: 0,
            post_rate: default_friend_rate(),
            video_share: default_friend_video_share(),
        }
    }
}

/// Network description, normally loaded from the `network` section of a
/// scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub attributes: Vec<AttributeSpec>,
    /// Probability that a post description carries one of its attribute's terms.
    #[serde(default = "default_keyword_probability")]
    pub keyword_probability: f64,
    /// Probability that a page name carries its attribute's keyword.
    #[serde(default = "default_name_probability")]
    pub page_name_keyword_probability: f64,
    #[serde(default)]
    pub friends: FriendSpec,
}

impl NetworkConfig {
    pub fn new(attributes: Vec<AttributeSpec>) -> Self {
        Self {
            attributes,
            keyword_probability: default_keyword_probability(),
            page_name_keyword_probability: default_name_probability(),
            friends: FriendSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let mut keywords = BTreeSet::new();
        let mut term_owner: BTreeMap<String, &str> = BTreeMap::new();
        for (i, spec) in self.attributes.iter().enumerate() {
            let at = |f: &str| format!("network.attributes[{i}].{f}");
            if spec.keyword.trim().is_empty() {
                return Err(SimError::Config(format!("{}: empty keyword", at("keyword"))));
            }
            if !keywords.insert(spec.keyword.as_str()) {
                return Err(SimError::DuplicateKeyword(spec.keyword.clone()));
            }
            spec.popularity.validate(&at("popularity"))?;
            spec.post_rate.validate(&at("post_rate"))?;
            spec.video_share.validate(&at("video_share"))?;
            if spec.popularity.min < 0.0 || spec.post_rate.min < 0.0 {
                return Err(SimError::Config(format!(
                    "{}: popularity and post_rate must be non-negative",
                    at("popularity")
                )));
            }
            if spec.video_share.min < 0.0 || spec.video_share.max > 1.0 {
                return Err(SimError::Config(format!(
                    "{}: must lie in [0, 1]",
                    at("video_share")
                )));
            }
            for term in spec.resolved_terms() {
                if term.trim().is_empty() {
                    return Err(SimError::Config(format!("{}: empty term", at("match_terms"))));
                }
                if let Some(owner) = term_owner.insert(term.clone(), &spec.keyword) {
                    return Err(SimError::AmbiguousTerm {
                        term,
                        first: owner.to_string(),
                        second: spec.keyword.clone(),
                    });
                }
            }
        }
        for (name, p) in [
            ("network.keyword_probability", self.keyword_probability),
            (
                "network.page_name_keyword_probability",
                self.page_name_keyword_probability,
            ),
            ("network.friends.video_share", self.friends.video_share),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Config(format!("{name}: must lie in [0, 1]")));
            }
        }
        if !(self.friends.post_rate.is_finite() && self.friends.post_rate >= 0.0) {
            return Err(SimError::Config(
                "network.friends.post_rate: must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn default_popularity() -> Span {
    Span::new(1.0, 100.0)
}

fn default_post_rate() -> Span {
    Span::new(0.02, 0.08)
}

fn default_video_share() -> Span {
    Span::new(0.1, 0.4)
}

fn default_friend_rate() -> f64 {
    0.05
}

fn default_friend_video_share() -> f64 {
    0.2
}

fn default_keyword_probability() -> f64 {
    0.9
}

fn default_name_probability() -> f64 {
    0.5
}
