use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::world::{Attribute, AttributeId, PostId, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Attribute(AttributeId),
    Unrelated,
}

impl Classification {
    pub fn attribute(self) -> Option<AttributeId> {
        match self {
            Classification::Attribute(a) => Some(a),
            Classification::Unrelated => None,
        }
    }
}

/// Keyword classifier over attribute match terms.
///
/// A description term matches when it equals a match term; a page name
/// matches when it contains a match term as a run of whole words. Matching
/// is case-sensitive, so case variants must be listed as terms.
#[derive(Debug, Clone)]
pub struct Classifier {
    terms: HashMap<String, AttributeId>,
    longest: usize,
}

impl Classifier {
    pub fn new(attributes: &[Attribute]) -> Result<Self, MetricsError> {
        let mut terms: HashMap<String, AttributeId> = HashMap::new();
        let mut longest = 1;
        for attr in attributes {
            for term in &attr.match_terms {
                if let Some(prev) = terms.insert(term.clone(), attr.id) {
                    if prev != attr.id {
                        return Err(MetricsError::AmbiguousClassification {
                            term: term.clone(),
                            first: prev,
                            second: attr.id,
                        });
                    }
                }
                longest = longest.max(term.split_whitespace().count());
            }
        }
        Ok(Self { terms, longest })
    }

    /// Description terms are checked first, then the page name.
    pub fn classify_terms<S: AsRef<str>>(&self, description: &[S], page_name: Option<&str>) -> Classification {
        if let Some(a) = description.iter().find_map(|t| self.terms.get(t.as_ref())) {
            return Classification::Attribute(*a);
        }
        if let Some(name) = page_name {
            let words: Vec<&str> = name.split_whitespace().collect();
            for len in 1..=self.longest.min(words.len()) {
                for window in words.windows(len) {
                    if let Some(a) = self.terms.get(&window.join(" ")) {
                        return Classification::Attribute(*a);
                    }
                }
            }
        }
        Classification::Unrelated
    }

    pub fn classify_post(&self, world: &World, post: PostId) -> Classification {
        let post = world.post(post);
        let page_name = post.page().map(|p| world.page(p).name.as_str());
        self.classify_terms(&post.description_terms, page_name)
    }
}

/// One-shot classification of a post against `attributes`.
pub fn classify_item(world: &World, post: PostId, attributes: &[Attribute]) -> Result<Classification, MetricsError> {
    Ok(Classifier::new(attributes)?.classify_post(world, post))
}
