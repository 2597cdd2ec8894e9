use serde::{Deserialize, Serialize};

use super::{AttributeId, PageId, PostId, UserId};

/// Who performed an interaction: the account holder or the noise bot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    User,
    Bot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    LikePost,
    LikePage,
    WatchVideo,
    ClickAd,
    Search,
}

impl Verb {
    pub const ALL: [Verb; 5] = [
        Verb::LikePost,
        Verb::LikePage,
        Verb::WatchVideo,
        Verb::ClickAd,
        Verb::Search,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verb::LikePost => "like_post",
            Verb::LikePage => "like_page",
            Verb::WatchVideo => "watch_video",
            Verb::ClickAd => "click_ad",
            Verb::Search => "search",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventObject {
    Post(PostId),
    Page(PageId),
    Keyword(String),
}

/// One entry of the interaction log. Field order is the NDJSON column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionEvent {
    pub tick: u64,
    pub actor: Actor,
    pub subject: UserId,
    pub verb: Verb,
    pub object: EventObject,
    /// `None` means unrelated to every attribute.
    pub attribute: Option<AttributeId>,
}

impl InteractionEvent {
    pub fn is_like(&self) -> bool {
        matches!(self.verb, Verb::LikePost | Verb::LikePage)
    }
}
