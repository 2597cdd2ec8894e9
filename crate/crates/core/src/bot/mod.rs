//! The noise bot.
//!
//! One loop iteration ([`bot_step`]) picks an attribute according to a
//! [`NoiseAllocation`], searches its keyword, likes a fresh page and a
//! handful of its recent posts, then waits. In extended mode the wait is
//! filled by [`extended_actions`]: clicking ads in the main feed and
//! watching keyword videos.

mod allocation;
mod keywords;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recommender::{FeedItem, Recommender};
use crate::world::{Actor, AttributeId, EventObject, InteractionEvent, PageId, PostId, SimError, UserId, Verb, World};

pub use allocation::{build_allocation, NoiseAllocation};
pub use keywords::{expand_keywords, KeywordGraph, BUNDLED_GRAPH};

#[derive(Debug, Error, PartialEq)]
pub enum BotError {
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("keyword graph line {line}: {message}")]
    KeywordGraph { line: usize, message: String },
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("invalid bot configuration: {0}")]
    InvalidConfig(String),
    #[error("no unliked pages left for attribute {attribute}")]
    Exhausted { attribute: AttributeId },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Inclusive integer range, written `[min, max]` in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct CountRange {
    pub min: u64,
    pub max: u64,
}

impl CountRange {
    pub const fn new(min: u64, max: u64) -> Self {
        Self { min, max }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.random_range(self.min..=self.max)
    }

    pub fn is_valid(&self) -> bool {
        self.min <= self.max
    }
}

impl From<[u64; 2]> for CountRange {
    fn from([min, max]: [u64; 2]) -> Self {
        Self { min, max }
    }
}

impl From<CountRange> for [u64; 2] {
    fn from(r: CountRange) -> Self {
        [r.min, r.max]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BotConfig {
    /// Fraction of interactions that are noise, used when a schedule entry
    /// does not give an explicit mix.
    pub privacy_level: f64,
    /// Ticks between page switches.
    pub wait_range: CountRange,
    pub likes_per_page_range: CountRange,
    pub videos_per_session_range: CountRange,
    /// Main-feed items scanned for ads in extended mode.
    pub ad_click_scan_depth: usize,
    /// Search results considered when picking a page.
    pub search_depth: usize,
    /// Relative perturbation applied to the allocation on each draw.
    pub ratio_jitter: f64,
}

impl Default for BotConfig {
    fn default() -> Self {
        Self {
            privacy_level: 0.5,
            wait_range: CountRange::new(4, 12),
            likes_per_page_range: CountRange::new(15, 35),
            videos_per_session_range: CountRange::new(10, 26),
            ad_click_scan_depth: 100,
            search_depth: 1000,
            ratio_jitter: 0.1,
        }
    }
}

impl BotConfig {
    pub fn validate(&self) -> Result<(), BotError> {
        let bad = |m: &str| Err(BotError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.privacy_level) {
            return bad("privacy_level must lie in [0, 1]");
        }
        for (name, r) in [
            ("wait_range", self.wait_range),
            ("likes_per_page_range", self.likes_per_page_range),
            ("videos_per_session_range", self.videos_per_session_range),
        ] {
            if !r.is_valid() {
                return Err(BotError::InvalidConfig(format!("{name}: min must not exceed max")));
            }
        }
        if self.wait_range.min == 0 {
            return bad("wait_range: min must be at least 1 tick");
        }
        if self.search_depth == 0 {
            return bad("search_depth must be at least 1");
        }
        if !(0.0..1.0).contains(&self.ratio_jitter) {
            return bad("ratio_jitter must lie in [0, 1)");
        }
        Ok(())
    }
}

/// Outcome of one loop iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct BotStep {
    pub attribute: AttributeId,
    pub actor: Actor,
    pub page: PageId,
    pub events: Vec<InteractionEvent>,
    /// Ticks until the next iteration.
    pub wait: u64,
}

impl BotStep {
    pub fn post_likes(&self) -> usize {
        self.events.iter().filter(|e| e.verb == Verb::LikePost).count()
    }
}

/// Runs one iteration of the loop for `user` at the world's current tick.
///
/// Real attributes are recorded with [`Actor::User`] (the harness standing
/// in for the human), noise attributes with [`Actor::Bot`]. When every
/// searchable page of the drawn attribute is already liked, nothing is
/// recorded and [`BotError::Exhausted`] is returned.
pub fn bot_step<R: Rng + ?Sized>(
    world: &mut World,
    user: UserId,
    allocation: &NoiseAllocation,
    config: &BotConfig,
    rng: &mut R,
) -> Result<BotStep, BotError> {
    allocation.validate_for(world.user(user))?;
    let attribute = allocation.sample(rng, config.ratio_jitter);
    let actor = if world.user(user).real_attrs.contains(&attribute) {
        Actor::User
    } else {
        Actor::Bot
    };
    let keyword = world.attribute(attribute).keyword.clone();

    let liked = &world.user(user).liked_pages;
    let candidates: Vec<PageId> = world
        .search_pages(&keyword, config.search_depth)
        .into_iter()
        .filter(|p| world.page(*p).attribute == attribute && !liked.contains(p))
        .collect();
    if candidates.is_empty() {
        return Err(BotError::Exhausted { attribute });
    }
    let page = pick_by_popularity(world, &candidates, rng);
    let likes = config.likes_per_page_range.sample(rng);
    let wait = config.wait_range.sample(rng);

    let liked_posts = &world.user(user).liked_posts;
    let posts: Vec<PostId> = world
        .posts_of_page(page)
        .iter()
        .rev()
        .filter(|p| world.post(**p).created <= world.tick() && !liked_posts.contains(p))
        .take(likes as usize)
        .copied()
        .collect();

    let mut events = Vec::with_capacity(posts.len() + 2);
    events.push(world.event(actor, user, Verb::Search, EventObject::Keyword(keyword)));
    events.push(world.event(actor, user, Verb::LikePage, EventObject::Page(page)));
    for post in posts {
        events.push(world.event(actor, user, Verb::LikePost, EventObject::Post(post)));
    }
    for event in &events {
        world.record_interaction(event.clone())?;
    }
    Ok(BotStep {
        attribute,
        actor,
        page,
        events,
        wait,
    })
}

fn pick_by_popularity<R: Rng + ?Sized>(world: &World, pages: &[PageId], rng: &mut R) -> PageId {
    let total: f64 = pages.iter().map(|p| world.page(*p).popularity).sum();
    if total <= 0.0 {
        return pages[rng.random_range(0..pages.len())];
    }
    let mut target = rng.random_range(0.0..total);
    for p in pages {
        let w = world.page(*p).popularity;
        if target < w {
            return *p;
        }
        target -= w;
    }
    *pages.last().expect("non-empty")
}

/// Sponsored posts among the first `depth` feed items, in feed order.
pub fn ad_clicks(feed: &[FeedItem], depth: usize) -> Vec<PostId> {
    feed.iter()
        .take(depth)
        .filter(|item| item.sponsored)
        .map(|item| item.post)
        .collect()
}

/// Fills a wait period: clicks every ad among the first
/// `ad_click_scan_depth` main-feed items, then watches up to a random
/// number of `keyword` videos (newest first, unwatched only).
pub fn extended_actions<R: Rng + ?Sized>(
    world: &mut World,
    user: UserId,
    keyword: &str,
    config: &BotConfig,
    recommender: &Recommender<'_>,
    rng: &mut R,
) -> Result<Vec<InteractionEvent>, BotError> {
    let feed = recommender.main_feed(world, user, world.tick(), config.ad_click_scan_depth, rng);
    let mut events: Vec<InteractionEvent> = ad_clicks(&feed, config.ad_click_scan_depth)
        .into_iter()
        .map(|post| world.event(Actor::Bot, user, Verb::ClickAd, EventObject::Post(post)))
        .collect();
    let budget = config.videos_per_session_range.sample(rng) as usize;
    for video in world.search_videos(user, keyword, budget) {
        events.push(world.event(Actor::Bot, user, Verb::WatchVideo, EventObject::Post(video)));
    }
    for event in &events {
        world.record_interaction(event.clone())?;
    }
    Ok(events)
}
