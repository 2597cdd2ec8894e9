//! Deterministic model of the social network.
//!
//! A [`World`] holds attributes, pages, posts and users plus an append-only
//! interaction log. Time advances in ticks of one simulated hour
//! ([`TICKS_PER_WEEK`] per week). All randomness used while publishing
//! content comes from a ChaCha stream seeded at creation, so the same
//! `(config, seed)` pair and the same operation sequence always produce the
//! same world.

mod config;
mod event;
pub mod log;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, stream_rng};
use crate::text;

pub use config::{AttributeSpec, FriendSpec, NetworkConfig, Span};
pub use event::{Actor, EventObject, InteractionEvent, Verb};
pub use log::{read_ndjson, to_ndjson_string, write_ndjson, LogError};

pub const TICKS_PER_DAY: u64 = 24;
pub const TICKS_PER_WEEK: u64 = 168;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(AttributeId);
id_type!(PageId);
id_type!(PostId);
id_type!(UserId);

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("duplicate attribute keyword `{0}`")]
    DuplicateKeyword(String),
    #[error("match term `{term}` is shared by attributes `{first}` and `{second}`")]
    AmbiguousTerm {
        term: String,
        first: String,
        second: String,
    },
    #[error("unknown {kind} {id}")]
    UnknownEntity { kind: &'static str, id: String },
    #[error("event tick {event} does not match world tick {world}")]
    TickMismatch { event: u64, world: u64 },
    #[error("duplicate interaction: user {user} already {what}")]
    DuplicateInteraction { user: UserId, what: String },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("attribute {0} cannot be both real and noise")]
    OverlappingAttributeSets(AttributeId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub id: AttributeId,
    pub keyword: String,
    pub match_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub id: PageId,
    pub name: String,
    pub attribute: AttributeId,
    pub popularity: f64,
    pub post_rate: f64,
    pub video_share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostKind {
    Text,
    Video,
}

/// Where a post was published. Friend posts live on personal timelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostOrigin {
    Page(PageId),
    Friend(UserId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: PostId,
    pub origin: PostOrigin,
    pub kind: PostKind,
    pub created: u64,
    pub description_terms: Vec<String>,
}

impl Post {
    pub fn page(&self) -> Option<PageId> {
        match self.origin {
            PostOrigin::Page(p) => Some(p),
            PostOrigin::Friend(_) => None,
        }
    }

    pub fn is_video(&self) -> bool {
        self.kind == PostKind::Video
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: UserId,
    pub friends: BTreeSet<UserId>,
    pub liked_pages: BTreeSet<PageId>,
    pub liked_posts: BTreeSet<PostId>,
    pub watched_videos: BTreeSet<PostId>,
    pub real_attrs: BTreeSet<AttributeId>,
    pub noise_attrs: BTreeSet<AttributeId>,
}

impl Default for UserId {
    fn default() -> Self {
        UserId(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PublishSettings {
    keyword_probability: f64,
    friend_post_rate: f64,
    friend_video_share: f64,
    filler_terms: Vec<String>,
}

/// Lookup tables rebuilt from the serialized state; never serialized.
#[derive(Debug, Clone, Default)]
struct Index {
    posts_by_page: Vec<Vec<PostId>>,
    posts_by_friend: BTreeMap<UserId, Vec<PostId>>,
    pages_by_attribute: Vec<Vec<PageId>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct World {
    tick: u64,
    rng_seed: u64,
    attributes: Vec<Attribute>,
    pages: Vec<Page>,
    posts: Vec<Post>,
    users: Vec<User>,
    log: Vec<InteractionEvent>,
    settings: PublishSettings,
    #[serde(skip)]
    index: Index,
    #[serde(skip)]
    rng: Option<ChaCha8Rng>,
}

const FILLER_TERMS: &[&str] = &[
    "today", "new", "photo", "video", "amazing", "check", "weekend", "look", "share", "live",
    "update", "best", "story", "watch", "favorite", "moment",
];

const NAME_SUFFIXES: &[&str] = &[
    "Daily", "Club", "Lovers", "World", "Hub", "Corner", "Central", "Community", "Fans", "Network",
];

const GENERIC_PREFIXES: &[&str] = &[
    "Weekend", "Trending", "Viral", "Good Vibes", "Everyday", "Top Picks", "Hidden Gems", "Curated",
];

/// The simulated account is always user 0; friends follow.
pub const ACCOUNT: UserId = UserId(0);

/// Builds a world from `config`. The same `(config, seed)` yields a
/// byte-identical world.
pub fn create_network(config: &NetworkConfig, seed: u64) -> Result<World, SimError> {
    config.validate()?;
    let mut rng = stream_rng(seed, stream::NETWORK, 0);

    let attributes: Vec<Attribute> = config
        .attributes
        .iter()
        .enumerate()
        .map(|(i, spec)| Attribute {
            id: AttributeId(i as u32),
            keyword: spec.keyword.clone(),
            match_terms: spec.resolved_terms(),
        })
        .collect();

    let mut pages = Vec::new();
    for (attr, spec) in attributes.iter().zip(&config.attributes) {
        for n in 0..spec.pages {
            let id = PageId(pages.len() as u32);
            let suffix = NAME_SUFFIXES.choose(&mut rng).copied().unwrap_or("Page");
            let name = if rng.random_bool(config.page_name_keyword_probability) {
                format!("{} {} {}", config::capitalize(&spec.keyword), suffix, n + 1)
            } else {
                let prefix = GENERIC_PREFIXES.choose(&mut rng).copied().unwrap_or("The");
                format!("{prefix} {suffix} {}", id.0)
            };
            pages.push(Page {
                id,
                name,
                attribute: attr.id,
                popularity: draw(&mut rng, spec.popularity),
                post_rate: draw(&mut rng, spec.post_rate),
                video_share: draw(&mut rng, spec.video_share),
            });
        }
    }

    let account = ACCOUNT;
    let mut users = vec![User {
        id: account,
        ..User::default()
    }];
    for f in 1..=config.friends.count {
        let id = UserId(f);
        users[0].friends.insert(id);
        users.push(User {
            id,
            friends: BTreeSet::from([account]),
            ..User::default()
        });
    }

    let all_terms: BTreeSet<&str> = attributes
        .iter()
        .flat_map(|a| a.match_terms.iter().map(String::as_str))
        .collect();
    let filler_terms = FILLER_TERMS
        .iter()
        .filter(|t| !all_terms.contains(*t))
        .map(|t| t.to_string())
        .collect();

    let mut world = World {
        tick: 0,
        rng_seed: seed,
        attributes,
        pages,
        posts: Vec::new(),
        users,
        log: Vec::new(),
        settings: PublishSettings {
            keyword_probability: config.keyword_probability,
            friend_post_rate: config.friends.post_rate,
            friend_video_share: config.friends.video_share,
            filler_terms,
        },
        index: Index::default(),
        rng: Some(rng),
    };
    world.rebuild_index();
    Ok(world)
}

fn draw(rng: &mut ChaCha8Rng, span: Span) -> f64 {
    if span.max > span.min {
        rng.random_range(span.min..=span.max)
    } else {
        span.min
    }
}

fn poisson(rng: &mut ChaCha8Rng, rate: f64) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

impl World {
    fn rebuild_index(&mut self) {
        let mut index = Index {
            posts_by_page: vec![Vec::new(); self.pages.len()],
            posts_by_friend: BTreeMap::new(),
            pages_by_attribute: vec![Vec::new(); self.attributes.len()],
        };
        for page in &self.pages {
            index.pages_by_attribute[page.attribute.index()].push(page.id);
        }
        for list in &mut index.pages_by_attribute {
            list.sort_by(|a, b| {
                let (pa, pb) = (&self.pages[a.index()], &self.pages[b.index()]);
                pb.popularity.total_cmp(&pa.popularity).then(pa.id.cmp(&pb.id))
            });
        }
        for post in &self.posts {
            match post.origin {
                PostOrigin::Page(p) => index.posts_by_page[p.index()].push(post.id),
                PostOrigin::Friend(u) => index.posts_by_friend.entry(u).or_default().push(post.id),
            }
        }
        self.index = index;
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn pages(&self) -> &[Page] {
        &self.pages
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn log(&self) -> &[InteractionEvent] {
        &self.log
    }

    pub fn attribute(&self, id: AttributeId) -> &Attribute {
        &self.attributes[id.index()]
    }

    pub fn page(&self, id: PageId) -> &Page {
        &self.pages[id.index()]
    }

    pub fn post(&self, id: PostId) -> &Post {
        &self.posts[id.index()]
    }

    pub fn user(&self, id: UserId) -> &User {
        &self.users[id.index()]
    }

    pub fn attribute_by_keyword(&self, keyword: &str) -> Option<AttributeId> {
        self.attributes
            .iter()
            .find(|a| a.keyword == keyword)
            .map(|a| a.id)
    }

    /// Posts of a page in creation order.
    pub fn posts_of_page(&self, page: PageId) -> &[PostId] {
        &self.index.posts_by_page[page.index()]
    }

    pub fn posts_of_friend(&self, user: UserId) -> &[PostId] {
        self.index
            .posts_by_friend
            .get(&user)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Pages carrying `attr`, ordered by popularity (descending) then id.
    pub fn pages_of_attribute(&self, attr: AttributeId) -> &[PageId] {
        &self.index.pages_by_attribute[attr.index()]
    }

    /// Attribute of the page a post was published on; friend posts have none.
    pub fn post_attribute(&self, post: PostId) -> Option<AttributeId> {
        self.post(post).page().map(|p| self.page(p).attribute)
    }

    /// Serialized world state; identical worlds serialize identically.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("world serializes")
    }

    fn check_user(&self, user: UserId) -> Result<(), SimError> {
        if user.index() < self.users.len() {
            Ok(())
        } else {
            Err(SimError::UnknownEntity {
                kind: "user",
                id: user.to_string(),
            })
        }
    }

    fn check_attribute(&self, attr: AttributeId) -> Result<(), SimError> {
        if attr.index() < self.attributes.len() {
            Ok(())
        } else {
            Err(SimError::UnknownEntity {
                kind: "attribute",
                id: attr.to_string(),
            })
        }
    }

    pub fn add_real_attribute(&mut self, user: UserId, attr: AttributeId) -> Result<(), SimError> {
        self.check_user(user)?;
        self.check_attribute(attr)?;
        let u = &mut self.users[user.index()];
        if u.noise_attrs.contains(&attr) {
            return Err(SimError::OverlappingAttributeSets(attr));
        }
        u.real_attrs.insert(attr);
        Ok(())
    }

    pub fn add_noise_attribute(&mut self, user: UserId, attr: AttributeId) -> Result<(), SimError> {
        self.check_user(user)?;
        self.check_attribute(attr)?;
        let u = &mut self.users[user.index()];
        if u.real_attrs.contains(&attr) {
            return Err(SimError::OverlappingAttributeSets(attr));
        }
        u.noise_attrs.insert(attr);
        Ok(())
    }

    /// Emits this tick's posts and advances the clock by one tick.
    ///
    /// Each page publishes `Poisson(post_rate)` posts stamped with the
    /// current tick, then each friend of the account does the same with the
    /// friend rate.
    pub fn publish_tick(&mut self) -> Vec<PostId> {
        let now = self.tick;
        let mut rng = self.rng.take().unwrap_or_else(|| stream_rng(self.rng_seed, stream::NETWORK, 0));
        let mut created = Vec::new();

        for p in 0..self.pages.len() {
            let page = &self.pages[p];
            let (rate, video_share, attr) = (page.post_rate, page.video_share, page.attribute);
            for _ in 0..poisson(&mut rng, rate) {
                let kind = if rng.random_bool(video_share) {
                    PostKind::Video
                } else {
                    PostKind::Text
                };
                let mut terms = Vec::with_capacity(3);
                if rng.random_bool(self.settings.keyword_probability) {
                    let attr_terms = &self.attributes[attr.index()].match_terms;
                    if let Some(t) = attr_terms.choose(&mut rng) {
                        terms.push(t.clone());
                    }
                }
                self.push_filler(&mut rng, &mut terms, 2);
                let id = PostId(self.posts.len() as u32);
                self.posts.push(Post {
                    id,
                    origin: PostOrigin::Page(PageId(p as u32)),
                    kind,
                    created: now,
                    description_terms: terms,
                });
                self.index.posts_by_page[p].push(id);
                created.push(id);
            }
        }

        let friends: Vec<UserId> = self.users[ACCOUNT.index()].friends.iter().copied().collect();
        for friend in friends {
            for _ in 0..poisson(&mut rng, self.settings.friend_post_rate) {
                let kind = if rng.random_bool(self.settings.friend_video_share) {
                    PostKind::Video
                } else {
                    PostKind::Text
                };
                let mut terms = Vec::with_capacity(2);
                self.push_filler(&mut rng, &mut terms, 2);
                let id = PostId(self.posts.len() as u32);
                self.posts.push(Post {
                    id,
                    origin: PostOrigin::Friend(friend),
                    kind,
                    created: now,
                    description_terms: terms,
                });
                self.index.posts_by_friend.entry(friend).or_default().push(id);
                created.push(id);
            }
        }

        self.rng = Some(rng);
        self.tick += 1;
        created
    }

    fn push_filler(&self, rng: &mut ChaCha8Rng, terms: &mut Vec<String>, count: usize) {
        for _ in 0..count {
            if let Some(t) = self.settings.filler_terms.choose(rng) {
                terms.push(t.clone());
            }
        }
    }

    /// Pages whose attribute keyword or match terms contain `keyword` as a
    /// whole-word phrase (case-insensitive), ordered by popularity
    /// descending then id, truncated to `limit`.
    pub fn search_pages(&self, keyword: &str, limit: usize) -> Vec<PageId> {
        let matching: Vec<AttributeId> = self
            .attributes
            .iter()
            .filter(|a| {
                text::contains_phrase_ci(&a.keyword, keyword)
                    || a.match_terms.iter().any(|t| text::contains_phrase_ci(t, keyword))
            })
            .map(|a| a.id)
            .collect();
        let mut pages: Vec<PageId> = match matching.as_slice() {
            [] => return Vec::new(),
            [only] => self.pages_of_attribute(*only).to_vec(),
            many => {
                let mut all: Vec<PageId> = many
                    .iter()
                    .flat_map(|a| self.pages_of_attribute(*a).iter().copied())
                    .collect();
                all.sort_by(|a, b| {
                    let (pa, pb) = (self.page(*a), self.page(*b));
                    pb.popularity.total_cmp(&pa.popularity).then(pa.id.cmp(&pb.id))
                });
                all
            }
        };
        pages.truncate(limit);
        pages
    }

    /// Builds an event stamped with the current tick, deriving the
    /// attribute from the object.
    pub fn event(&self, actor: Actor, subject: UserId, verb: Verb, object: EventObject) -> InteractionEvent {
        let attribute = self.object_attribute(&object);
        InteractionEvent {
            tick: self.tick,
            actor,
            subject,
            verb,
            object,
            attribute,
        }
    }

    fn object_attribute(&self, object: &EventObject) -> Option<AttributeId> {
        match object {
            EventObject::Post(p) if p.index() < self.posts.len() => self.post_attribute(*p),
            EventObject::Page(p) if p.index() < self.pages.len() => Some(self.page(*p).attribute),
            EventObject::Keyword(k) => self.attribute_by_keyword(k).or_else(|| {
                self.attributes
                    .iter()
                    .find(|a| a.match_terms.iter().any(|t| t == k))
                    .map(|a| a.id)
            }),
            _ => None,
        }
    }

    /// Validates and appends `event` to the log, updating the subject's
    /// liked/watched sets.
    pub fn record_interaction(&mut self, event: InteractionEvent) -> Result<(), SimError> {
        if event.tick != self.tick {
            return Err(SimError::TickMismatch {
                event: event.tick,
                world: self.tick,
            });
        }
        self.check_user(event.subject)?;
        if let Some(a) = event.attribute {
            self.check_attribute(a)?;
        }
        match (&event.verb, &event.object) {
            (Verb::LikePost | Verb::WatchVideo | Verb::ClickAd, EventObject::Post(p)) => {
                if p.index() >= self.posts.len() {
                    return Err(SimError::UnknownEntity {
                        kind: "post",
                        id: p.to_string(),
                    });
                }
                let post = self.post(*p);
                if post.created > self.tick {
                    return Err(SimError::InvalidEvent(format!("post {p} not yet published")));
                }
                if event.verb == Verb::WatchVideo && !post.is_video() {
                    return Err(SimError::InvalidEvent(format!(
                        "watch_video on non-video post {p}"
                    )));
                }
            }
            (Verb::LikePage, EventObject::Page(p)) => {
                if p.index() >= self.pages.len() {
                    return Err(SimError::UnknownEntity {
                        kind: "page",
                        id: p.to_string(),
                    });
                }
            }
            (Verb::Search, EventObject::Keyword(k)) => {
                if k.trim().is_empty() {
                    return Err(SimError::InvalidEvent("empty search keyword".into()));
                }
            }
            (verb, object) => {
                return Err(SimError::InvalidEvent(format!(
                    "verb {verb:?} does not apply to {object:?}"
                )))
            }
        }
        if !matches!(event.object, EventObject::Keyword(_)) {
            let expected = self.object_attribute(&event.object);
            if event.attribute != expected {
                return Err(SimError::InvalidEvent(format!(
                    "attribute {:?} disagrees with object attribute {:?}",
                    event.attribute, expected
                )));
            }
        }

        let user = &mut self.users[event.subject.index()];
        match (&event.verb, &event.object) {
            (Verb::LikePage, EventObject::Page(p)) => {
                if !user.liked_pages.insert(*p) {
                    return Err(SimError::DuplicateInteraction {
                        user: event.subject,
                        what: format!("liked page {p}"),
                    });
                }
            }
            (Verb::LikePost, EventObject::Post(p)) => {
                if !user.liked_posts.insert(*p) {
                    return Err(SimError::DuplicateInteraction {
                        user: event.subject,
                        what: format!("liked post {p}"),
                    });
                }
            }
            (Verb::WatchVideo, EventObject::Post(p)) => {
                user.watched_videos.insert(*p);
            }
            _ => {}
        }
        self.log.push(event);
        Ok(())
    }

    /// Video posts from pages matching `keyword`, newest first, skipping
    /// videos `user` has already watched.
    pub fn search_videos(&self, user: UserId, keyword: &str, limit: usize) -> Vec<PostId> {
        let watched = &self.user(user).watched_videos;
        let mut videos: Vec<&Post> = self
            .search_pages(keyword, usize::MAX)
            .into_iter()
            .flat_map(|p| self.posts_of_page(p).iter())
            .map(|id| self.post(*id))
            .filter(|post| post.is_video() && post.created <= self.tick && !watched.contains(&post.id))
            .collect();
        videos.sort_by(|a, b| b.created.cmp(&a.created).then(a.id.cmp(&b.id)));
        videos.into_iter().take(limit).map(|p| p.id).collect()
    }
}
