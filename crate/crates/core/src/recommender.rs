//! Surrogate for the platform's profiling and feed ranking.
//!
//! The platform's real algorithm is closed, so this module is an explicit
//! model: interactions are folded into a recency-decayed interest profile,
//! and four feed surfaces are assembled from that profile. Every constant
//! lives in [`RecommenderParams`] and can be overridden from the scenario
//! file's `recommender` section.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{AttributeId, PageId, PostId, UserId, Verb, World};

#[derive(Debug, Error, PartialEq)]
pub enum RecommenderError {
    #[error("recommender.{field}: {message}")]
    Invalid { field: &'static str, message: String },
}

/// Fractions of the main feed drawn from each source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MainFeedMix {
    pub liked_page: f64,
    pub suggested: f64,
    pub sponsored: f64,
    pub trending: f64,
    pub friend: f64,
}

impl Default for MainFeedMix {
    fn default() -> Self {
        // suggested + sponsored make up the 15% recommended share
        Self {
            liked_page: 0.50,
            suggested: 0.10,
            sponsored: 0.05,
            trending: 0.15,
            friend: 0.20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommenderParams {
    /// Interest decay constant in ticks.
    pub decay_ticks: f64,
    /// Post freshness decay constant in ticks.
    pub feed_decay_ticks: f64,
    pub like_weight: f64,
    pub watch_weight: f64,
    pub ad_click_weight: f64,
    /// Minimum normalized score for an attribute to get suggested posts.
    pub suggestion_threshold: f64,
    pub main_mix: MainFeedMix,
    /// Share of the main video feed that is profile-related.
    pub video_related_share: f64,
    /// Posts older than this many ticks are not considered for feeds.
    pub horizon_ticks: u64,
}

impl Default for RecommenderParams {
    fn default() -> Self {
        Self {
            decay_ticks: 336.0,
            feed_decay_ticks: 72.0,
            like_weight: 1.0,
            watch_weight: 0.5,
            ad_click_weight: 0.25,
            suggestion_threshold: 0.05,
            main_mix: MainFeedMix::default(),
            video_related_share: 0.30,
            horizon_ticks: 504,
        }
    }
}

impl RecommenderParams {
    pub fn validate(&self) -> Result<(), RecommenderError> {
        let invalid = |field, message: &str| {
            Err(RecommenderError::Invalid {
                field,
                message: message.to_string(),
            })
        };
        if !(self.decay_ticks > 0.0 && self.decay_ticks.is_finite()) {
            return invalid("decay_ticks", "must be positive");
        }
        if !(self.feed_decay_ticks > 0.0 && self.feed_decay_ticks.is_finite()) {
            return invalid("feed_decay_ticks", "must be positive");
        }
        for (field, w) in [
            ("like_weight", self.like_weight),
            ("watch_weight", self.watch_weight),
            ("ad_click_weight", self.ad_click_weight),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return invalid(field, "must be non-negative");
            }
        }
        if !(0.0..=1.0).contains(&self.suggestion_threshold) {
            return invalid("suggestion_threshold", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.video_related_share) {
            return invalid("video_related_share", "must lie in [0, 1]");
        }
        let m = &self.main_mix;
        let parts = [m.liked_page, m.suggested, m.sponsored, m.trending, m.friend];
        if parts.iter().any(|p| !(*p >= 0.0)) {
            return invalid("main_mix", "fractions must be non-negative");
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return invalid("main_mix", "fractions must sum to 1");
        }
        Ok(())
    }

    /// Profile weight of one interaction verb.
    pub fn verb_weight(&self, verb: Verb) -> f64 {
        match verb {
            Verb::LikePost | Verb::LikePage => self.like_weight,
            Verb::WatchVideo => self.watch_weight,
            Verb::ClickAd => self.ad_click_weight,
            Verb::Search => 0.0,
        }
    }
}

/// Recency-weighted interest scores of one user at one tick.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterestProfile {
    pub tick: u64,
    scores: BTreeMap<AttributeId, f64>,
}

impl InterestProfile {
    pub fn score(&self, attr: AttributeId) -> f64 {
        self.scores.get(&attr).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.scores.values().sum()
    }

    pub fn scores(&self) -> &BTreeMap<AttributeId, f64> {
        &self.scores
    }

    /// Scores divided by their total; empty when nothing was scored.
    pub fn normalized(&self) -> BTreeMap<AttributeId, f64> {
        let total = self.total();
        if total <= 0.0 {
            return BTreeMap::new();
        }
        self.scores.iter().map(|(a, s)| (*a, s / total)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.values().all(|s| *s <= 0.0)
    }
}

/// Folds `user`'s interactions up to `tick` into decayed per-attribute
/// scores: each event contributes `weight(verb) * exp(-(tick - t) / decay)`.
pub fn interest_profile(
    world: &World,
    user: UserId,
    tick: u64,
    params: &RecommenderParams,
) -> InterestProfile {
    let mut scores = BTreeMap::new();
    for event in world.log() {
        if event.tick > tick {
            break;
        }
        if event.subject != user {
            continue;
        }
        let Some(attr) = event.attribute else { continue };
        let w = params.verb_weight(event.verb);
        if w <= 0.0 {
            continue;
        }
        let age = (tick - event.tick) as f64;
        *scores.entry(attr).or_insert(0.0) += w * (-age / params.decay_ticks).exp();
    }
    InterestProfile { tick, scores }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    Main,
    LatestVideo,
    MainVideo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    LikedPage,
    Suggested,
    TrendingUnrelated,
    Friend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedItem {
    pub post: PostId,
    pub surface: Surface,
    pub provenance: Provenance,
    /// Suggested items paid for by an advertiser.
    #[serde(default)]
    pub sponsored: bool,
}

/// Weighted sampling without replacement (Efraimidis-Spirakis keys).
struct Pool {
    keyed: Vec<(f64, PostId)>,
}

impl Pool {
    fn new<R: Rng + ?Sized>(items: Vec<(PostId, f64)>, rng: &mut R) -> Self {
        let mut keyed: Vec<(f64, PostId)> = items
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(id, w)| {
                let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                (u.ln() / w, id)
            })
            .collect();
        // ascending, so pop() yields the largest key
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        Self { keyed }
    }

    fn is_empty(&self) -> bool {
        self.keyed.is_empty()
    }

    fn pop(&mut self) -> Option<PostId> {
        self.keyed.pop().map(|(_, id)| id)
    }
}

/// Per-attribute pools sampled two-stage: attribute by score, then post.
struct AttributePools {
    pools: BTreeMap<AttributeId, (f64, Pool)>,
}

impl AttributePools {
    fn is_empty(&self) -> bool {
        self.pools.values().all(|(_, p)| p.is_empty())
    }

    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<PostId> {
        let total: f64 = self
            .pools
            .values()
            .filter(|(_, p)| !p.is_empty())
            .map(|(w, _)| *w)
            .sum();
        if total <= 0.0 {
            return None;
        }
        let mut target = rng.random_range(0.0..total);
        let mut chosen = None;
        for (attr, (w, pool)) in &self.pools {
            if pool.is_empty() {
                continue;
            }
            chosen = Some(*attr);
            if target < *w {
                break;
            }
            target -= w;
        }
        self.pools.get_mut(&chosen?)?.1.pop()
    }
}

/// Splits `n` slots over categories proportionally to `weights` using
/// largest remainders; ties go to the earlier category.
fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 || n == 0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut rest = n - quotas.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).filter(|i| weights[*i] > 0.0).collect();
    order.sort_by(|a, b| {
        let (ra, rb) = (exact[*a] - exact[*a].floor(), exact[*b] - exact[*b].floor());
        rb.total_cmp(&ra).then(a.cmp(b))
    });
    for i in order.into_iter().cycle() {
        if rest == 0 {
            break;
        }
        quotas[i] += 1;
        rest -= 1;
    }
    quotas
}

pub struct Recommender<'a> {
    pub params: &'a RecommenderParams,
}

impl<'a> Recommender<'a> {
    pub fn new(params: &'a RecommenderParams) -> Self {
        Self { params }
    }

    pub fn profile(&self, world: &World, user: UserId, tick: u64) -> InterestProfile {
        interest_profile(world, user, tick, self.params)
    }

    fn freshness(&self, tick: u64, created: u64) -> f64 {
        (-((tick - created) as f64) / self.params.feed_decay_ticks).exp()
    }

    /// Posts of `page` published in `[tick - horizon, tick]`.
    fn recent_posts<'w>(&self, world: &'w World, page: PageId, tick: u64) -> impl Iterator<Item = PostId> + 'w {
        let oldest = tick.saturating_sub(self.params.horizon_ticks);
        world
            .posts_of_page(page)
            .iter()
            .rev()
            .copied()
            .skip_while(move |p| world.post(*p).created > tick)
            .take_while(move |p| world.post(*p).created >= oldest)
    }

    fn page_items(&self, world: &World, page: PageId, tick: u64, videos_only: bool) -> Vec<(PostId, f64)> {
        let popularity = world.page(page).popularity;
        self.recent_posts(world, page, tick)
            .filter(|p| !videos_only || world.post(*p).is_video())
            .map(|p| (p, popularity * self.freshness(tick, world.post(p).created)))
            .collect()
    }

    /// Main feed of `n` items mixing liked-page, suggested, sponsored,
    /// trending and friend posts per [`MainFeedMix`]. Sources without
    /// candidates give their share to the others; the feed is shorter than
    /// `n` only when every source runs out.
    pub fn main_feed<R: Rng + ?Sized>(
        &self,
        world: &World,
        user: UserId,
        tick: u64,
        n: usize,
        rng: &mut R,
    ) -> Vec<FeedItem> {
        if n == 0 {
            return Vec::new();
        }
        let profile = self.profile(world, user, tick);
        let normalized = profile.normalized();
        let liked = &world.user(user).liked_pages;

        let mut liked_items: BTreeMap<AttributeId, Vec<(PostId, f64)>> = BTreeMap::new();
        let mut suggested_items: BTreeMap<AttributeId, Vec<(PostId, f64)>> = BTreeMap::new();
        let mut trending_items = Vec::new();
        for page in world.pages() {
            let attr = page.attribute;
            let score = profile.score(attr);
            if liked.contains(&page.id) {
                if score > 0.0 {
                    liked_items
                        .entry(attr)
                        .or_default()
                        .extend(self.page_items(world, page.id, tick, false));
                }
            } else if score > 0.0
                && normalized.get(&attr).copied().unwrap_or(0.0) >= self.params.suggestion_threshold
            {
                suggested_items
                    .entry(attr)
                    .or_default()
                    .extend(self.page_items(world, page.id, tick, false));
            } else if score <= 0.0 {
                trending_items.extend(self.page_items(world, page.id, tick, false));
            }
        }
        let oldest = tick.saturating_sub(self.params.horizon_ticks);
        let friend_items: Vec<(PostId, f64)> = world
            .user(user)
            .friends
            .iter()
            .flat_map(|f| world.posts_of_friend(*f).iter().copied())
            .filter(|p| {
                let c = world.post(*p).created;
                c <= tick && c >= oldest
            })
            .map(|p| (p, self.freshness(tick, world.post(p).created)))
            .collect();

        let mut liked_pools = self.attribute_pools(liked_items, &profile, rng);
        let mut suggested_pools = self.attribute_pools(suggested_items, &profile, rng);
        let mut trending = Pool::new(trending_items, rng);
        let mut friends = Pool::new(friend_items, rng);

        let mix = &self.params.main_mix;
        let avail = |ok: bool, w: f64| if ok { w } else { 0.0 };
        let quotas = apportion(
            n,
            &[
                avail(!liked_pools.is_empty(), mix.liked_page),
                avail(!suggested_pools.is_empty(), mix.suggested),
                avail(!suggested_pools.is_empty(), mix.sponsored),
                avail(!trending.is_empty(), mix.trending),
                avail(!friends.is_empty(), mix.friend),
            ],
        );

        let mut feed = Vec::with_capacity(n);
        let item = |post, provenance, sponsored| FeedItem {
            post,
            surface: Surface::Main,
            provenance,
            sponsored,
        };
        for _ in 0..quotas[0] {
            if let Some(p) = liked_pools.draw(rng) {
                feed.push(item(p, Provenance::LikedPage, false));
            }
        }
        for _ in 0..quotas[2] {
            if let Some(p) = suggested_pools.draw(rng) {
                feed.push(item(p, Provenance::Suggested, true));
            }
        }
        for _ in 0..quotas[1] {
            if let Some(p) = suggested_pools.draw(rng) {
                feed.push(item(p, Provenance::Suggested, false));
            }
        }
        for _ in 0..quotas[3] {
            if let Some(p) = trending.pop() {
                feed.push(item(p, Provenance::TrendingUnrelated, false));
            }
        }
        for _ in 0..quotas[4] {
            if let Some(p) = friends.pop() {
                feed.push(item(p, Provenance::Friend, false));
            }
        }
        // refill shortfalls from whatever sources still have candidates
        while feed.len() < n {
            let next = if let Some(p) = liked_pools.draw(rng) {
                item(p, Provenance::LikedPage, false)
            } else if let Some(p) = suggested_pools.draw(rng) {
                item(p, Provenance::Suggested, false)
            } else if let Some(p) = trending.pop() {
                item(p, Provenance::TrendingUnrelated, false)
            } else if let Some(p) = friends.pop() {
                item(p, Provenance::Friend, false)
            } else {
                break;
            };
            feed.push(next);
        }
        feed.shuffle(rng);
        feed
    }

    fn attribute_pools<R: Rng + ?Sized>(
        &self,
        items: BTreeMap<AttributeId, Vec<(PostId, f64)>>,
        profile: &InterestProfile,
        rng: &mut R,
    ) -> AttributePools {
        let pools = items
            .into_iter()
            .map(|(attr, list)| (attr, (profile.score(attr), Pool::new(list, rng))))
            .filter(|(_, (w, pool))| *w > 0.0 && !pool.is_empty())
            .collect();
        AttributePools { pools }
    }

    /// The `n` newest videos from liked pages, newest first, ties by id.
    pub fn latest_video_feed(&self, world: &World, user: UserId, tick: u64, n: usize) -> Vec<FeedItem> {
        let mut videos: Vec<(u64, PostId)> = Vec::new();
        for page in &world.user(user).liked_pages {
            let newest = world
                .posts_of_page(*page)
                .iter()
                .rev()
                .map(|p| world.post(*p))
                .filter(|p| p.created <= tick && p.is_video())
                .take(n)
                .map(|p| (p.created, p.id));
            videos.extend(newest);
        }
        videos.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        videos
            .into_iter()
            .take(n)
            .map(|(_, post)| FeedItem {
                post,
                surface: Surface::LatestVideo,
                provenance: Provenance::LikedPage,
                sponsored: false,
            })
            .collect()
    }

    /// Video feed mixing profile-related videos from any page with
    /// trending videos of attributes outside the profile.
    pub fn main_video_feed<R: Rng + ?Sized>(
        &self,
        world: &World,
        user: UserId,
        tick: u64,
        n: usize,
        rng: &mut R,
    ) -> Vec<FeedItem> {
        if n == 0 {
            return Vec::new();
        }
        let profile = self.profile(world, user, tick);
        let liked = &world.user(user).liked_pages;
        let mut related_items: BTreeMap<AttributeId, Vec<(PostId, f64)>> = BTreeMap::new();
        let mut unrelated_items = Vec::new();
        for page in world.pages() {
            let items = self.page_items(world, page.id, tick, true);
            if profile.score(page.attribute) > 0.0 {
                related_items.entry(page.attribute).or_default().extend(items);
            } else {
                unrelated_items.extend(items);
            }
        }
        let mut related = self.attribute_pools(related_items, &profile, rng);
        let mut unrelated = Pool::new(unrelated_items, rng);
        let share = self.params.video_related_share;
        let quotas = apportion(
            n,
            &[
                if related.is_empty() { 0.0 } else { share },
                if unrelated.is_empty() { 0.0 } else { 1.0 - share },
            ],
        );
        let mut feed = Vec::with_capacity(n);
        for _ in 0..quotas[0] {
            if let Some(post) = related.draw(rng) {
                let from_liked = world.post(post).page().is_some_and(|p| liked.contains(&p));
                feed.push(FeedItem {
                    post,
                    surface: Surface::MainVideo,
                    provenance: if from_liked {
                        Provenance::LikedPage
                    } else {
                        Provenance::Suggested
                    },
                    sponsored: false,
                });
            }
        }
        for _ in 0..quotas[1] {
            if let Some(post) = unrelated.pop() {
                feed.push(FeedItem {
                    post,
                    surface: Surface::MainVideo,
                    provenance: Provenance::TrendingUnrelated,
                    sponsored: false,
                });
            }
        }
        feed.shuffle(rng);
        feed
    }
}

/// Attributes of `user`'s liked pages.
pub fn liked_attributes(world: &World, user: UserId) -> BTreeSet<AttributeId> {
    world
        .user(user)
        .liked_pages
        .iter()
        .map(|p| world.page(*p).attribute)
        .collect()
}
