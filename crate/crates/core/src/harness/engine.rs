use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::scenario::{Period, SampleSizes, Scenario, UNRELATED};
use super::HarnessError;
use crate::bot::{bot_step, extended_actions, BotConfig, BotError, CountRange, NoiseAllocation};
use crate::metrics::{
    analyze_feeds, effective_privacy, theoretical_privacy, Classifier, FeedSet, LikeTally, PrivacyReport,
};
use crate::recommender::Recommender;
use crate::rng::{stream, stream_rng};
use crate::world::{
    create_network, Actor, AttributeId, EventObject, InteractionEvent, PostId, Verb, World, ACCOUNT,
};

/// Outcome of one analysed period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyRecord {
    /// 1-based index among analysed periods.
    pub period: usize,
    pub label: String,
    /// First tick covered (inclusive) and the analysis tick (exclusive end).
    pub start_tick: u64,
    pub end_tick: u64,
    /// Post likes of the account within the window, by keyword.
    pub likes: BTreeMap<String, u64>,
    pub unrelated_likes: u64,
    pub total_likes: u64,
    pub cumulative_likes: u64,
    /// Attribute id to keyword for the ids used in `privacy`.
    pub keywords: BTreeMap<AttributeId, String>,
    /// Exact cumulative theoretical privacy as `numerator/denominator`.
    pub p_th_exact: Option<String>,
    pub privacy: PrivacyReport,
}

impl WeeklyRecord {
    pub fn p_th(&self) -> Option<f64> {
        self.privacy.p_th
    }

    pub fn p_eff(&self) -> f64 {
        self.privacy.p_eff
    }

    /// Share of the window's post likes that went to noise attributes.
    pub fn noise_like_share(&self) -> f64 {
        if self.total_likes == 0 {
            return 0.0;
        }
        let noise: u64 = self
            .privacy
            .counts
            .noise_attrs
            .iter()
            .filter_map(|a| self.keywords.get(a))
            .filter_map(|k| self.likes.get(k))
            .sum();
        noise as f64 / self.total_likes as f64
    }
}

/// Run-level counters written to `summary.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub seed: u64,
    pub ticks: u64,
    pub schedule_periods: usize,
    pub records: usize,
    pub events: usize,
    pub events_by_verb: BTreeMap<String, usize>,
    pub posts_published: usize,
    pub bot_steps: usize,
    pub exhausted_steps: usize,
    /// Like targets that could not be met, by period label and keyword.
    pub target_shortfall: BTreeMap<String, BTreeMap<String, u64>>,
    pub final_p_th: Option<f64>,
    pub final_p_eff: Option<f64>,
}

/// Everything produced by a simulation.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub world: World,
    pub records: Vec<WeeklyRecord>,
    pub summary: RunSummary,
}

struct Engine<'s> {
    scenario: &'s Scenario,
    world: World,
    classifier: Classifier,
    records: Vec<WeeklyRecord>,
    window_tick: u64,
    window_log: usize,
    labels: Vec<String>,
}

fn sim_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Simulation(e.to_string())
}

impl<'s> Engine<'s> {
    fn new(scenario: &'s Scenario) -> Result<Self, HarnessError> {
        scenario.validate()?;
        let mut world = create_network(&scenario.network, scenario.seed).map_err(sim_err)?;
        for k in &scenario.real_attributes {
            let a = world.attribute_by_keyword(k).expect("validated keyword");
            world.add_real_attribute(ACCOUNT, a).map_err(sim_err)?;
        }
        let classifier = Classifier::new(world.attributes()).map_err(sim_err)?;
        Ok(Self {
            scenario,
            world,
            classifier,
            records: Vec::new(),
            window_tick: 0,
            window_log: 0,
            labels: Vec::new(),
        })
    }

    fn attr(&self, keyword: &str) -> AttributeId {
        self.world.attribute_by_keyword(keyword).expect("validated keyword")
    }

    /// Allocation weights of a period by attribute id.
    fn allocation(&self, period: &Period) -> Result<Option<Vec<(AttributeId, f64, bool)>>, HarnessError> {
        let Some(spec) = &period.allocation else {
            return Ok(None);
        };
        let graph = self.scenario.keyword_graph()?;
        let resolved = self
            .scenario
            .resolve_allocation(spec, Some(&graph))
            .map_err(|(field, message)| HarnessError::Scenario {
                path: format!("allocation{field}"),
                message,
            })?;
        Ok(Some(resolved.into_iter().map(|(k, w, noise)| (self.attr(&k), w, noise)).collect()))
    }

    /// Registers the noise attributes a period acts on. Real attributes are
    /// registered up front; noise attributes join the account's noise set
    /// when the schedule first uses them.
    fn register_period(&mut self, period: &Period) -> Result<(), HarnessError> {
        let mut noise = BTreeSet::new();
        if let Some(alloc) = self.allocation(period)? {
            noise.extend(alloc.into_iter().filter(|(_, w, n)| *n && *w > 0.0).map(|(a, _, _)| a));
        }
        if let Some(likes) = &period.likes {
            for (k, n) in likes {
                if k != UNRELATED && *n > 0 && !self.scenario.real_attributes.contains(k) {
                    noise.insert(self.attr(k));
                }
            }
        }
        for a in noise {
            self.world.add_noise_attribute(ACCOUNT, a).map_err(sim_err)?;
        }
        Ok(())
    }

    fn sizes(&self, period: &Period) -> SampleSizes {
        period.sample_sizes.unwrap_or(SampleSizes {
            main_feed: self.scenario.analysis.main_feed,
            main_video: self.scenario.analysis.main_video,
            latest_video: self.scenario.analysis.latest_video,
        })
    }

    /// End-of-period feed analysis. Uses its own random stream keyed by the
    /// record index so replays draw identical feeds.
    fn analyze(&mut self, period: &Period) -> Result<(), HarnessError> {
        let plan = &self.scenario.analysis;
        let sizes = self.sizes(period);
        let tick = self.world.tick();
        let index = self.records.len() as u64;
        let mut rng = stream_rng(self.scenario.seed, stream::ANALYSIS, index);
        let rec = Recommender::new(&self.scenario.recommender);
        let world = &self.world;
        let feeds = FeedSet {
            main: rec.main_feed(world, ACCOUNT, tick, sizes.main_feed, &mut rng),
            main_video: rec.main_video_feed(world, ACCOUNT, tick, sizes.main_video, &mut rng),
            latest_video: rec.latest_video_feed(world, ACCOUNT, tick, sizes.latest_video),
        };
        let user = world.user(ACCOUNT);
        let counts = analyze_feeds(world, &feeds, &self.classifier, &user.real_attrs, &user.noise_attrs, plan.policy);
        let effective = effective_privacy(&counts, plan.grouping).map_err(sim_err)?;

        let own = |e: &&InteractionEvent| e.subject == ACCOUNT;
        let cumulative = LikeTally::from_events(world.log().iter().filter(own));
        let window = LikeTally::from_events(world.log()[self.window_log..].iter().filter(own));
        let theoretical = theoretical_privacy(&cumulative, &user.real_attrs, &user.noise_attrs).ok();

        let keywords: BTreeMap<AttributeId, String> = world
            .attributes()
            .iter()
            .filter(|a| user.real_attrs.contains(&a.id) || user.noise_attrs.contains(&a.id))
            .map(|a| (a.id, a.keyword.clone()))
            .collect();
        let likes = window
            .per_attribute
            .iter()
            .map(|(a, n)| (world.attribute(*a).keyword.clone(), *n))
            .collect();
        let label = self.labels.join(" + ");
        let record = WeeklyRecord {
            period: self.records.len() + 1,
            label,
            start_tick: self.window_tick,
            end_tick: tick,
            likes,
            unrelated_likes: window.unrelated,
            total_likes: window.total(),
            cumulative_likes: cumulative.total(),
            keywords,
            p_th_exact: theoretical.as_ref().map(|t| t.exact.to_string()),
            privacy: PrivacyReport::new(theoretical.as_ref(), &effective, counts, plan.verdict_threshold),
        };
        self.records.push(record);
        self.window_tick = tick;
        self.window_log = self.world.log().len();
        self.labels.clear();
        Ok(())
    }

    fn end_period(&mut self, period: &Period, index: usize) -> Result<(), HarnessError> {
        self.labels.push(if period.label.is_empty() {
            format!("period {}", index + 1)
        } else {
            period.label.clone()
        });
        if period.analyze {
            self.analyze(period)?;
        }
        Ok(())
    }

    fn start(&mut self, apply: &mut dyn FnMut(&mut World) -> Result<(), HarnessError>) -> Result<(), HarnessError> {
        for _ in 0..self.scenario.warmup_ticks {
            apply(&mut self.world)?;
            self.world.publish_tick();
        }
        self.window_tick = self.world.tick();
        self.window_log = self.world.log().len();
        Ok(())
    }
}

/// Per-run state of the activity generators.
struct Actors {
    bot_rng: ChaCha8Rng,
    user_rng: ChaCha8Rng,
    extended_rng: ChaCha8Rng,
    next_bot: u64,
    pending_extended: Option<(u64, String)>,
    bot_steps: usize,
    exhausted_steps: usize,
}

/// Runs a scenario in memory.
pub fn simulate(scenario: &Scenario) -> Result<RunOutput, HarnessError> {
    let mut engine = Engine::new(scenario)?;
    engine.start(&mut |_| Ok(()))?;
    let seed = scenario.seed;
    let mut actors = Actors {
        bot_rng: stream_rng(seed, stream::BOT, 0),
        user_rng: stream_rng(seed, stream::USER, 0),
        extended_rng: stream_rng(seed, stream::EXTENDED, 0),
        next_bot: engine.world.tick(),
        pending_extended: None,
        bot_steps: 0,
        exhausted_steps: 0,
    };
    let mut shortfall = BTreeMap::new();

    for (index, period) in scenario.schedule.iter().enumerate() {
        engine.register_period(period)?;
        let start = engine.world.tick();
        let end = start + period.duration;
        let allocation = match engine.allocation(period)? {
            Some(weights) => {
                let map = weights.iter().map(|(a, w, _)| (*a, *w)).collect();
                Some(NoiseAllocation::from_weights(&map, start..end).map_err(sim_err)?)
            }
            None => None,
        };
        let mut targets: BTreeMap<AttributeId, u64> = BTreeMap::new();
        let mut unrelated = 0;
        if let Some(likes) = &period.likes {
            for (k, n) in likes {
                if k == UNRELATED {
                    unrelated = *n;
                } else if *n > 0 {
                    targets.insert(engine.attr(k), *n);
                }
            }
            actors.next_bot = start;
        }

        while engine.world.tick() < end {
            let tick = engine.world.tick();
            if tick >= actors.next_bot {
                if let Some(alloc) = &allocation {
                    scheduled_step(&mut engine.world, alloc, &scenario.bot, period, &mut actors)?;
                } else if !targets.is_empty() {
                    target_step(&mut engine.world, &mut targets, &scenario.bot, end, &mut actors)?;
                }
            }
            // whatever is still open on the last tick is done back to back
            if tick + 1 == end {
                while targets.values().any(|n| *n > 0) {
                    target_step(&mut engine.world, &mut targets, &scenario.bot, end, &mut actors)?;
                }
            }
            if let Some((at, keyword)) = actors.pending_extended.clone() {
                if at == tick {
                    let rec = Recommender::new(&scenario.recommender);
                    extended_actions(
                        &mut engine.world,
                        ACCOUNT,
                        &keyword,
                        &scenario.bot,
                        &rec,
                        &mut actors.extended_rng,
                    )
                    .map_err(sim_err)?;
                    actors.pending_extended = None;
                }
            }
            if unrelated > 0 && like_friend_post(&mut engine.world)? {
                unrelated -= 1;
            }
            user_activity(&mut engine.world, scenario, period.user_activity, &mut actors.user_rng)?;
            engine.world.publish_tick();
        }

        let mut missing: BTreeMap<String, u64> = targets
            .iter()
            .filter(|(_, n)| **n > 0)
            .map(|(a, n)| (engine.world.attribute(*a).keyword.clone(), *n))
            .collect();
        if unrelated > 0 {
            missing.insert(UNRELATED.to_string(), unrelated);
        }
        if !missing.is_empty() {
            let label = if period.label.is_empty() {
                format!("period {}", index + 1)
            } else {
                period.label.clone()
            };
            shortfall.insert(label, missing);
        }
        engine.end_period(period, index)?;
    }

    let world = engine.world;
    let mut events_by_verb = BTreeMap::new();
    for e in world.log() {
        *events_by_verb.entry(e.verb.as_str().to_string()).or_insert(0) += 1;
    }
    let last = engine.records.last();
    let summary = RunSummary {
        name: scenario.name.clone(),
        seed: scenario.seed,
        ticks: world.tick(),
        schedule_periods: scenario.schedule.len(),
        records: engine.records.len(),
        events: world.log().len(),
        events_by_verb,
        posts_published: world.posts().len(),
        bot_steps: actors.bot_steps,
        exhausted_steps: actors.exhausted_steps,
        target_shortfall: shortfall,
        final_p_th: last.and_then(|r| r.p_th()),
        final_p_eff: last.map(|r| r.p_eff()),
    };
    Ok(RunOutput {
        world,
        records: engine.records,
        summary,
    })
}

/// One bot iteration under a stochastic allocation.
fn scheduled_step(
    world: &mut World,
    allocation: &NoiseAllocation,
    config: &BotConfig,
    period: &Period,
    actors: &mut Actors,
) -> Result<(), HarnessError> {
    let tick = world.tick();
    match bot_step(world, ACCOUNT, allocation, config, &mut actors.bot_rng) {
        Ok(step) => {
            actors.bot_steps += 1;
            actors.next_bot = tick + step.wait;
            if period.extended && step.actor == Actor::Bot && step.wait >= 2 {
                let keyword = world.attribute(step.attribute).keyword.clone();
                actors.pending_extended = Some((tick + 1, keyword));
            }
            Ok(())
        }
        Err(BotError::Exhausted { .. }) => {
            actors.exhausted_steps += 1;
            actors.next_bot = tick + config.wait_range.min;
            Ok(())
        }
        Err(e) => Err(sim_err(e)),
    }
}

/// One bot iteration working towards exact like targets: the attribute is
/// drawn in proportion to the remaining targets, the like count is capped
/// by what remains, and waits shrink when the period would otherwise end
/// before the targets are met.
fn target_step(
    world: &mut World,
    targets: &mut BTreeMap<AttributeId, u64>,
    config: &BotConfig,
    end: u64,
    actors: &mut Actors,
) -> Result<(), HarnessError> {
    let tick = world.tick();
    let open: Vec<(AttributeId, u64)> = targets.iter().filter(|(_, n)| **n > 0).map(|(a, n)| (*a, *n)).collect();
    if open.is_empty() {
        return Ok(());
    }
    let total: u64 = open.iter().map(|(_, n)| n).sum();
    let mut target = actors.bot_rng.random_range(0..total);
    let mut attribute = open[0].0;
    for (a, n) in &open {
        if target < *n {
            attribute = *a;
            break;
        }
        target -= n;
    }
    let remaining = targets[&attribute];
    let range = config.likes_per_page_range;
    let capped = BotConfig {
        likes_per_page_range: CountRange::new(range.min.min(remaining), range.max.min(remaining)),
        ..config.clone()
    };
    let allocation = NoiseAllocation::from_weights(&BTreeMap::from([(attribute, 1.0)]), tick..end).map_err(sim_err)?;
    match bot_step(world, ACCOUNT, &allocation, &capped, &mut actors.bot_rng) {
        Ok(step) => {
            actors.bot_steps += 1;
            let left = targets.get_mut(&attribute).expect("open target");
            *left = left.saturating_sub(step.post_likes() as u64);
            let still: u64 = targets.values().sum();
            let mean = ((range.min + range.max) / 2).max(1);
            let steps_left = still.div_ceil(mean).max(1);
            // aim to finish within three quarters of the remaining time
            let pace = ((end - tick) * 3 / 4 / steps_left).max(1);
            actors.next_bot = tick + step.wait.min(pace);
        }
        Err(BotError::Exhausted { attribute }) => {
            return Err(HarnessError::Simulation(format!(
                "like target for `{}` cannot be met: every searchable page is already liked",
                world.attribute(attribute).keyword
            )));
        }
        Err(e) => return Err(sim_err(e)),
    }
    Ok(())
}

/// Likes the newest unliked post of any friend; false when none exists.
fn like_friend_post(world: &mut World) -> Result<bool, HarnessError> {
    let user = world.user(ACCOUNT);
    let newest = user
        .friends
        .iter()
        .flat_map(|f| world.posts_of_friend(*f).iter().copied())
        .filter(|p| !user.liked_posts.contains(p))
        .max_by_key(|p| (world.post(*p).created, std::cmp::Reverse(*p)));
    let Some(post) = newest else { return Ok(false) };
    let event = world.event(Actor::User, ACCOUNT, Verb::LikePost, EventObject::Post(post));
    world.record_interaction(event).map_err(sim_err)?;
    Ok(true)
}

/// Organic likes by the account's owner: `Poisson(rate)` likes per tick,
/// each on the newest unliked post of a page of a random real attribute
/// (preferring pages the account already likes).
fn user_activity(world: &mut World, scenario: &Scenario, rate: f64, rng: &mut ChaCha8Rng) -> Result<(), HarnessError> {
    if rate <= 0.0 {
        return Ok(());
    }
    let count = Poisson::new(rate).map(|d| d.sample(rng) as u64).unwrap_or(0);
    for _ in 0..count {
        let keyword = &scenario.real_attributes[rng.random_range(0..scenario.real_attributes.len())];
        let attr = world.attribute_by_keyword(keyword).expect("validated keyword");
        let user = world.user(ACCOUNT);
        let liked: Vec<_> = world
            .pages_of_attribute(attr)
            .iter()
            .copied()
            .filter(|p| user.liked_pages.contains(p))
            .collect();
        let pages = if liked.is_empty() {
            world.pages_of_attribute(attr).to_vec()
        } else {
            liked
        };
        if pages.is_empty() {
            continue;
        }
        let page = pages[rng.random_range(0..pages.len())];
        let post: Option<PostId> = world
            .posts_of_page(page)
            .iter()
            .rev()
            .copied()
            .find(|p| !user.liked_posts.contains(p));
        if let Some(post) = post {
            let event = world.event(Actor::User, ACCOUNT, Verb::LikePost, EventObject::Post(post));
            world.record_interaction(event).map_err(sim_err)?;
        }
    }
    Ok(())
}

/// Recomputes the records of a run from its event log: the world is
/// rebuilt from the scenario, publishing is replayed tick by tick and the
/// logged events are applied at their ticks.
pub fn replay(scenario: &Scenario, events: &[InteractionEvent]) -> Result<Vec<WeeklyRecord>, HarnessError> {
    if events.is_empty() {
        return Err(HarnessError::Log("no periods: the event log is empty".into()));
    }
    let mut engine = Engine::new(scenario)?;
    let mut next = 0usize;
    let mut apply = |world: &mut World| -> Result<(), HarnessError> {
        while next < events.len() && events[next].tick <= world.tick() {
            let event = &events[next];
            if event.tick < world.tick() {
                return Err(HarnessError::Log(format!(
                    "line {}: tick {} is out of order",
                    next + 1,
                    event.tick
                )));
            }
            world
                .record_interaction(event.clone())
                .map_err(|e| HarnessError::Log(format!("line {}: {e}", next + 1)))?;
            next += 1;
        }
        Ok(())
    };
    engine.start(&mut apply)?;
    for (index, period) in scenario.schedule.iter().enumerate() {
        engine.register_period(period)?;
        let end = engine.world.tick() + period.duration;
        while engine.world.tick() < end {
            apply(&mut engine.world)?;
            engine.world.publish_tick();
        }
        engine.end_period(period, index)?;
    }
    if next < events.len() {
        return Err(HarnessError::Log(format!(
            "line {}: tick {} lies beyond the schedule end {}",
            next + 1,
            events[next].tick,
            engine.world.tick()
        )));
    }
    Ok(engine.records)
}
