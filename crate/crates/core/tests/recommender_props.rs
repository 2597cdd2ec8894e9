//! Large-sample and ordering properties of the recommender surrogate.

use std::collections::BTreeMap;

use metapriv::recommender::{interest_profile, Provenance, Recommender, RecommenderParams};
use metapriv::rng::stream_rng;
use metapriv::world::{
    create_network, Actor, AttributeId, AttributeSpec, EventObject, NetworkConfig, PageId, Span, Verb, World, ACCOUNT,
};

fn world(attrs: &[(&str, u32)], rate: f64, video: f64, seed: u64) -> World {
    let config = NetworkConfig::new(
        attrs
            .iter()
            .map(|(k, n)| {
                AttributeSpec::new(*k, *n)
                    .with_post_rate(Span::fixed(rate))
                    .with_video_share(Span::fixed(video))
            })
            .collect(),
    );
    create_network(&config, seed).unwrap()
}

fn like_page(w: &mut World, page: PageId) {
    let e = w.event(Actor::User, ACCOUNT, Verb::LikePage, EventObject::Page(page));
    w.record_interaction(e).unwrap();
}

/// Likes the newest unliked post of one of `pages`, cycling through them.
fn like_newest(w: &mut World, pages: &[PageId], turn: usize) -> bool {
    for k in 0..pages.len() {
        let page = pages[(turn + k) % pages.len()];
        let liked = &w.user(ACCOUNT).liked_posts;
        let post = w
            .posts_of_page(page)
            .iter()
            .rev()
            .copied()
            .find(|p| !liked.contains(p) && w.post(*p).created <= w.tick());
        if let Some(post) = post {
            let e = w.event(Actor::User, ACCOUNT, Verb::LikePost, EventObject::Post(post));
            w.record_interaction(e).unwrap();
            return true;
        }
    }
    false
}

#[test]
fn liked_page_shares_follow_a_stationary_70_20_10_profile() {
    let mut w = world(&[("cat", 7), ("guns", 2), ("cooking", 1)], 0.4, 0.2, 17);
    for _ in 0..200 {
        w.publish_tick();
    }
    let pages: Vec<Vec<PageId>> = (0..3).map(|a| w.pages_of_attribute(AttributeId(a)).to_vec()).collect();
    for group in &pages {
        for p in group {
            like_page(&mut w, *p);
        }
    }
    // every block of 10 ticks: 7 cat, 2 guns, 1 cooking likes, interleaved
    let pattern = [0, 1, 0, 0, 2, 0, 1, 0, 0, 0];
    for tick in 0..336usize {
        let attr = pattern[tick % 10];
        assert!(like_newest(&mut w, &pages[attr], tick));
        w.publish_tick();
    }

    let params = RecommenderParams::default();
    let rec = Recommender::new(&params);
    let tick = w.tick();
    let mut counts = [0usize; 3];
    let mut feeds = 0;
    while counts.iter().sum::<usize>() < 10_000 {
        let mut rng = stream_rng(3, 1, feeds);
        for item in rec.main_feed(&w, ACCOUNT, tick, 100, &mut rng) {
            if item.provenance == Provenance::LikedPage {
                counts[w.post_attribute(item.post).unwrap().0 as usize] += 1;
            }
        }
        feeds += 1;
    }
    let total = counts.iter().sum::<usize>() as f64;
    let shares: Vec<f64> = counts.iter().map(|c| *c as f64 / total).collect();
    let normalized = rec.profile(&w, ACCOUNT, tick).normalized();
    for (i, target) in [0.7, 0.2, 0.1].into_iter().enumerate() {
        assert!((shares[i] - target).abs() <= 0.05, "attribute {i}: {:.3} vs {target}", shares[i]);
        let score = normalized[&AttributeId(i as u32)];
        assert!((shares[i] - score).abs() <= 0.05, "attribute {i}: {:.3} vs score {score:.3}", shares[i]);
    }
}

#[test]
fn main_video_feed_mixes_thirty_percent_related() {
    let mut w = world(&[("cat", 40), ("guns", 30), ("chess", 30)], 0.3, 0.6, 23);
    for _ in 0..240 {
        w.publish_tick();
    }
    let cat_pages = w.pages_of_attribute(AttributeId(0)).to_vec();
    like_page(&mut w, cat_pages[0]);
    for t in 0..20 {
        like_newest(&mut w, &cat_pages, t);
    }

    let params = RecommenderParams::default();
    let rec = Recommender::new(&params);
    let (mut cat, mut total) = (0usize, 0usize);
    let mut i = 0;
    while total < 10_000 {
        let mut rng = stream_rng(4, 1, i);
        for item in rec.main_video_feed(&w, ACCOUNT, w.tick(), 100, &mut rng) {
            assert!(w.post(item.post).is_video());
            cat += (w.post_attribute(item.post) == Some(AttributeId(0))) as usize;
            total += 1;
        }
        i += 1;
    }
    let share = cat as f64 / total as f64;
    assert!((share - 0.30).abs() <= 0.03, "cat share {share:.3}");
}

#[test]
fn later_likes_dominate_earlier_ones() {
    let params = RecommenderParams::default();
    for (count, gap) in [(1usize, 1u64), (5, 30), (40, 200)] {
        let mut w = world(&[("a", 5), ("b", 5)], 0.5, 0.0, 31);
        for _ in 0..100 {
            w.publish_tick();
        }
        let a = w.pages_of_attribute(AttributeId(0)).to_vec();
        let b = w.pages_of_attribute(AttributeId(1)).to_vec();
        for t in 0..count {
            like_newest(&mut w, &a, t);
        }
        for _ in 0..gap {
            w.publish_tick();
        }
        for t in 0..count {
            like_newest(&mut w, &b, t);
        }
        for _ in 0..1000 {
            let p = interest_profile(&w, ACCOUNT, w.tick(), &params);
            assert!(p.score(AttributeId(1)) > p.score(AttributeId(0)));
            w.publish_tick();
        }
    }
}

#[test]
fn scores_decay_strictly_toward_zero() {
    let params = RecommenderParams::default();
    let mut w = world(&[("a", 3)], 1.0, 0.0, 41);
    w.publish_tick();
    let pages = w.pages_of_attribute(AttributeId(0)).to_vec();
    for t in 0..3 {
        like_newest(&mut w, &pages, t);
    }
    let at = |tick| interest_profile(&w, ACCOUNT, tick, &params).score(AttributeId(0));
    let mut prev = at(w.tick());
    for tick in w.tick() + 1..w.tick() + 20 * 336 {
        let s = at(tick);
        assert!(s < prev && s >= 0.0, "tick {tick}");
        prev = s;
    }
    assert!(prev < 1e-6);
}

#[test]
fn feeds_are_reproducible_per_rng_stream() {
    let mut w = world(&[("cat", 10), ("guns", 10)], 0.3, 0.3, 5);
    for _ in 0..100 {
        w.publish_tick();
    }
    let pages = w.pages_of_attribute(AttributeId(0)).to_vec();
    like_page(&mut w, pages[0]);
    let params = RecommenderParams::default();
    let rec = Recommender::new(&params);
    let run = |i| {
        let mut rng = stream_rng(8, 5, i);
        rec.main_feed(&w, ACCOUNT, w.tick(), 60, &mut rng)
    };
    assert_eq!(run(0), run(0));
    assert_ne!(run(0), run(1));
    let per_attr: BTreeMap<_, usize> = run(0)
        .iter()
        .filter(|i| i.provenance == Provenance::LikedPage)
        .fold(BTreeMap::new(), |mut m, i| {
            *m.entry(w.post_attribute(i.post)).or_default() += 1;
            m
        });
    assert_eq!(per_attr.keys().collect::<Vec<_>>(), vec![&Some(AttributeId(0))]);
}
