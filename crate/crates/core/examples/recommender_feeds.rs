//! Interest profile and the three analysed feeds of an account that likes
//! cats and, more recently, guns.
//!
//! cargo run --example recommender_feeds

use std::collections::BTreeMap;

use metapriv::recommender::{Provenance, Recommender, RecommenderParams};
use metapriv::rng::stream_rng;
use metapriv::world::{
    create_network, Actor, AttributeId, AttributeSpec, EventObject, FriendSpec, NetworkConfig, Span, Verb, World,
    ACCOUNT,
};

fn like_newest(world: &mut World, attr: AttributeId, n: usize) {
    let pages = world.pages_of_attribute(attr)[..3].to_vec();
    for page in &pages {
        if !world.user(ACCOUNT).liked_pages.contains(page) {
            let e = world.event(Actor::User, ACCOUNT, Verb::LikePage, EventObject::Page(*page));
            world.record_interaction(e).unwrap();
        }
    }
    let liked = world.user(ACCOUNT).liked_posts.clone();
    let posts: Vec<_> = pages
        .iter()
        .flat_map(|p| world.posts_of_page(*p).iter().copied())
        .filter(|p| !liked.contains(p))
        .take(n)
        .collect();
    for post in posts {
        let e = world.event(Actor::User, ACCOUNT, Verb::LikePost, EventObject::Post(post));
        world.record_interaction(e).unwrap();
    }
}

fn main() {
    let mut config = NetworkConfig::new(vec![
        AttributeSpec::new("cat", 20).with_post_rate(Span::fixed(0.2)),
        AttributeSpec::new("guns", 20).with_post_rate(Span::fixed(0.2)).with_video_share(Span::fixed(0.5)),
        AttributeSpec::new("travel", 20).with_post_rate(Span::fixed(0.2)),
    ]);
    config.friends = FriendSpec {
        count: 15,
        ..FriendSpec::default()
    };
    let mut world = create_network(&config, 9).unwrap();
    let (cat, guns) = (AttributeId(0), AttributeId(1));

    for _ in 0..168 {
        world.publish_tick();
    }
    like_newest(&mut world, cat, 40);
    for _ in 0..168 {
        world.publish_tick();
    }
    like_newest(&mut world, guns, 15);

    let params = RecommenderParams::default();
    let rec = Recommender::new(&params);
    let tick = world.tick();
    let profile = rec.profile(&world, ACCOUNT, tick);
    for (a, s) in profile.normalized() {
        println!("profile {:<8} {s:.3}", world.attribute(a).keyword);
    }

    let mut rng = stream_rng(9, 5, 0);
    let feed = rec.main_feed(&world, ACCOUNT, tick, 200, &mut rng);
    let mut by_source: BTreeMap<String, usize> = BTreeMap::new();
    for item in &feed {
        let attr = world.post_attribute(item.post).map_or("-", |a| world.attribute(a).keyword.as_str());
        let source = match (item.provenance, item.sponsored) {
            (Provenance::Suggested, true) => "sponsored".to_string(),
            (p, _) => format!("{p:?}"),
        };
        *by_source.entry(format!("{source:<18} {attr}")).or_default() += 1;
    }
    println!("main feed, {} items:", feed.len());
    for (k, n) in by_source {
        println!("  {k:<28} {n}");
    }

    let latest = rec.latest_video_feed(&world, ACCOUNT, tick, 10);
    println!("latest videos from liked pages: {}", latest.len());
    let videos = rec.main_video_feed(&world, ACCOUNT, tick, 100, &mut rng);
    let related = videos.iter().filter(|v| profile.score(world.post_attribute(v.post).unwrap()) > 0.0).count();
    println!("main video feed: {related} of {} profile-related", videos.len());
}
