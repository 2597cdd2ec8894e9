//! Build a small network, publish a week of content, search it and record
//! a few interactions.
//!
//! cargo run --example build_network

use metapriv::world::{
    create_network, Actor, AttributeSpec, EventObject, FriendSpec, NetworkConfig, Span, Verb, ACCOUNT, TICKS_PER_WEEK,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = NetworkConfig::new(vec![
        AttributeSpec::new("cat", 51)
            .with_terms(["cat", "Cat", "kitten", "Kitten"])
            .with_post_rate(Span::new(0.05, 0.15)),
        AttributeSpec::new("guns", 20).with_terms(["guns", "Guns", "rifle"]),
        AttributeSpec::new("cooking recipes", 20).with_video_share(Span::new(0.5, 0.7)),
    ]);
    config.friends = FriendSpec {
        count: 10,
        ..FriendSpec::default()
    };
    let mut world = create_network(&config, 42)?;

    for _ in 0..TICKS_PER_WEEK {
        world.publish_tick();
    }
    let videos = world.posts().iter().filter(|p| p.is_video()).count();
    println!(
        "tick {}: {} pages, {} posts ({videos} videos), {} users",
        world.tick(),
        world.pages().len(),
        world.posts().len(),
        world.users().len()
    );

    let hits = world.search_pages("cat", 5);
    println!("top cat pages:");
    for id in &hits {
        let p = world.page(*id);
        println!("  {:>4} {:<28} popularity {:.2}", p.id, p.name, p.popularity);
    }

    // like the most popular page and its newest post
    let page = hits[0];
    let post = *world.posts_of_page(page).last().expect("the page has posted");
    for (verb, object) in [(Verb::LikePage, EventObject::Page(page)), (Verb::LikePost, EventObject::Post(post))] {
        let event = world.event(Actor::User, ACCOUNT, verb, object);
        world.record_interaction(event)?;
    }
    let again = world.event(Actor::User, ACCOUNT, Verb::LikePage, EventObject::Page(page));
    if let Err(e) = world.record_interaction(again) {
        println!("second like rejected: {e}");
    }
    print!("{}", metapriv::world::to_ndjson_string(world.log()));
    Ok(())
}
