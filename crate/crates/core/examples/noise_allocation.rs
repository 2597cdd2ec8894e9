//! Split interactions between real and noise attributes, then run the bot
//! loop and compare realised like shares with the targets.
//!
//! cargo run --example noise_allocation

use std::collections::BTreeMap;

use metapriv::bot::{bot_step, build_allocation, BotConfig};
use metapriv::rng::stream_rng;
use metapriv::world::{create_network, AttributeId, AttributeSpec, NetworkConfig, Span, ACCOUNT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let keywords = ["cat", "guns", "cooking recipes"];
    let config = NetworkConfig::new(
        keywords
            .iter()
            .map(|k| AttributeSpec::new(*k, 300).with_post_rate(Span::fixed(0.4)))
            .collect(),
    );
    let mut world = create_network(&config, 6)?;
    for _ in 0..100 {
        world.publish_tick();
    }
    let (cat, guns, cooking) = (AttributeId(0), AttributeId(1), AttributeId(2));
    world.add_real_attribute(ACCOUNT, cat)?;
    world.add_noise_attribute(ACCOUNT, guns)?;
    world.add_noise_attribute(ACCOUNT, cooking)?;

    // 50% noise split 3:2 between guns and cooking
    let weights = BTreeMap::from([(guns, 3.0), (cooking, 2.0)]);
    let allocation = build_allocation(&[cat], &[guns, cooking], 0.5, Some(&weights))?;
    for (a, r) in allocation.ratios() {
        println!("target {:<16} {r:.2}", world.attribute(*a).keyword);
    }

    let bot = BotConfig::default();
    let mut rng = stream_rng(6, 2, 0);
    let mut likes: BTreeMap<AttributeId, usize> = BTreeMap::new();
    let mut waited = 0;
    for _ in 0..300 {
        let step = bot_step(&mut world, ACCOUNT, &allocation, &bot, &mut rng)?;
        *likes.entry(step.attribute).or_default() += step.post_likes();
        waited += step.wait;
    }
    let total: usize = likes.values().sum();
    println!("300 steps, {total} post likes, {waited} ticks of waiting");
    for (a, n) in &likes {
        println!("actual {:<16} {:.3}", world.attribute(*a).keyword, *n as f64 / total as f64);
    }
    Ok(())
}
