//! Statistical behaviour of the bot loop over 10^4 iterations.
//!
//! Pages are never liked twice, so long runs are split into chunks on fresh
//! worlds large enough that no attribute runs out.

use std::collections::{BTreeMap, BTreeSet};

use metapriv::bot::{bot_step, build_allocation, BotConfig, CountRange};
use metapriv::rng::stream_rng;
use metapriv::world::{create_network, AttributeId, AttributeSpec, NetworkConfig, Span, Verb, World, ACCOUNT};

struct Run {
    /// Drawn attribute per step.
    choices: Vec<AttributeId>,
    waits: Vec<u64>,
    likes: BTreeMap<AttributeId, u64>,
}

fn chunk_world(keywords: &[(&str, u32)], seed: u64, real: &[u32], noise: &[u32]) -> World {
    let config = NetworkConfig::new(
        keywords
            .iter()
            .map(|(k, n)| AttributeSpec::new(*k, *n).with_post_rate(Span::fixed(0.5)))
            .collect(),
    );
    let mut w = create_network(&config, seed).unwrap();
    for _ in 0..80 {
        w.publish_tick();
    }
    for a in real {
        w.add_real_attribute(ACCOUNT, AttributeId(*a)).unwrap();
    }
    for a in noise {
        w.add_noise_attribute(ACCOUNT, AttributeId(*a)).unwrap();
    }
    w
}

fn run_steps(
    keywords: &[(&str, u32)],
    real: &[u32],
    noise: &[u32],
    level: f64,
    weights: Option<&BTreeMap<AttributeId, f64>>,
    config: &BotConfig,
    steps: usize,
    chunk: usize,
) -> Run {
    let mut run = Run {
        choices: Vec::new(),
        waits: Vec::new(),
        likes: BTreeMap::new(),
    };
    let real_ids: Vec<AttributeId> = real.iter().map(|a| AttributeId(*a)).collect();
    let noise_ids: Vec<AttributeId> = noise.iter().map(|a| AttributeId(*a)).collect();
    let allocation = build_allocation(&real_ids, &noise_ids, level, weights).unwrap();
    for c in 0..steps.div_ceil(chunk) {
        let mut w = chunk_world(keywords, 1000 + c as u64, real, noise);
        let mut rng = stream_rng(77, 2, c as u64);
        for _ in 0..chunk.min(steps - run.choices.len()) {
            let step = bot_step(&mut w, ACCOUNT, &allocation, config, &mut rng).expect("no exhaustion, no re-likes");
            run.choices.push(step.attribute);
            run.waits.push(step.wait);
            *run.likes.entry(step.attribute).or_default() += step.post_likes() as u64;
        }
        // re-likes would have errored inside bot_step; double check the log
        let pages: Vec<_> = w.log().iter().filter(|e| e.verb == Verb::LikePage).map(|e| e.object.clone()).collect();
        let unique: BTreeSet<String> = pages.iter().map(|o| format!("{o:?}")).collect();
        assert_eq!(unique.len(), pages.len());
    }
    run
}

fn like_share(run: &Run, attr: u32) -> f64 {
    let total: u64 = run.likes.values().sum();
    run.likes.get(&AttributeId(attr)).copied().unwrap_or(0) as f64 / total as f64
}

#[test]
fn ten_percent_noise_over_ten_thousand_steps() {
    let config = BotConfig::default();
    let run = run_steps(&[("cat", 900), ("guns", 200)], &[0], &[1], 0.1, None, &config, 10_000, 500);
    let guns = like_share(&run, 1);
    assert!((guns - 0.10).abs() <= 0.02, "guns like share {guns:.4}");
}

#[test]
fn week_six_split_within_three_points() {
    let config = BotConfig::default();
    let weights = BTreeMap::from([(AttributeId(1), 3.0), (AttributeId(2), 2.0)]);
    let run = run_steps(
        &[("cat", 600), ("guns", 400), ("cooking", 300)],
        &[0],
        &[1, 2],
        0.5,
        Some(&weights),
        &config,
        10_000,
        500,
    );
    for (attr, target) in [(0, 0.5), (1, 0.3), (2, 0.2)] {
        let share = like_share(&run, attr);
        assert!((share - target).abs() <= 0.03, "attribute {attr}: {share:.4} vs {target}");
    }
}

#[test]
fn waits_are_uniform_on_the_configured_range() {
    let config = BotConfig {
        wait_range: CountRange::new(1, 5),
        likes_per_page_range: CountRange::new(1, 3),
        ..BotConfig::default()
    };
    let run = run_steps(&[("cat", 800), ("guns", 800)], &[0], &[1], 0.5, None, &config, 10_000, 1000);
    let mut observed = [0f64; 5];
    for w in &run.waits {
        assert!((1..=5).contains(w));
        observed[(*w - 1) as usize] += 1.0;
    }
    let expected = run.waits.len() as f64 / 5.0;
    let chi2: f64 = observed.iter().map(|o| (o - expected).powi(2) / expected).sum();
    // 4 degrees of freedom, p = 0.01
    assert!(chi2 < 13.277, "chi-square {chi2:.3}, counts {observed:?}");
}

#[test]
fn attribute_choices_show_no_serial_pattern() {
    let config = BotConfig {
        likes_per_page_range: CountRange::new(1, 2),
        ..BotConfig::default()
    };
    let run = run_steps(&[("cat", 800), ("guns", 800)], &[0], &[1], 0.3, None, &config, 10_000, 1000);
    let x: Vec<f64> = run.choices.iter().map(|a| (a.0 == 1) as u8 as f64).collect();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    // i.i.d. sample autocorrelations are about N(0, 1/n)
    let bound = 3.5 / n.sqrt();
    for lag in 1..=10 {
        let cov: f64 = (0..x.len() - lag).map(|i| (x[i] - mean) * (x[i + lag] - mean)).sum::<f64>() / n;
        let r = cov / var;
        assert!(r.abs() < bound, "lag {lag}: r = {r:.4} (bound {bound:.4})");
    }
}
