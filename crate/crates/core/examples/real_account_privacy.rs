//! Effective privacy of the two long-lived accounts from their analysed
//! feed counts, under both denominator readings.
//!
//! cargo run --example real_account_privacy

use metapriv::metrics::{effective_privacy, FeedCounts, Grouping, PrivacyReport, SurfaceCounts};

fn main() {
    // main, suggested, main video, latest video
    let accounts = [
        ("A", SurfaceCounts::new(86, 11, 27, 123), SurfaceCounts::new(127, 67, 15, 9), SurfaceCounts::new(596, 136, 300, 132)),
        ("B", SurfaceCounts::new(79, 4, 30, 100), SurfaceCounts::new(27, 4, 14, 200), SurfaceCounts::new(300, 59, 300, 300)),
    ];
    for (name, real, noise, seen) in accounts {
        let related = FeedCounts::from_groups(real, noise);
        let e = effective_privacy(&related, Grouping::Grouped).expect("valid counts");
        let report = PrivacyReport::new(None, &e, related, 0.1);
        println!("account {name}: {}", report.summary_line());
        println!("  real fractions  {:?}", report.real.fractions.map(|f| (f * 1000.0).round() / 1000.0));
        println!("  noise fractions {:?}", report.noise.fractions.map(|f| (f * 1000.0).round() / 1000.0));

        // every analysed item in the denominator, unrelated ones included
        let full = FeedCounts::with_totals(real, noise, seen, metapriv::metrics::DenominatorPolicy::FullTotal);
        let f = effective_privacy(&full, Grouping::Grouped).expect("valid counts");
        println!("  over full surface totals: P_eff {:.4}", f.value());
    }
}
