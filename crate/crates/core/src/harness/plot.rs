//! Static SVG charts of a run's records. Output is plain text with fixed
//! number formatting, so equal records give byte-identical files.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::WeeklyRecord;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// One value per period; `None` leaves a gap.
    pub values: Vec<Option<f64>>,
    pub dashed: bool,
}

/// A line chart (or stacked bar chart) over the analysed periods.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub y_label: String,
    pub x_labels: Vec<String>,
    pub series: Vec<Series>,
    pub stacked_bars: bool,
}

impl Chart {
    /// Value range of the y axis. Always includes the data; a constant
    /// series is padded so the line sits mid-chart.
    pub fn y_range(&self) -> (f64, f64) {
        let values: Vec<f64> = if self.stacked_bars {
            (0..self.x_labels.len())
                .map(|i| self.series.iter().filter_map(|s| s.values[i]).sum())
                .chain([0.0])
                .collect()
        } else {
            self.series.iter().flat_map(|s| s.values.iter().flatten().copied()).collect()
        };
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() || !hi.is_finite() {
            return (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo.abs() < 1e-12 { 1.0 } else { lo.abs() * 0.1 };
            return (lo - pad, hi + pad);
        }
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }

    fn x(&self, i: usize) -> f64 {
        let n = self.x_labels.len();
        let plot = WIDTH - LEFT - RIGHT;
        if n <= 1 {
            LEFT + plot / 2.0
        } else {
            LEFT + plot * i as f64 / (n - 1) as f64
        }
    }

    fn y(&self, v: f64, (lo, hi): (f64, f64)) -> f64 {
        let plot = HEIGHT - TOP - BOTTOM;
        TOP + plot * (hi - v) / (hi - lo)
    }

    pub fn to_svg(&self) -> String {
        let range = self.y_range();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        self.axes(&mut s, range);
        if self.stacked_bars {
            self.bars(&mut s, range);
        } else {
            self.lines(&mut s, range);
        }
        self.legend(&mut s);
        s.push_str("</svg>\n");
        s
    }

    fn axes(&self, s: &mut String, range: (f64, f64)) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(s, r##"<g stroke="#333" stroke-width="1">"##);
        let _ = writeln!(s, r#"<line x1="{x0:.1}" y1="{y1:.1}" x2="{x1:.1}" y2="{y1:.1}"/>"#);
        let _ = writeln!(s, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}"/>"#);
        s.push_str("</g>\n");
        for k in 0..=4 {
            let v = range.0 + (range.1 - range.0) * k as f64 / 4.0;
            let y = self.y(v, range);
            let _ = writeln!(
                s,
                r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
                x0 - 6.0,
                y + 4.0
            );
        }
        if range.0 < 0.0 && range.1 > 0.0 {
            let y = self.y(0.0, range);
            let _ = writeln!(s, r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#999"/>"##);
        }
        for (i, label) in self.x_labels.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                self.x(i),
                y1 + 18.0,
                escape(label)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">period</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
    }

    fn lines(&self, s: &mut String, range: (f64, f64)) {
        for (k, series) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            // split at gaps
            let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
            for (i, v) in series.values.iter().enumerate() {
                match v {
                    Some(v) => runs.last_mut().expect("non-empty").push((self.x(i), self.y(*v, range))),
                    None => runs.push(Vec::new()),
                }
            }
            for run in runs.iter().filter(|r| !r.is_empty()) {
                let points: Vec<String> = run.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
                    points.join(" ")
                );
                if !series.dashed {
                    for (x, y) in run {
                        let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#);
                    }
                }
            }
        }
    }

    fn bars(&self, s: &mut String, range: (f64, f64)) {
        let n = self.x_labels.len().max(1);
        let step = if n == 1 { 80.0 } else { (self.x(1) - self.x(0)).abs() };
        let width = (step * 0.6).min(60.0);
        for i in 0..self.x_labels.len() {
            let mut base = 0.0;
            for (k, series) in self.series.iter().enumerate() {
                let v = series.values[i].unwrap_or(0.0);
                if v <= 0.0 {
                    continue;
                }
                let (top, bottom) = (self.y(base + v, range), self.y(base, range));
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.1}" y="{top:.1}" width="{width:.1}" height="{:.1}" fill="{}"/>"#,
                    self.x(i) - width / 2.0,
                    bottom - top,
                    PALETTE[k % PALETTE.len()]
                );
                base += v;
            }
        }
    }

    fn legend(&self, s: &mut String) {
        let x = WIDTH - RIGHT + 15.0;
        for (k, series) in self.series.iter().enumerate() {
            let y = TOP + 10.0 + 18.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                y - 10.0,
                PALETTE[k % PALETTE.len()],
                x + 18.0,
                y,
                escape(&series.name)
            );
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn keywords(records: &[WeeklyRecord]) -> Vec<String> {
    // in attribute-id order, so colours are stable across charts
    let mut ids = BTreeSet::new();
    for r in records {
        ids.extend(r.keywords.iter().map(|(a, k)| (*a, k.clone())));
    }
    ids.into_iter().map(|(_, k)| k).collect()
}

/// Builds the run's charts: privacy, strengths, like ratios and
/// cumulative likes.
pub fn charts(records: &[WeeklyRecord]) -> Vec<(&'static str, Chart)> {
    let x_labels: Vec<String> = records.iter().map(|r| r.period.to_string()).collect();
    let threshold = records.first().map_or(0.1, |r| r.privacy.threshold);
    let series = |name: &str, values: Vec<Option<f64>>, dashed| Series {
        name: name.to_string(),
        values,
        dashed,
    };
    let privacy = Chart {
        title: "Theoretical and effective privacy".into(),
        y_label: "privacy".into(),
        x_labels: x_labels.clone(),
        series: vec![
            series("P_th", records.iter().map(|r| r.p_th()).collect(), false),
            series("P_eff", records.iter().map(|r| Some(r.p_eff())).collect(), false),
            series(
                &format!("threshold {threshold:.2}"),
                records.iter().map(|_| Some(threshold)).collect(),
                true,
            ),
        ],
        stacked_bars: false,
    };
    let strength = Chart {
        title: "Effective attribute strength".into(),
        y_label: "strength".into(),
        x_labels: x_labels.clone(),
        series: vec![
            series("real", records.iter().map(|r| Some(r.privacy.real.strength)).collect(), false),
            series("noise", records.iter().map(|r| Some(r.privacy.noise.strength)).collect(), false),
        ],
        stacked_bars: false,
    };
    let names = keywords(records);
    let ratios = Chart {
        title: "Share of post likes per period".into(),
        y_label: "share of likes".into(),
        x_labels: x_labels.clone(),
        series: names
            .iter()
            .map(|k| {
                let values = records
                    .iter()
                    .map(|r| {
                        let n = r.likes.get(k).copied().unwrap_or(0);
                        Some(if r.total_likes == 0 {
                            0.0
                        } else {
                            n as f64 / r.total_likes as f64
                        })
                    })
                    .collect();
                series(k, values, false)
            })
            .collect(),
        stacked_bars: true,
    };
    let cumulative = Chart {
        title: "Cumulative post likes".into(),
        y_label: "likes".into(),
        x_labels,
        series: names
            .iter()
            .map(|k| {
                let mut total = 0;
                let values = records
                    .iter()
                    .map(|r| {
                        total += r.likes.get(k).copied().unwrap_or(0);
                        Some(total as f64)
                    })
                    .collect();
                series(k, values, false)
            })
            .collect(),
        stacked_bars: false,
    };
    vec![
        ("privacy.svg", privacy),
        ("strength.svg", strength),
        ("like_ratios.svg", ratios),
        ("cumulative_likes.svg", cumulative),
    ]
}

/// File names and SVG text of every chart.
pub fn render_plots(records: &[WeeklyRecord]) -> Vec<(&'static str, String)> {
    charts(records).into_iter().map(|(name, c)| (name, c.to_svg())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(values: Vec<Option<f64>>) -> Chart {
        Chart {
            title: "t".into(),
            y_label: "y".into(),
            x_labels: (1..=values.len()).map(|i| i.to_string()).collect(),
            series: vec![Series {
                name: "s".into(),
                values,
                dashed: false,
            }],
            stacked_bars: false,
        }
    }

    #[test]
    fn constant_series_is_padded_and_flat() {
        let c = chart(vec![Some(0.5); 4]);
        let (lo, hi) = c.y_range();
        assert!(lo < 0.5 && hi > 0.5);
        let svg = c.to_svg();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let ys: BTreeSet<&str> = line
            .split("points=\"")
            .nth(1)
            .unwrap()
            .trim_end_matches("\"/>")
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(ys.len(), 1);
    }

    #[test]
    fn single_point_renders() {
        let svg = chart(vec![Some(0.2)]).to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<circle"));
    }

    #[test]
    fn gaps_split_the_line() {
        let svg = chart(vec![None, Some(1.0), Some(2.0), None, Some(3.0)]).to_svg();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn all_zero_range() {
        assert_eq!(chart(vec![Some(0.0)]).y_range(), (-1.0, 1.0));
        assert_eq!(chart(vec![None]).y_range(), (0.0, 1.0));
    }
}
