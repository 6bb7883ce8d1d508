//! Line charts with one-standard-deviation bands, written as plain SVG.

use std::fmt::Write;

use rewardrig_gridworld::SeriesStats;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
/// Points drawn per curve; longer series are averaged into buckets.
pub const MAX_POINTS: usize = 400;

pub struct Curve<'a> {
    pub label: String,
    pub color: &'static str,
    pub dashed: bool,
    pub stats: &'a SeriesStats,
}

/// `(episode, mean, std)` triples, bucket-averaged down to at most `max_points`.
pub fn downsample(stats: &SeriesStats, max_points: usize) -> Vec<(f64, f64, f64)> {
    let n = stats.len();
    let bucket = n.div_ceil(max_points.max(1)).max(1);
    (0..n)
        .step_by(bucket)
        .map(|start| {
            let end = (start + bucket).min(n);
            let k = (end - start) as f64;
            let mean = stats.mean[start..end].iter().sum::<f64>() / k;
            let std = stats.std[start..end].iter().sum::<f64>() / k;
            ((start + end + 1) as f64 / 2.0, mean, std)
        })
        .collect()
}

fn nice_step(span: f64, ticks: usize) -> f64 {
    let raw = span / ticks as f64;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    if step > 0.0 {
        step
    } else {
        1.0
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(title: &str, curves: &[Curve]) -> String {
    let series: Vec<Vec<(f64, f64, f64)>> = curves.iter().map(|c| downsample(c.stats, MAX_POINTS)).collect();
    let episodes = curves.iter().map(|c| c.stats.len()).max().unwrap_or(1).max(1) as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, m, s) in series.iter().flatten() {
        lo = lo.min(m - s);
        hi = hi.max(m + s);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let y_step = nice_step(hi - lo, 6);
    lo = (lo / y_step).floor() * y_step;
    hi = (hi / y_step).ceil() * y_step;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |e: f64| LEFT + plot_w * e / episodes;
    let y = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let mut v = lo;
    while v <= hi + y_step / 2.0 {
        let yy = y(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            yy + 4.0,
            trim(v)
        );
        v += y_step;
    }
    let x_step = nice_step(episodes, 5);
    let mut e = 0.0;
    while e <= episodes + x_step / 2.0 {
        let xx = x(e);
        let _ = writeln!(
            svg,
            r##"<line x1="{xx:.1}" y1="{:.1}" x2="{xx:.1}" y2="{:.1}" stroke="#999"/><text x="{xx:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0,
            HEIGHT - BOTTOM + 19.0,
            trim(e)
        );
        e += x_step;
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">episode</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">start-state value</text>"#,
        TOP + plot_h / 2.0
    );

    for (curve, points) in curves.iter().zip(&series) {
        let mut band = String::new();
        for (i, (e, m, s)) in points.iter().enumerate() {
            let _ = write!(band, "{}{:.1},{:.1} ", if i == 0 { "M" } else { "L" }, x(*e), y(m + s));
        }
        for (e, m, s) in points.iter().rev() {
            let _ = write!(band, "L{:.1},{:.1} ", x(*e), y(m - s));
        }
        let _ = writeln!(
            svg,
            r#"<path d="{}Z" fill="{}" fill-opacity="0.12" stroke="none"/>"#,
            band, curve.color
        );
    }
    for (curve, points) in curves.iter().zip(&series) {
        let line: Vec<String> = points
            .iter()
            .map(|(e, m, _)| format!("{:.1},{:.1}", x(*e), y(*m)))
            .collect();
        let dash = if curve.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
            line.join(" "),
            curve.color
        );
    }
    for (i, curve) in curves.iter().enumerate() {
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT - 220.0;
        let dash = if curve.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 24.0,
            curve.color,
            lx + 30.0,
            ly + 4.0,
            escape(&curve.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn trim(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(n: usize) -> SeriesStats {
        SeriesStats {
            mean: (0..n).map(|i| i as f64).collect(),
            std: vec![1.0; n],
        }
    }

    #[test]
    fn downsampling_keeps_short_series_and_averages_long_ones() {
        let s = series(10);
        let d = downsample(&s, 400);
        assert_eq!(d.len(), 10);
        assert_eq!(d[3], (4.0, 3.0, 1.0));
        let s = series(1000);
        let d = downsample(&s, 400);
        assert!(d.len() <= 400);
        assert_eq!(d[0], (2.0, 1.0, 1.0));
    }

    #[test]
    fn chart_has_one_band_and_line_per_curve() {
        let s = series(50);
        let curves = [
            Curve {
                label: "a".into(),
                color: "red",
                dashed: false,
                stats: &s,
            },
            Curve {
                label: "b <true>".into(),
                color: "blue",
                dashed: true,
                stats: &s,
            },
        ];
        let svg = render("t", &curves);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("fill-opacity").count(), 2);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert!(svg.contains("b &lt;true&gt;"));
    }

    #[test]
    fn constant_series_still_get_a_range() {
        let s = SeriesStats {
            mean: vec![2.0; 5],
            std: vec![0.0; 5],
        };
        let svg = render(
            "flat",
            &[Curve {
                label: "x".into(),
                color: "red",
                dashed: false,
                stats: &s,
            }],
        );
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(nice_step(10.0, 5), 2.0);
        assert_eq!(nice_step(20000.0, 5), 5000.0);
        assert_eq!(nice_step(0.9, 6), 0.2);
    }
}
