//! Static SVG regret plots: one mean line per algorithm over a shaded
//! ±1 standard-error band.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::simulator::AggregatedResult;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotOptions {
    pub log_x: bool,
    pub log_y: bool,
    pub title: Option<String>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 3] = ["none", "8,4", "2,3"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Maps data to pixels on one axis.
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(mut lo: f64, mut hi: f64, log: bool, px_lo: f64, px_hi: f64) -> Self {
        if log {
            lo = lo.log10();
            hi = hi.log10();
        }
        if hi - lo < 1e-12 {
            // A flat series still gets a visible range around it.
            let pad = if log { 1.0 } else { lo.abs().max(1.0) };
            lo -= pad;
            hi += pad;
        }
        Self {
            lo,
            hi,
            log,
            px_lo,
            px_hi,
        }
    }

    fn px(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    /// Tick values in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            return (a..=b).map(|e| 10f64.powi(e)).collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|i| i as f64 * step).collect()
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e5 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders the plot as an SVG document.
pub fn render_svg(agg: &AggregatedResult, opts: &PlotOptions) -> Result<String> {
    if agg.series.is_empty() || agg.checkpoints.is_empty() {
        return Err(Error::config("plot needs at least one series with data"));
    }
    let xs: Vec<f64> = agg.checkpoints.iter().map(|&t| t as f64).collect();
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in &agg.series {
        for (m, e) in s.mean.iter().zip(&s.stderr) {
            y_lo = y_lo.min(m - e);
            y_hi = y_hi.max(m + e);
        }
    }
    // Log axes clamp nonpositive values to the smallest positive one.
    let positive_floor = agg
        .series
        .iter()
        .flat_map(|s| s.mean.iter().zip(&s.stderr).flat_map(|(m, e)| [m - e, *m]))
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let positive_floor = if positive_floor.is_finite() { positive_floor } else { 1.0 };
    let clamp_y = |v: f64| if opts.log_y { v.max(positive_floor) } else { v };
    if !opts.log_y {
        y_lo = y_lo.min(0.0);
    }
    let x_axis = Axis::new(xs[0], xs[xs.len() - 1], opts.log_x, LEFT, WIDTH - RIGHT);
    let y_axis = Axis::new(clamp_y(y_lo), clamp_y(y_hi.max(y_lo)), opts.log_y, HEIGHT - BOTTOM, TOP);

    let mut svg = String::new();
    let w = &mut svg;
    // Writing to a String cannot fail.
    let _ = writeln!(
        w,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    if let Some(title) = &opts.title {
        let _ = writeln!(
            w,
            r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
    }
    // Axes and ticks.
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        w,
        r#"<g stroke="black" stroke-width="1" fill="none"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    );
    let _ = writeln!(w, r#"<g font-family="sans-serif" font-size="11" fill="black">"#);
    for t in x_axis.ticks() {
        let px = x_axis.px(t);
        let _ = writeln!(
            w,
            r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            fmt_tick(t)
        );
    }
    for t in y_axis.ticks() {
        let py = y_axis.px(t);
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">round t{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        if opts.log_x { " (log scale)" } else { "" }
    );
    let _ = writeln!(
        w,
        r#"<text x="20" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 20 {:.2})">cumulative regret{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        if opts.log_y { " (log scale)" } else { "" }
    );
    let _ = writeln!(w, "</g>");

    // Bands first so every line sits on top of every band.
    for (i, s) in agg.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (j, x) in xs.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2},{:.2} ",
                if j == 0 { "M" } else { "L" },
                x_axis.px(*x),
                y_axis.px(clamp_y(s.mean[j] + s.stderr[j]))
            );
        }
        for (j, x) in xs.iter().enumerate().rev() {
            let _ = write!(d, "L{:.2},{:.2} ", x_axis.px(*x), y_axis.px(clamp_y(s.mean[j] - s.stderr[j])));
        }
        let _ = writeln!(
            w,
            r#"<path class="band" d="{}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            d
        );
    }
    for (i, s) in agg.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = DASHES[(i / COLORS.len() + i) % DASHES.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(&s.mean)
            .map(|(x, m)| format!("{:.2},{:.2}", x_axis.px(*x), y_axis.px(clamp_y(*m))))
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline class="mean" points="{}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/>"#,
            points.join(" ")
        );
    }
    // Legend.
    let _ = writeln!(w, r#"<g class="legend" font-family="sans-serif" font-size="12">"#);
    for (i, s) in agg.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = DASHES[(i / COLORS.len() + i) % DASHES.len()];
        let y = TOP + 12.0 + 18.0 * i as f64;
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + 12.0,
            LEFT + 42.0,
            LEFT + 48.0,
            y + 4.0,
            escape(&s.algorithm)
        );
    }
    let _ = writeln!(w, "</g>\n</svg>");
    Ok(svg)
}

pub fn write_svg(agg: &AggregatedResult, path: &Path, opts: &PlotOptions) -> Result<()> {
    let svg = render_svg(agg, opts)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::Series;

    fn agg(series: Vec<(&str, Vec<f64>, Vec<f64>)>) -> AggregatedResult {
        let n = series[0].1.len();
        AggregatedResult {
            experiment_id: "e".into(),
            checkpoints: (1..=n).map(|i| i * 10).collect(),
            series: series
                .into_iter()
                .map(|(name, mean, stderr)| Series {
                    algorithm: name.into(),
                    mean,
                    stderr,
                    n_runs: 3,
                })
                .collect(),
        }
    }

    #[test]
    fn flat_zero_series_is_horizontal() {
        let a = agg(vec![("oracle", vec![0.0; 5], vec![0.0; 5])]);
        let svg = render_svg(&a, &PlotOptions::default()).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let line = doc
            .descendants()
            .find(|n| n.attribute("class") == Some("mean"))
            .unwrap();
        let ys: Vec<&str> = line
            .attribute("points")
            .unwrap()
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn two_series_two_legend_entries_distinct_styles() {
        let a = agg(vec![
            ("mbe & co", vec![1.0, 2.0, 3.0], vec![0.1, 0.2, 0.3]),
            ("ts:bernoulli", vec![1.5, 2.5, 3.5], vec![0.1, 0.1, 0.1]),
        ]);
        for opts in [
            PlotOptions::default(),
            PlotOptions {
                log_x: true,
                log_y: true,
                title: Some("<regret>".into()),
            },
        ] {
            let svg = render_svg(&a, &opts).unwrap();
            let doc = roxmltree::Document::parse(&svg).unwrap();
            assert_eq!(doc.root_element().tag_name().name(), "svg");
            let lines: Vec<_> = doc.descendants().filter(|n| n.attribute("class") == Some("mean")).collect();
            assert_eq!(lines.len(), 2);
            assert_ne!(lines[0].attribute("stroke"), lines[1].attribute("stroke"));
            assert_ne!(lines[0].attribute("stroke-dasharray"), lines[1].attribute("stroke-dasharray"));
            let legend = doc.descendants().find(|n| n.attribute("class") == Some("legend")).unwrap();
            let texts: Vec<_> = legend.descendants().filter(|n| n.has_tag_name("text")).collect();
            assert_eq!(texts.len(), 2);
            assert_eq!(texts[0].text(), Some("mbe & co"));
            assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("band")).count(), 2);
        }
    }

    #[test]
    fn empty_is_rejected() {
        let a = AggregatedResult {
            experiment_id: "e".into(),
            checkpoints: vec![],
            series: vec![],
        };
        assert!(render_svg(&a, &PlotOptions::default()).is_err());
    }
}
