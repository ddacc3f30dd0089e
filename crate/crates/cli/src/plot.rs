//! Static log-log scatter plots written as SVG.

use crate::report::format_float;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// `y = prefactor·x^slope` from a least-squares fit.
    pub fit: Option<(f64, f64)>,
    /// Claimed slope, drawn dashed through the last point.
    pub claimed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn coord(v: f64) -> String {
    format!("{v:.2}")
}

impl Plot {
    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| (x.log10(), y.log10()))
            .collect();
        let bounds = |sel: fn(&(f64, f64)) -> f64| {
            let lo = pts.iter().map(sel).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() {
                (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
            } else {
                (0.0, 1.0)
            }
        };
        let (x0, x1) = bounds(|p| p.0);
        let (y0, y1) = bounds(|p| p.1);
        let sx = |lx: f64| MARGIN + (lx - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |ly: f64| HEIGHT - MARGIN - (ly - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(svg, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
        for k in x0 as i64..=x1 as i64 {
            let x = coord(sx(k as f64));
            let _ = writeln!(svg, r#"<line x1="{x}" y1="{b}" x2="{x}" y2="{}" stroke="black"/>"#, b + 5.0);
            let _ = writeln!(svg, r#"<text x="{x}" y="{}" text-anchor="middle">1e{k}</text>"#, b + 18.0);
        }
        for k in y0 as i64..=y1 as i64 {
            let y = coord(sy(k as f64));
            let _ = writeln!(svg, r#"<line x1="{}" y1="{y}" x2="{l}" y2="{y}" stroke="black"/>"#, l - 5.0);
            let _ = writeln!(svg, r#"<text x="{}" y="{y}" text-anchor="end" dy="4">1e{k}</text>"#, l - 8.0);
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(svg, r#"<clipPath id="frame"><rect x="{l}" y="{t}" width="{}" height="{}"/></clipPath>"#, r - l, b - t);
        let _ = writeln!(svg, r#"<g clip-path="url(#frame)">"#);
        let line = |svg: &mut String, color: &str, dash: &str, slope: f64, lx: f64, ly: f64| {
            let ya = ly + slope * (x0 - lx);
            let yb = ly + slope * (x1 - lx);
            let _ = writeln!(
                svg,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1"{dash}/>"#,
                coord(sx(x0)),
                coord(sy(ya)),
                coord(sx(x1)),
                coord(sy(yb))
            );
        };
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let visible: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|&&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
                .map(|&(x, y)| (x.log10(), y.log10()))
                .collect();
            for &(lx, ly) in &visible {
                let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, coord(sx(lx)), coord(sy(ly)));
            }
            if let Some((slope, prefactor)) = s.fit {
                if prefactor > 0.0 {
                    line(&mut svg, color, "", slope, 0.0, prefactor.log10());
                }
            }
            if let (Some(slope), Some(&(lx, ly))) = (s.claimed, visible.last()) {
                line(&mut svg, color, r#" stroke-dasharray="5,4""#, slope, lx, ly);
            }
        }
        let _ = writeln!(svg, "</g>");
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let y = t + 16.0 + 16.0 * i as f64;
            let mut label = escape(&s.label);
            if let Some((slope, _)) = s.fit {
                let _ = write!(label, " (fit {})", format_slope(slope));
            }
            if let Some(c) = s.claimed {
                let _ = write!(label, " (claimed {})", format_slope(c));
            }
            let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, l + 12.0, y - 4.0);
            let _ = writeln!(svg, r#"<text x="{}" y="{y}">{label}</text>"#, l + 20.0);
        }
        let _ = writeln!(svg, "</svg>");
        svg
    }
}

fn format_slope(v: f64) -> String {
    let s = format_float(v);
    match s.parse::<f64>() {
        Ok(x) => format!("{x:.4}"),
        Err(_) => s,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_points_and_lines() {
        let plot = Plot {
            title: "I3 <vs> eps".into(),
            x_label: "eps".into(),
            y_label: "value".into(),
            series: vec![Series {
                label: "I3".into(),
                points: vec![(0.1, 1e-3), (0.01, 1e-6), (0.0, 5.0)],
                fit: Some((3.0, 1.0)),
                claimed: Some(3.0),
            }],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("I3 &lt;vs&gt; eps"));
        assert_eq!(svg, plot.render());
    }
}
