//! Minimal SVG line plots with a logarithmic y axis.

use std::fmt::Write as _;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    /// Non-finite or non-positive `y` values break the line.
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Positions of vertical markers (divergences).
    pub markers: Vec<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    pub fn render(&self) -> String {
        let usable = |y: f64| y.is_finite() && y > 0.0;
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
        let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let (x_lo, x_hi) = if x_lo.is_finite() && x_hi > x_lo { (x_lo, x_hi) } else { (0.0, 1.0) };

        let mut ys: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .filter(|&y| usable(y))
            .collect();
        ys.sort_by(f64::total_cmp);
        // Spikes near divergences would flatten everything else; clip at a
        // high quantile instead of the maximum.
        let (y_lo, y_hi) = if ys.is_empty() {
            (0.1, 10.0)
        } else {
            let q = ys[((ys.len() - 1) as f64 * 0.98) as usize];
            (ys[0], q.max(ys[0] * 10.0))
        };
        let (d_lo, d_hi) = (y_lo.log10().floor(), y_hi.log10().ceil());
        let d_hi = if d_hi <= d_lo { d_lo + 1.0 } else { d_hi };

        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
        let sy = |y: f64| {
            let l = y.log10().clamp(d_lo, d_hi);
            TOP + (d_hi - l) / (d_hi - d_lo) * ph
        };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );

        let mut d = d_lo as i32;
        while d as f64 <= d_hi {
            let y = sy(10f64.powi(d));
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.1}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0
            );
            d += 1;
        }
        for k in 0..=5 {
            let x = x_lo + (x_hi - x_lo) * k as f64 / 5.0;
            let px = sx(x);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 18.0,
                trim_tick(x)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for &m in &self.markers {
            if m >= x_lo && m <= x_hi {
                let px = sx(m);
                let _ = writeln!(
                    s,
                    r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="2,3"/>"##,
                    TOP + ph
                );
            }
        }

        for (k, series) in self.series.iter().enumerate() {
            let colour = COLOURS[k % COLOURS.len()];
            let dash = if series.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let mut run: Vec<String> = Vec::new();
            let flush = |run: &mut Vec<String>, s: &mut String| {
                if run.len() >= 2 {
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{colour}" stroke-width="1.4"{dash} points="{}"/>"#,
                        run.join(" ")
                    );
                }
                run.clear();
            };
            for &(x, y) in &series.points {
                if usable(y) {
                    run.push(format!("{:.2},{:.2}", sx(x), sy(y)));
                } else {
                    flush(&mut run, &mut s);
                }
            }
            flush(&mut run, &mut s);
            if series.points.len() == 1 && usable(series.points[0].1) {
                let (x, y) = series.points[0];
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{colour}"/>"#, sx(x), sy(y));
            }
            let ly = TOP + 14.0 + 18.0 * k as f64;
            let lx = LEFT + pw + 10.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 22.0,
                lx + 28.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn trim_tick(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breaks_lines_at_divergences() {
        let mut p = Plot::new("t", "T_H", "sensitivity");
        p.series.push(Series::new(
            "a<b",
            vec![(0.0, 1.0), (1.0, 0.5), (2.0, f64::INFINITY), (3.0, 0.2), (4.0, 0.1)],
        ));
        p.markers.push(2.0);
        let svg = p.render();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains("stroke-dasharray=\"2,3\""));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_plot_still_renders() {
        assert!(Plot::new("", "", "").render().contains("</svg>"));
    }
}
