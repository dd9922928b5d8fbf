//! Minimal SVG charts: exploitability curves and strategy pictures.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];
/// Log-scale floor for nonpositive values.
const LOG_FLOOR: f64 = 1e-6;

pub fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[derive(Debug, Clone, Default)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// `(x, lo, hi)` shaded around the line.
    pub band: Vec<(f64, f64, f64)>,
    /// Draw as a right-continuous step function.
    pub step: bool,
    pub dashed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
    log_y: bool,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }
    fn py(&self, y: f64) -> f64 {
        let (y, lo, hi) = if self.log_y {
            (y.max(LOG_FLOOR).log10(), self.y.0.log10(), self.y.1.log10())
        } else {
            (y, self.y.0, self.y.1)
        };
        H - BOTTOM - (y - lo) / (hi - lo) * (H - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

impl LineChart {
    fn axes(&self) -> Axes {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0));
        let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
        let ys = self
            .series
            .iter()
            .flat_map(|s| {
                s.points
                    .iter()
                    .map(|p| p.1)
                    .chain(s.band.iter().flat_map(|b| [b.1, b.2]))
            })
            .filter(|y| y.is_finite());
        let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
            (a.min(y), b.max(y))
        });
        let y = if self.log_y {
            let lo = 10f64.powf(y0.max(LOG_FLOOR).log10().floor());
            let hi = 10f64.powf(y1.max(LOG_FLOOR).log10().ceil());
            (lo, if hi <= lo { lo * 10.0 } else { hi })
        } else {
            padded(y0.min(0.0), y1)
        };
        Axes {
            x: padded(x0, x1),
            y,
            log_y: self.log_y,
        }
    }

    pub fn render(&self) -> String {
        let axes = self.axes();
        let mut svg = header(&self.title);
        frame(&mut svg, &axes, &self.x_label, &self.y_label);
        for (k, s) in self.series.iter().enumerate() {
            let c = color(k);
            if !s.band.is_empty() {
                let mut d = String::new();
                for (x, _, hi) in &s.band {
                    let _ = write!(
                        d,
                        "{}{:.2},{:.2} ",
                        if d.is_empty() { "M" } else { "L" },
                        axes.px(*x),
                        axes.py(*hi)
                    );
                }
                for (x, lo, _) in s.band.iter().rev() {
                    let _ = write!(d, "L{:.2},{:.2} ", axes.px(*x), axes.py(*lo));
                }
                let _ = writeln!(
                    svg,
                    r#"<path d="{d}Z" fill="{c}" fill-opacity="0.2" stroke="none"/>"#
                );
            }
            let mut d = String::new();
            let mut last: Option<f64> = None;
            for &(x, y) in &s.points {
                if s.step {
                    if let Some(prev) = last {
                        let _ = write!(d, "L{:.2},{:.2} ", axes.px(x), axes.py(prev));
                    }
                }
                let _ = write!(
                    d,
                    "{}{:.2},{:.2} ",
                    if d.is_empty() { "M" } else { "L" },
                    axes.px(x),
                    axes.py(y)
                );
                last = Some(y);
            }
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                svg,
                r#"<path d="{d}" fill="none" stroke="{c}" stroke-width="1.8"{dash}/>"#
            );
            let ly = TOP + 16.0 + 18.0 * k as f64;
            let _ = writeln!(
                svg,
                r#"<line x1="{x0}" y1="{ly}" x2="{x1}" y2="{ly}" stroke="{c}" stroke-width="2"{dash}/><text x="{tx}" y="{ty}" font-size="12">{label}</text>"#,
                x0 = W - RIGHT + 10.0,
                x1 = W - RIGHT + 30.0,
                tx = W - RIGHT + 36.0,
                ty = ly + 4.0,
                label = escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        (W - RIGHT + LEFT) / 2.0,
        escape(title)
    )
}

fn frame(svg: &mut String, axes: &Axes, x_label: &str, y_label: &str) {
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    for k in 0..=4 {
        let x = axes.x.0 + (axes.x.1 - axes.x.0) * k as f64 / 4.0;
        let px = axes.px(x);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            b + 16.0,
            tick(x)
        );
    }
    let ticks: Vec<f64> = if axes.log_y {
        let (lo, hi) = (
            axes.y.0.log10().round() as i32,
            axes.y.1.log10().round() as i32,
        );
        (lo..=hi).map(|e| 10f64.powi(e)).collect()
    } else {
        (0..=4)
            .map(|k| axes.y.0 + (axes.y.1 - axes.y.0) * k as f64 / 4.0)
            .collect()
    };
    for y in ticks {
        let py = axes.py(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{l}" y1="{py:.2}" x2="{r}" y2="{py:.2}" stroke="#dddddd"/><text x="{}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"##,
            l - 6.0,
            py + 4.0,
            tick(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{y}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
        escape(y_label),
        y = (t + b) / 2.0
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// One atom drawn at `(x, y)` with opacity proportional to its probability.
#[derive(Debug, Clone, Copy)]
pub struct Dot {
    pub x: f64,
    pub y: f64,
    pub opacity: f64,
    pub group: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outline {
    Square,
    Circle,
    Triangle,
}

/// Atom scatter over the unit square `[0,1]²` (or the unit disc for circles,
/// whose points are given in `[-1,1]²`).
pub fn scatter(title: &str, outline: Outline, dots: &[Dot], groups: &[String]) -> String {
    let side = H - TOP - BOTTOM;
    let (ox, oy) = (LEFT, TOP);
    let map = |x: f64, y: f64| -> (f64, f64) {
        match outline {
            Outline::Circle => (ox + (x + 1.0) / 2.0 * side, oy + (1.0 - y) / 2.0 * side),
            _ => (ox + x * side, oy + (1.0 - y) * side),
        }
    };
    let mut svg = header(title);
    match outline {
        Outline::Square => {
            let _ = writeln!(
                svg,
                r#"<rect x="{ox}" y="{oy}" width="{side}" height="{side}" fill="none" stroke="black"/>"#
            );
        }
        Outline::Circle => {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="black"/>"#,
                ox + side / 2.0,
                oy + side / 2.0,
                side / 2.0
            );
        }
        Outline::Triangle => {
            let pts = [(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)].map(|(x, y)| map(x, y));
            let _ = writeln!(
                svg,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="black"/>"#,
                pts[0].0, pts[0].1, pts[1].0, pts[1].1, pts[2].0, pts[2].1
            );
        }
    }
    for d in dots {
        let (px, py) = map(d.x, d.y);
        let _ = writeln!(
            svg,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="5" fill="{}" fill-opacity="{:.3}"/>"#,
            color(d.group),
            d.opacity.clamp(0.03, 1.0)
        );
    }
    for (k, g) in groups.iter().enumerate() {
        let ly = TOP + 16.0 + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{ly}" r="5" fill="{}"/><text x="{}" y="{}" font-size="12">{}</text>"#,
            W - RIGHT + 20.0,
            color(k),
            W - RIGHT + 32.0,
            ly + 4.0,
            escape(g)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
