//! Minimal static SVG line and scatter plots.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dots,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
    /// Lower limit for the y axis; smaller values are clipped to it.
    pub y_min: Option<f64>,
    pub series: Vec<Series>,
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool, floor: Option<f64>) -> Option<Axis> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            let v = match floor {
                Some(f) => v.max(f),
                None => v,
            };
            if !v.is_finite() || (log && v <= 0.0) {
                continue;
            }
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() {
            return None;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Some(Axis { lo, hi, log })
    }

    fn frac(&self, v: f64) -> Option<f64> {
        let t = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        t.is_finite().then(|| (t - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let span = (self.hi - self.lo) as i64;
            let step = [1, 2, 5, 10, 20, 50, 100].into_iter().find(|s| span / s <= 10).unwrap_or(200);
            (self.lo as i64..=self.hi as i64)
                .filter(|e| e.rem_euclid(step) == 0)
                .map(|e| ((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
            let mut out = Vec::new();
            let mut t = (self.lo / step).ceil() * step;
            while t <= self.hi + 1e-9 * step {
                out.push(((t - self.lo) / (self.hi - self.lo), format!("{}", (t / step).round() * step)));
                t += step;
            }
            out
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn render(&self) -> String {
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, esc(&self.title)).unwrap();

        let xs = Axis::fit(self.series.iter().flat_map(|r| r.points.iter().map(|p| p.0)), self.x_log, None);
        let ys = Axis::fit(self.series.iter().flat_map(|r| r.points.iter().map(|p| p.1)), self.y_log, self.y_min);
        let (Some(xa), Some(mut ya)) = (xs, ys) else {
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">no data</text></svg>"#, W / 2.0, H / 2.0).unwrap();
            return s;
        };
        if let Some(m) = self.y_min {
            ya.lo = if ya.log { m.log10() } else { m };
        }

        writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
        for (f, label) in xa.ticks() {
            let x = LEFT + f * pw;
            writeln!(s, r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0).unwrap();
            writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{label}</text>"#, TOP + ph + 19.0).unwrap();
        }
        for (f, label) in ya.ticks() {
            let y = TOP + ph - f * ph;
            writeln!(s, r#"<line x1="{}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/>"#, LEFT - 5.0).unwrap();
            writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#, LEFT - 8.0, y + 4.0).unwrap();
        }
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 15.0, esc(&self.x_label)).unwrap();
        writeln!(
            s,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            TOP + ph / 2.0,
            esc(&self.y_label)
        )
        .unwrap();

        let floor = self.y_min.unwrap_or(f64::NEG_INFINITY);
        for (i, r) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mapped: Vec<(f64, f64)> = r
                .points
                .iter()
                .filter_map(|&(x, y)| {
                    let fx = xa.frac(x)?;
                    let fy = ya.frac(y.max(floor))?;
                    Some((LEFT + fx * pw, TOP + ph - fy.clamp(0.0, 1.0) * ph))
                })
                .collect();
            match r.style {
                Style::Line => {
                    let mut d = String::new();
                    for (j, (x, y)) in mapped.iter().enumerate() {
                        write!(d, "{}{x:.1},{y:.1}", if j == 0 { "M" } else { " L" }).unwrap();
                    }
                    writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#).unwrap();
                }
                Style::Dots => {
                    write!(s, r#"<g fill="{color}">"#).unwrap();
                    for (x, y) in &mapped {
                        write!(s, r#"<rect x="{x:.1}" y="{y:.1}" width="1" height="1"/>"#).unwrap();
                    }
                    writeln!(s, "</g>").unwrap();
                }
            }
            let ly = TOP + 16.0 + 16.0 * i as f64;
            writeln!(
                s,
                r#"<rect x="{}" y="{}" width="14" height="3" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
                LEFT + 12.0,
                ly - 5.0,
                LEFT + 32.0,
                ly,
                esc(&r.label)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Keeps at most `max` points, taking the largest `y` in each bucket so
/// peaks survive on log plots.
pub fn envelope(points: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    if points.len() <= max || max == 0 {
        return points.to_vec();
    }
    let bucket = points.len().div_ceil(max);
    points
        .chunks(bucket)
        .map(|c| *c.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap())
        .collect()
}

/// Every `n`-th point, keeping at most `max`.
pub fn thin(points: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    let step = points.len().div_ceil(max.max(1)).max(1);
    points.iter().step_by(step).copied().collect()
}
