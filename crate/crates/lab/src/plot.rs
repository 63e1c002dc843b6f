//! Minimal static SVG charts: error-bar points and polylines on linear axes.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 55.0); // left, right, top, bottom
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug)]
pub enum Style {
    Points,
    Line,
    Dashed,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub xy: Vec<(f64, f64)>,
    pub err: Option<Vec<f64>>,
    pub style: Style,
}

impl Series {
    pub fn points(label: &str, xy: Vec<(f64, f64)>, err: Option<Vec<f64>>) -> Self {
        Series { label: label.into(), xy, err, style: Style::Points }
    }
    pub fn line(label: &str, xy: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), xy, err: None, style: Style::Line }
    }
    pub fn dashed(label: &str, xy: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), xy, err: None, style: Style::Dashed }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Chart {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub series: Vec<Series>,
    /// Equal scaling on both axes (ellipse plots).
    pub square: bool,
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    out
}

impl Chart {
    pub fn new(title: &str, xlabel: &str, ylabel: &str) -> Self {
        Chart { title: title.into(), xlabel: xlabel.into(), ylabel: ylabel.into(), ..Default::default() }
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            for (i, &(x, y)) in s.xy.iter().enumerate() {
                if !(x.is_finite() && y.is_finite()) {
                    continue;
                }
                let e = s.err.as_ref().map_or(0.0, |e| e[i]);
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y - e);
                y1 = y1.max(y + e);
            }
        }
        if !x0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let grow = |a: f64, b: f64| {
            let m = ((b - a) * 0.05).max(1e-9);
            (a - m, b + m)
        };
        let ((x0, x1), (y0, y1)) = (grow(x0, x1), grow(y0, y1));
        if self.square {
            let r = (x1 - x0).max(y1 - y0) / 2.0;
            let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            return (cx - r, cx + r, cy - r, cy + r);
        }
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let (l, r, t, b) = PAD;
        let sx = |x: f64| l + (x - x0) / (x1 - x0) * (W - l - r);
        let sy = |y: f64| H - b - (y - y0) / (y1 - y0) * (H - t - b);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            esc(&self.title)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
            W - l - r,
            H - t - b
        );
        for v in nice_ticks(x0, x1) {
            let _ = writeln!(
                s,
                r##"<line x1="{0:.1}" x2="{0:.1}" y1="{1}" y2="{2}" stroke="#333"/><text x="{0:.1}" y="{3}" text-anchor="middle">{4}</text>"##,
                sx(v),
                H - b,
                H - b + 5.0,
                H - b + 18.0,
                fmt_tick(v)
            );
        }
        for v in nice_ticks(y0, y1) {
            let _ = writeln!(
                s,
                r##"<line x1="{0}" x2="{1}" y1="{2:.1}" y2="{2:.1}" stroke="#333"/><text x="{3}" y="{4:.1}" text-anchor="end">{5}</text>"##,
                l - 5.0,
                l,
                sy(v),
                l - 8.0,
                sy(v) + 4.0,
                fmt_tick(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (l + W - r) / 2.0,
            H - 12.0,
            esc(&self.xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(18,{}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (t + H - b) / 2.0,
            esc(&self.ylabel)
        );
        for (k, ser) in self.series.iter().enumerate() {
            let c = COLOURS[k % COLOURS.len()];
            let pts: Vec<(f64, f64, f64)> = ser
                .xy
                .iter()
                .enumerate()
                .filter(|(_, p)| p.0.is_finite() && p.1.is_finite())
                .map(|(i, &(x, y))| (x, y, ser.err.as_ref().map_or(0.0, |e| e[i])))
                .collect();
            match ser.style {
                Style::Points => {
                    for &(x, y, e) in &pts {
                        if e > 0.0 {
                            let _ = writeln!(
                                s,
                                r#"<line x1="{0:.2}" x2="{0:.2}" y1="{1:.2}" y2="{2:.2}" stroke="{c}"/>"#,
                                sx(x),
                                sy(y - e),
                                sy(y + e)
                            );
                        }
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, sx(x), sy(y));
                    }
                }
                Style::Line | Style::Dashed => {
                    let path: Vec<String> = pts.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                    let dash = if matches!(ser.style, Style::Dashed) { r#" stroke-dasharray="6 4""# } else { "" };
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"{dash}/>"#,
                        path.join(" ")
                    );
                }
            }
            let ly = t + 16.0 + 16.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{c}"/><text x="{}" y="{}">{}</text>"#,
                W - r - 150.0,
                ly - 9.0,
                W - r - 135.0,
                ly,
                esc(&ser.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_svg() {
        let c = Chart::new("t<1>", "x", "y")
            .with(Series::points("a", vec![(0.0, 1.0), (1.0, 2.0)], Some(vec![0.1, 0.1])))
            .with(Series::line("b", vec![(0.0, 0.0), (1.0, f64::NAN), (2.0, 1.0)]));
        let svg = c.render();
        assert!(svg.starts_with("<svg ") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("t&lt;1&gt;"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(-0.03, 1.07);
        assert_eq!(t.first(), Some(&0.0));
        assert!(t.len() >= 3 && t.len() <= 7);
    }
}
