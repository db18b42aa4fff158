//! Minimal deterministic SVG plotter: polylines and scatter marks on a
//! framed axis box, linear or log10 scales, fixed palette. The renderer is
//! a pure function of the data handed to it — figures are drawn from CSV
//! values, never recomputed.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 54.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Line,
    Scatter,
}

#[derive(Debug, Clone)]
struct Series {
    label: String,
    points: Vec<(f64, f64)>,
    mark: Mark,
}

/// Plot under construction; `render` produces the SVG document.
#[derive(Debug, Clone)]
pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    log_x: bool,
    log_y: bool,
    series: Vec<Series>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    /// Log10 scales; nonpositive coordinates on a log axis are dropped.
    pub fn log_axes(mut self, log_x: bool, log_y: bool) -> Self {
        self.log_x = log_x;
        self.log_y = log_y;
        self
    }

    pub fn line(mut self, label: &str, points: &[(f64, f64)]) -> Self {
        self.series.push(Series {
            label: label.to_string(),
            points: points.to_vec(),
            mark: Mark::Line,
        });
        self
    }

    pub fn scatter(mut self, label: &str, points: &[(f64, f64)]) -> Self {
        self.series.push(Series {
            label: label.to_string(),
            points: points.to_vec(),
            mark: Mark::Scatter,
        });
        self
    }

    fn usable(&self, p: (f64, f64)) -> Option<(f64, f64)> {
        let (mut x, mut y) = p;
        if !x.is_finite() || !y.is_finite() {
            return None;
        }
        if self.log_x {
            if x <= 0.0 {
                return None;
            }
            x = x.log10();
        }
        if self.log_y {
            if y <= 0.0 {
                return None;
            }
            y = y.log10();
        }
        Some((x, y))
    }

    pub fn render(&self) -> String {
        // Data ranges in plot coordinates (log-mapped when requested).
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &p in &s.points {
                if let Some((x, y)) = self.usable(p) {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        let (x0, x1) = padded_range(&xs);
        let (y0, y1) = padded_range(&ys);
        let to_px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
        let to_py = |y: f64| HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
            WIDTH / 2.0,
            escape(&self.title)
        );

        // Axis frame.
        let _ = writeln!(
            svg,
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        );

        for t in ticks(x0, x1, self.log_x) {
            let px = to_px(t);
            let _ = writeln!(
                svg,
                "<line x1=\"{px:.2}\" y1=\"{}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>",
                HEIGHT - MARGIN_B,
                HEIGHT - MARGIN_B + 5.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{px:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
                HEIGHT - MARGIN_B + 18.0,
                tick_label(t, self.log_x)
            );
        }
        for t in ticks(y0, y1, self.log_y) {
            let py = to_py(t);
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{MARGIN_L}\" y2=\"{py:.2}\" stroke=\"black\"/>",
                MARGIN_L - 5.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>",
                MARGIN_L - 8.0,
                py + 4.0,
                tick_label(t, self.log_y)
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            match s.mark {
                Mark::Line => {
                    // Unusable points break the polyline into segments.
                    let mut segment: Vec<(f64, f64)> = Vec::new();
                    let flush = |seg: &mut Vec<(f64, f64)>, svg: &mut String| {
                        if seg.len() >= 2 {
                            let pts: Vec<String> = seg
                                .iter()
                                .map(|&(x, y)| format!("{:.2},{:.2}", to_px(x), to_py(y)))
                                .collect();
                            let _ = writeln!(
                                svg,
                                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                                pts.join(" ")
                            );
                        }
                        seg.clear();
                    };
                    for &p in &s.points {
                        match self.usable(p) {
                            Some(q) => segment.push(q),
                            None => flush(&mut segment, &mut svg),
                        }
                    }
                    flush(&mut segment, &mut svg);
                }
                Mark::Scatter => {
                    for &p in &s.points {
                        if let Some((x, y)) = self.usable(p) {
                            let _ = writeln!(
                                svg,
                                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>",
                                to_px(x),
                                to_py(y)
                            );
                        }
                    }
                }
            }
            let ly = MARGIN_T + 16.0 + 18.0 * k as f64;
            let _ = writeln!(
                svg,
                "<rect x=\"{}\" y=\"{:.2}\" width=\"12\" height=\"12\" fill=\"{color}\"/>",
                WIDTH - MARGIN_R - 150.0,
                ly - 10.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{ly:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
                WIDTH - MARGIN_R - 132.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn padded_range(vals: &[f64]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Tick positions in plot coordinates. Linear axes get ~5 round steps
/// (1/2/5 x 10^k); log axes get decade marks.
fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let first = lo.ceil() as i64;
        let last = hi.floor() as i64;
        let marks: Vec<f64> = (first..=last).map(|d| d as f64).collect();
        if marks.len() >= 2 {
            return marks;
        }
        // Range inside one decade: fall back to round linear steps in the
        // log coordinate.
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag * if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(t: f64, log: bool) -> String {
    if log {
        if (t - t.round()).abs() < 1e-9 {
            return format!("1e{}", t.round() as i64);
        }
        return format!("{:.3}", 10f64.powf(t));
    }
    // Shortest round-trip is stable and readable for round tick values.
    format!("{t}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
