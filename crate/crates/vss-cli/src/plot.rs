//! Self-contained SVG rendering of a profile: `f` and `w = r^mu f` against
//! `r` on log-log axes, with the plateau constant `w*` as a labeled guide
//! line. Everything is inline-styled and formatted with fixed precision,
//! so repeated runs produce byte-identical files.

use std::fmt::Write as _;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 76.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;
/// Values more than this many decades below the plot maximum are dropped,
/// so an extinction tail cannot stretch the axis to the underflow floor.
const MAX_DECADES_BELOW_PEAK: f64 = 24.0;

const F_COLOR: &str = "#1f77b4";
const W_COLOR: &str = "#d62728";
const GUIDE_COLOR: &str = "#666666";

struct Mapper {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Mapper {
    fn sx(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }
    fn sy(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

/// Renders the plot. `samples` holds `(r, f, w)` rows; nonpositive values
/// cannot appear on log axes and are skipped.
pub fn profile_svg(a: f64, samples: &[(f64, f64, f64)], w_star: f64) -> String {
    let log_points = |select: fn(&(f64, f64, f64)) -> f64| -> Vec<(f64, f64)> {
        samples
            .iter()
            .filter(|row| row.0 > 0.0 && select(row) > 0.0)
            .map(|row| (row.0.log10(), select(row).log10()))
            .collect()
    };
    let f_points = log_points(|row| row.1);
    let w_points = log_points(|row| row.2);

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = w_star.log10();
    let mut y_max = y_min;
    for (x, y) in f_points.iter().chain(&w_points) {
        x_min = x_min.min(*x);
        x_max = x_max.max(*x);
        y_min = y_min.min(*y);
        y_max = y_max.max(*y);
    }
    if !x_min.is_finite() || x_max <= x_min {
        x_min = -1.0;
        x_max = 1.0;
    }
    y_min = y_min.max(y_max - MAX_DECADES_BELOW_PEAK);
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let pad = 0.04 * (y_max - y_min);
    let map = Mapper {
        x0: x_min,
        x1: x_max,
        y0: y_min - pad,
        y1: y_max + pad,
    };
    let clipped = |points: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
        points.into_iter().filter(|(_, y)| *y >= map.y0).collect()
    };
    let f_points = clipped(f_points);
    let w_points = clipped(w_points);

    let left = MARGIN_LEFT;
    let right = WIDTH - MARGIN_RIGHT;
    let top = MARGIN_TOP;
    let bottom = HEIGHT - MARGIN_BOTTOM;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"13\">"
    );
    let _ = writeln!(svg, "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "  <text x=\"{left}\" y=\"24\" fill=\"#111111\" font-size=\"15\">profile and similarity variable, a = {a}</text>"
    );

    // Decade grid and tick labels.
    for k in decade_ticks(map.x0, map.x1) {
        let x = map.sx(k as f64);
        let _ = writeln!(
            svg,
            "  <line x1=\"{x:.2}\" y1=\"{top:.2}\" x2=\"{x:.2}\" y2=\"{bottom:.2}\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" fill=\"#333333\" text-anchor=\"middle\">1e{k}</text>",
            bottom + 18.0
        );
    }
    for k in decade_ticks(map.y0, map.y1) {
        let y = map.sy(k as f64);
        let _ = writeln!(
            svg,
            "  <line x1=\"{left:.2}\" y1=\"{y:.2}\" x2=\"{right:.2}\" y2=\"{y:.2}\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" fill=\"#333333\" text-anchor=\"end\">1e{k}</text>",
            left - 8.0,
            y + 4.0
        );
    }

    // Plateau guide line with its label.
    let wy = map.sy(w_star.log10());
    if wy >= top && wy <= bottom {
        let _ = writeln!(
            svg,
            "  <line x1=\"{left:.2}\" y1=\"{wy:.2}\" x2=\"{right:.2}\" y2=\"{wy:.2}\" \
             stroke=\"{GUIDE_COLOR}\" stroke-width=\"1.2\" stroke-dasharray=\"6 4\"/>"
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" fill=\"{GUIDE_COLOR}\" text-anchor=\"end\">w* = {w_star}</text>",
            right - 6.0,
            wy - 6.0
        );
    }

    svg.push_str(&polyline(&map, &f_points, F_COLOR));
    svg.push_str(&polyline(&map, &w_points, W_COLOR));

    // Frame, axis captions, legend.
    let _ = writeln!(
        svg,
        "  <rect x=\"{left:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>",
        right - left,
        bottom - top
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" fill=\"#111111\" text-anchor=\"middle\">r</text>",
        (left + right) / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"20\" y=\"{:.2}\" fill=\"#111111\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">f, w</text>",
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"24\" fill=\"{F_COLOR}\" text-anchor=\"end\">f</text>",
        right - 60.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"24\" fill=\"{W_COLOR}\" text-anchor=\"end\">w = r^mu f</text>",
        right - 6.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn polyline(map: &Mapper, points: &[(f64, f64)], color: &str) -> String {
    if points.len() < 2 {
        return String::new();
    }
    let mut coords = String::new();
    for (x, y) in points {
        let _ = write!(coords, "{:.2},{:.2} ", map.sx(*x), map.sy(*y));
    }
    format!(
        "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\" points=\"{}\"/>\n",
        coords.trim_end()
    )
}

/// Integer decade exponents to label, thinned to at most ~10 ticks.
fn decade_ticks(lo: f64, hi: f64) -> Vec<i32> {
    let first = lo.ceil() as i32;
    let last = hi.floor() as i32;
    if last < first {
        return Vec::new();
    }
    let span = (last - first) as usize + 1;
    let step = span.div_ceil(10).max(1);
    (first..=last).step_by(step).collect()
}
