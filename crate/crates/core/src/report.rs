//! Dependency-free SVG renderings of landscape grids.
//!
//! Output is a pure function of the input data: coordinates are written with a
//! fixed number of decimals and no timestamps are embedded, so identical grids
//! give identical bytes.

use std::fmt::Write as _;

use crate::characters::LandscapeGrid;
use crate::error::{Error, Result};

/// Heatmap colour stops, evenly spaced over `[0, 1]` and linearly
/// interpolated in RGB. Sampled from the viridis map.
pub const COLORMAP: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

/// Largest number of cells drawn along one heatmap axis. Finer grids are
/// reduced by taking the maximum over each block.
pub const MAX_HEATMAP_CELLS: usize = 128;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 90.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const LINE_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Colour of a value in `[0, 1]` (clamped) as `#rrggbb`.
pub fn colormap(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (COLORMAP.len() - 1) as f64;
    let k = (pos.floor() as usize).min(COLORMAP.len() - 2);
    let f = pos - k as f64;
    let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    let (a, b) = (COLORMAP[k], COLORMAP[k + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a[0], b[0]), mix(a[1], b[1]), mix(a[2], b[2]))
}

/// One curve of a line chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    /// Curve of a 1-D grid, named after its description.
    pub fn from_grid(grid: &LandscapeGrid) -> Result<Self> {
        if grid.axes.len() != 1 {
            return Err(Error::invalid("line chart needs a one-dimensional grid"));
        }
        Ok(Self {
            name: grid.description.clone(),
            x: grid.axes[0].values(),
            y: grid.values.clone(),
        })
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str) {
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let cy = MARGIN_TOP + plot_h / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="20" y="{cy:.1}" text-anchor="middle" transform="rotate(-90 20 {cy:.1})">{}</text>"#,
        escape(y_label)
    );
}

fn ticks(out: &mut String, x_range: (f64, f64), y_range: (f64, f64)) {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let bottom = MARGIN_TOP + plot_h;
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let x = MARGIN_LEFT + f * plot_w;
        let xv = x_range.0 + f * (x_range.1 - x_range.0);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{xv:.3}</text>"#,
            bottom + 5.0,
            bottom + 18.0
        );
        let y = bottom - f * plot_h;
        let yv = y_range.0 + f * (y_range.1 - y_range.0);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_LEFT:.2}" y="{MARGIN_TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
}

/// Line chart of one or more curves sharing the axes.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<String> {
    if series.is_empty() || series.iter().any(|s| s.x.len() < 2 || s.x.len() != s.y.len()) {
        return Err(Error::invalid("line chart needs curves with at least two matching x/y samples"));
    }
    let all = || series.iter().flat_map(|s| s.x.iter().zip(&s.y));
    if all().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("line chart data must be finite"));
    }
    let fold = |f: fn(&(&f64, &f64)) -> f64| {
        all().map(|p| f(&p)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let x_range = fold(|p| *p.0);
    let mut y_range = fold(|p| *p.1);
    y_range.0 = y_range.0.min(0.0);
    if y_range.1 <= y_range.0 {
        y_range.1 = y_range.0 + 1.0;
    }
    let x_range = if x_range.1 > x_range.0 { x_range } else { (x_range.0, x_range.0 + 1.0) };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let mut out = String::new();
    header(&mut out, title);
    ticks(&mut out, x_range, y_range);
    for (k, s) in series.iter().enumerate() {
        let color = LINE_COLORS[k % LINE_COLORS.len()];
        let mut points = String::new();
        for (x, y) in s.x.iter().zip(&s.y) {
            let px = MARGIN_LEFT + (x - x_range.0) / (x_range.1 - x_range.0) * plot_w;
            let py = MARGIN_TOP + plot_h - (y - y_range.0) / (y_range.1 - y_range.0) * plot_h;
            let _ = write!(points, "{px:.2},{py:.2} ");
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let ly = MARGIN_TOP + 14.0 + 16.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 8.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{ly:.1}">{}</text>"#,
            ly - 4.0,
            lx + 14.0,
            ly - 4.0,
            lx + 18.0,
            escape(&s.name)
        );
    }
    axis_labels(&mut out, x_label, y_label);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Heatmap of a 2-D grid. The first axis runs horizontally, colours span
/// `[0, 1]`.
pub fn heatmap_svg(title: &str, grid: &LandscapeGrid) -> Result<String> {
    if grid.axes.len() != 2 || grid.is_empty() {
        return Err(Error::invalid("heatmap needs a non-empty two-dimensional grid"));
    }
    let (ax, ay) = (&grid.axes[0], &grid.axes[1]);
    if grid.values.len() != ax.points * ay.points {
        return Err(Error::invalid("grid values do not match the axis sizes"));
    }
    let bx = ax.points.div_ceil(MAX_HEATMAP_CELLS);
    let by = ay.points.div_ceil(MAX_HEATMAP_CELLS);
    let (nx, ny) = (ax.points.div_ceil(bx), ay.points.div_ceil(by));

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let (cw, ch) = (plot_w / nx as f64, plot_h / ny as f64);
    let x_range = (ax.start, ax.start + ax.step * ax.points as f64);
    let y_range = (ay.start, ay.start + ay.step * ay.points as f64);

    let mut out = String::new();
    header(&mut out, title);
    for cx in 0..nx {
        for cy in 0..ny {
            let mut v = f64::NEG_INFINITY;
            for i in cx * bx..((cx + 1) * bx).min(ax.points) {
                for j in cy * by..((cy + 1) * by).min(ay.points) {
                    v = v.max(grid.values[i * ay.points + j]);
                }
            }
            let x = MARGIN_LEFT + cx as f64 * cw;
            let y = MARGIN_TOP + plot_h - (cy + 1) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                cw + 0.05,
                ch + 0.05,
                colormap(v)
            );
        }
    }
    ticks(&mut out, x_range, y_range);

    // colour bar
    let bar_x = WIDTH - MARGIN_RIGHT + 20.0;
    let steps = 50;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let y = MARGIN_TOP + plot_h * (1.0 - (k + 1) as f64 / steps as f64);
        let _ = writeln!(
            out,
            r#"<rect x="{bar_x:.2}" y="{y:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            plot_h / steps as f64 + 0.05,
            colormap(t)
        );
    }
    for (t, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{label}</text>"#,
            bar_x + 20.0,
            MARGIN_TOP + plot_h * (1.0 - t) + 4.0
        );
    }
    axis_labels(&mut out, &ax.name, &ay.name);
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{scan_landscape, IrrepLabel};

    #[test]
    fn colormap_hits_its_stops() {
        assert_eq!(colormap(0.0), "#440154");
        assert_eq!(colormap(1.0), "#fde725");
        assert_eq!(colormap(2.0), "#fde725");
        assert_eq!(colormap(f64::NAN), "#440154");
    }

    #[test]
    fn rendering_is_deterministic() {
        let label: IrrepLabel = "su2:j=3".parse().unwrap();
        let grid = scan_landscape(&label, 200).unwrap();
        let s = Series::from_grid(&grid).unwrap();
        let a = line_chart_svg("t", "beta", "J", std::slice::from_ref(&s)).unwrap();
        let b = line_chart_svg("t", "beta", "J", &[s]).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("<polyline"));

        let grid = scan_landscape(&"su3:3,1".parse().unwrap(), 300).unwrap();
        let h = heatmap_svg("h", &grid).unwrap();
        assert_eq!(h, heatmap_svg("h", &grid).unwrap());
        assert_eq!(h.matches("<rect").count(), 1 + 100 * 100 + 50 + 1);
        assert!(h.contains(">theta1<") && h.contains(">theta2<"));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(line_chart_svg("t", "x", "y", &[]).unwrap_err().is_invalid_input());
        let grid = scan_landscape(&"su2:1".parse().unwrap(), 32).unwrap();
        assert!(heatmap_svg("t", &grid).is_err());
    }
}
