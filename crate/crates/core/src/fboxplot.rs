//! Functional boxplots of test-function curves and their SVG/CSV output.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::depth::modified_band_depth;
use crate::error::{Error, Result};
use crate::test_functions::{CurveMatrix, FunctionalSet};

pub const DEFAULT_FACTOR: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxplotSummary {
    pub grid: Vec<f64>,
    pub median_curve: Vec<f64>,
    pub central_lower: Vec<f64>,
    pub central_upper: Vec<f64>,
    pub fence_lower: Vec<f64>,
    pub fence_upper: Vec<f64>,
    pub envelope_lower: Vec<f64>,
    pub envelope_upper: Vec<f64>,
    pub outlier_indices: Vec<usize>,
    pub outlier_curves: Vec<Vec<f64>>,
    pub factor: f64,
}

pub fn boxplot_summary(set: &FunctionalSet, factor: f64) -> Result<BoxplotSummary> {
    summarize(&set.values, &set.grid, factor)
}

/// Boxplot of arbitrary curves sampled on `grid`.
pub fn summarize(curves: &CurveMatrix, grid: &[f64], factor: f64) -> Result<BoxplotSummary> {
    if curves.cols() != grid.len() {
        return Err(Error::GridMismatch);
    }
    if !(factor.is_finite() && factor >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "boxplot factor must be finite and ≥ 0, got {factor}"
        )));
    }
    let depth = modified_band_depth(curves)?.depths;
    let k = curves.rows();
    let p = curves.cols();

    // deepest first; equal depths resolved by lowest index
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| depth[b].total_cmp(&depth[a]).then(a.cmp(&b)));
    let central = &order[..k.div_ceil(2)];

    let envelope_of = |members: &mut dyn Iterator<Item = usize>| {
        let mut lo = vec![f64::INFINITY; p];
        let mut hi = vec![f64::NEG_INFINITY; p];
        for i in members {
            for (t, &x) in curves.row(i).iter().enumerate() {
                lo[t] = lo[t].min(x);
                hi[t] = hi[t].max(x);
            }
        }
        (lo, hi)
    };

    let (central_lower, central_upper) = envelope_of(&mut central.iter().copied());
    let (fence_lower, fence_upper): (Vec<f64>, Vec<f64>) = central_lower
        .iter()
        .zip(&central_upper)
        .map(|(&lo, &hi)| {
            let pad = factor * (hi - lo);
            (lo - pad, hi + pad)
        })
        .unzip();

    let outlier_indices: Vec<usize> = (0..k)
        .filter(|&i| {
            curves.row(i).iter().enumerate().any(|(t, &x)| x < fence_lower[t] || x > fence_upper[t])
        })
        .collect();
    let (envelope_lower, envelope_upper) =
        envelope_of(&mut (0..k).filter(|i| outlier_indices.binary_search(i).is_err()));

    Ok(BoxplotSummary {
        grid: grid.to_vec(),
        median_curve: curves.row(order[0]).to_vec(),
        central_lower,
        central_upper,
        fence_lower,
        fence_upper,
        envelope_lower,
        envelope_upper,
        outlier_curves: outlier_indices.iter().map(|&i| curves.row(i).to_vec()).collect(),
        outlier_indices,
        factor,
    })
}

impl BoxplotSummary {
    /// One row per grid point: `t` and the seven band columns.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "t",
            "median",
            "central_lower",
            "central_upper",
            "fence_lower",
            "fence_upper",
            "envelope_lower",
            "envelope_upper",
        ])?;
        for k in 0..self.grid.len() {
            let row = [
                self.grid[k],
                self.median_curve[k],
                self.central_lower[k],
                self.central_upper[k],
                self.fence_lower[k],
                self.fence_upper[k],
                self.envelope_lower[k],
                self.envelope_upper[k],
            ];
            out.write_record(row.iter().map(|x| x.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 48.0;

struct Frame {
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        LEFT + t * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (self.y_max - v) / (self.y_max - self.y_min) * (HEIGHT - TOP - BOTTOM)
    }

    fn points(&self, grid: &[f64], values: &[f64]) -> String {
        let mut s = String::new();
        for (i, (&t, &v)) in grid.iter().zip(values).enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.2},{:.2}", self.x(t), self.y(v));
        }
        s
    }

    fn band(&self, grid: &[f64], lower: &[f64], upper: &[f64]) -> String {
        let mut s = self.points(grid, upper);
        let rev_grid: Vec<f64> = grid.iter().rev().copied().collect();
        let rev_lower: Vec<f64> = lower.iter().rev().copied().collect();
        s.push(' ');
        s.push_str(&self.points(&rev_grid, &rev_lower));
        s
    }
}

fn escape(text: &str) -> String {
    let mut s = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => s.push_str("&amp;"),
            '<' => s.push_str("&lt;"),
            '>' => s.push_str("&gt;"),
            '"' => s.push_str("&quot;"),
            '\'' => s.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => {}
            c => s.push(c),
        }
    }
    s
}

/// Standalone SVG of the boxplot. Output depends only on the arguments.
///
/// Layers: non-outlying envelope (light), central region (dark), fences,
/// outliers (dashed red), median. Layers that coincide with the median are
/// left out, so identical curves draw a single polyline.
pub fn render(summary: &BoxplotSummary, title: &str) -> String {
    let s = summary;
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for series in
        [&s.fence_lower, &s.fence_upper, &s.envelope_lower, &s.envelope_upper, &s.median_curve]
            .into_iter()
            .chain(&s.outlier_curves)
    {
        for &v in series {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.1 };
    let frame = Frame { y_min: lo - pad, y_max: hi + pad };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // axes
    let (x0, x1) = (frame.x(0.0), frame.x(1.0));
    let (y_bottom, y_top) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(svg, r#"<g stroke="black" stroke-width="1">"#);
    let _ =
        writeln!(svg, r#"<line x1="{x0:.2}" y1="{y_bottom:.2}" x2="{x1:.2}" y2="{y_bottom:.2}"/>"#);
    let _ =
        writeln!(svg, r#"<line x1="{x0:.2}" y1="{y_top:.2}" x2="{x0:.2}" y2="{y_bottom:.2}"/>"#);
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let x = frame.x(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y_bottom:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            y_bottom + 5.0
        );
    }
    for v in [frame.y_min, 0.5 * (frame.y_min + frame.y_max), frame.y_max] {
        let y = frame.y(v);
        let _ =
            writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}"/>"#, x0 - 5.0);
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g text-anchor="middle">"#);
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ =
            writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{t}</text>"#, frame.x(t), y_bottom + 18.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">t</text>"#, 0.5 * (x0 + x1), HEIGHT - 8.0);
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g text-anchor="end">"#);
    for v in [frame.y_min, 0.5 * (frame.y_min + frame.y_max), frame.y_max] {
        let _ =
            writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{v:.3}</text>"#, x0 - 8.0, frame.y(v) + 4.0);
    }
    let _ = writeln!(svg, "</g>");

    let differs = |a: &[f64], b: &[f64]| a.iter().zip(b).any(|(x, y)| x != y);
    let g = &s.grid;

    if differs(&s.envelope_lower, &s.envelope_upper) {
        let _ = writeln!(
            svg,
            r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.45" stroke="none"/>"##,
            frame.band(g, &s.envelope_lower, &s.envelope_upper)
        );
    }
    if differs(&s.central_lower, &s.central_upper) {
        let _ = writeln!(
            svg,
            r##"<polygon points="{}" fill="#3182bd" fill-opacity="0.6" stroke="none"/>"##,
            frame.band(g, &s.central_lower, &s.central_upper)
        );
    }
    let zero = frame.y(0.0);
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{zero:.2}" x2="{x1:.2}" y2="{zero:.2}" stroke="gray" stroke-dasharray="4 3"/>"#
    );
    for fence in [&s.fence_lower, &s.fence_upper] {
        if differs(fence, &s.median_curve) {
            let _ = writeln!(
                svg,
                r##"<polyline points="{}" fill="none" stroke="#08519c" stroke-width="1.2"/>"##,
                frame.points(g, fence)
            );
        }
    }
    for curve in &s.outlier_curves {
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#de2d26" stroke-width="1" stroke-dasharray="5 3"/>"##,
            frame.points(g, curve)
        );
    }
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        frame.points(g, &s.median_curve)
    );
    svg.push_str("</svg>\n");
    svg
}
