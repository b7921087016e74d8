//! Run artifacts: CSV traces and static SVG plots.
//!
//! CSV is the only data interchange format — traces at this scale are small,
//! and plain text keeps fixtures inspectable from any language. All numbers
//! are written with enough digits to round-trip `f64` exactly, and nothing
//! nondeterministic (timestamps, hash orders) enters either format, so a
//! repeated run produces byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::surface::MassTrace;

/// CSV header, fixed column order.
pub const CSV_HEADER: &str = "t,r,f_at_r,H,R_at_r,m,dm_dt_formula,dm_dt_observed";

fn csv_num(v: f64) -> String {
    format!("{v:.17e}")
}

/// Renders one sphere's trace as CSV (header + one row per sample).
pub fn render_csv(trace: &MassTrace) -> String {
    let mut out = String::with_capacity(64 + 200 * trace.samples.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_num(s.t),
            csv_num(s.r),
            csv_num(s.f_at_r),
            csv_num(s.mean_curv),
            csv_num(s.scalar),
            csv_num(s.mass),
            csv_num(s.rate_formula),
            csv_num(s.rate_observed),
        );
    }
    out
}

/// Writes text to a file, tagging failures with the path.
pub fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes one sphere's trace as a CSV file.
pub fn emit_csv(trace: &MassTrace, path: &Path) -> Result<()> {
    write_text(path, &render_csv(trace))
}

/// Which projection of the traces an SVG plot shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Hawking mass against flow time, one series per sphere.
    MassVsTime,
    /// Formula mass rate against current radius, one series per sphere.
    RateVsRadius,
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 500.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn plot_extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return None;
    }
    if lo == hi {
        // Degenerate span: pad to something visible.
        let pad = lo.abs().max(1.0) * 0.1;
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

fn tick_label(v: f64) -> String {
    format!("{v:.3e}")
}

/// Renders a static line plot of the traces. An empty input (or traces with
/// no plottable points) yields an annotated empty plot, not an error.
pub fn render_svg(traces: &[MassTrace], kind: PlotKind) -> String {
    let (title, x_label, y_label) = match kind {
        PlotKind::MassVsTime => ("Hawking mass along the flow", "t", "m"),
        PlotKind::RateVsRadius => ("Mass rate (formula) vs radius", "r", "dm/dt"),
    };
    let point = |s: &crate::surface::TraceSample| -> (f64, f64) {
        match kind {
            PlotKind::MassVsTime => (s.t, s.mass),
            PlotKind::RateVsRadius => (s.r, s.rate_formula),
        }
    };

    let xs = traces.iter().flat_map(|tr| tr.samples.iter()).map(|s| point(s).0);
    let ys = traces.iter().flat_map(|tr| tr.samples.iter()).map(|s| point(s).1);
    let x_extent = plot_extent(xs);
    let y_extent = plot_extent(ys);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let _ = writeln!(
        out,
        "  <rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"24\" font-family=\"monospace\" font-size=\"16\" \
         text-anchor=\"middle\">{title}</text>",
        SVG_W / 2.0
    );

    let (Some((x_lo, x_hi)), Some((y_lo, y_hi))) = (x_extent, y_extent) else {
        let _ = writeln!(
            out,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"14\" \
             text-anchor=\"middle\">no data</text>",
            SVG_W / 2.0,
            SVG_H / 2.0
        );
        out.push_str("</svg>\n");
        return out;
    };

    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w,
            SVG_H - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * plot_h,
        )
    };

    // Frame and ticks.
    let _ = writeln!(
        out,
        "  <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
         fill=\"none\" stroke=\"black\"/>"
    );
    for k in 0..=4 {
        let frac = k as f64 / 4.0;
        let xv = x_lo + frac * (x_hi - x_lo);
        let yv = y_lo + frac * (y_hi - y_lo);
        let (xp, _) = to_px(xv, y_lo);
        let (_, yp) = to_px(x_lo, yv);
        let _ = writeln!(
            out,
            "  <line x1=\"{xp:.1}\" y1=\"{:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
            SVG_H - MARGIN_B,
            SVG_H - MARGIN_B + 5.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{xp:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>",
            SVG_H - MARGIN_B + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            "  <line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{MARGIN_L}\" y2=\"{yp:.1}\" stroke=\"black\"/>",
            MARGIN_L - 5.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>",
            MARGIN_L - 8.0,
            yp + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\">{x_label}</text>",
        MARGIN_L + plot_w / 2.0,
        SVG_H - 12.0
    );
    let _ = writeln!(
        out,
        "  <text x=\"18\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{y_label}</text>",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    // One polyline per sphere (single points become dots), plus a legend.
    for (idx, trace) in traces.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<(f64, f64)> = trace
            .samples
            .iter()
            .map(&point)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| to_px(x, y))
            .collect();
        if pts.len() == 1 {
            let _ = writeln!(
                out,
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                pts[0].0, pts[0].1
            );
        } else if !pts.is_empty() {
            let coords: Vec<String> = pts
                .iter()
                .map(|(x, y)| format!("{x:.2},{y:.2}"))
                .collect();
            let _ = writeln!(
                out,
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                coords.join(" ")
            );
        }
        let ly = MARGIN_T + 16.0 + 16.0 * idx as f64;
        let _ = writeln!(
            out,
            "  <line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"3\"/>",
            MARGIN_L + 10.0,
            MARGIN_L + 34.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\">r0 = {} \
             ({})</text>",
            MARGIN_L + 40.0,
            ly + 4.0,
            trace.initial_radius,
            trace.status.as_str()
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes an SVG plot of the traces.
pub fn emit_svg(traces: &[MassTrace], kind: PlotKind, path: &Path) -> Result<()> {
    write_text(path, &render_svg(traces, kind))
}
