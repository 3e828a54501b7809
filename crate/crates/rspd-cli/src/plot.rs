//! Deterministic SVG line charts from CSV traces: byte-identical output for
//! identical inputs, log-scale gap axis with decade ticks.

use std::path::{Path, PathBuf};

use crate::csv::{read_trace_csv, CsvRecord};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XColumn {
    Gradients,
    Seconds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YColumn {
    Gap,
    Metric,
}

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Decades `10^k` covering `[lo, hi]`, endpoints included when they are
/// decades themselves.
pub fn decade_ticks(lo: f64, hi: f64) -> Vec<i32> {
    assert!(lo > 0.0 && hi >= lo, "log axis needs positive bounds");
    let k_lo = (lo.log10() - 1e-9).ceil() as i32;
    let k_hi = (hi.log10() + 1e-9).floor() as i32;
    if k_lo > k_hi {
        // The whole range sits inside one decade; bracket it.
        let k = lo.log10().floor() as i32;
        return vec![k, k + 1];
    }
    (k_lo..=k_hi).collect()
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn extract(record: &CsvRecord, x: XColumn, y: YColumn) -> Option<(f64, f64)> {
    let xv = match x {
        XColumn::Gradients => record.gradients as f64,
        XColumn::Seconds => record.seconds,
    };
    let yv = match y {
        YColumn::Gap => {
            // The log axis cannot hold non-positive gaps.
            if record.gap > 0.0 {
                record.gap
            } else {
                return None;
            }
        }
        YColumn::Metric => record.metric?,
    };
    Some((xv, yv))
}

/// Renders the chart and writes it; returns the SVG text.
pub fn emit_plot(
    csv_paths: &[PathBuf],
    x: XColumn,
    y: YColumn,
    out: &Path,
) -> Result<String, CliError> {
    if csv_paths.is_empty() {
        return Err(CliError::Config(vec![
            "plot: at least one CSV trace is required".into(),
        ]));
    }
    let mut series = Vec::new();
    for path in csv_paths {
        let records = read_trace_csv(path)?;
        let points: Vec<(f64, f64)> = records.iter().filter_map(|r| extract(r, x, y)).collect();
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        series.push(Series { label, points });
    }
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(CliError::Data(
            "plot: no drawable points (empty traces or all gaps non-positive)".into(),
        ));
    }
    let svg = render(&series, x, y);
    std::fs::write(out, svg.as_bytes())
        .map_err(|e| CliError::Io(format!("writing {}: {e}", out.display())))?;
    Ok(svg)
}

fn render(series: &[Series], x: XColumn, y: YColumn) -> String {
    let points = series.iter().flat_map(|s| s.points.iter());
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for &(px, py) in points {
        x_lo = x_lo.min(px);
        x_hi = x_hi.max(px);
        y_lo = y_lo.min(py);
        y_hi = y_hi.max(py);
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    let log_y = y == YColumn::Gap;
    let (ty_lo, ty_hi) = if log_y {
        let (a, b) = (y_lo.log10(), y_hi.log10());
        if b - a < 1e-12 {
            (a - 0.5, b + 0.5)
        } else {
            (a, b)
        }
    } else if y_hi - y_lo < 1e-12 {
        (y_lo - 0.5, y_hi + 0.5)
    } else {
        (y_lo, y_hi)
    };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |px: f64, py: f64| -> (f64, f64) {
        let tx = (px - x_lo) / (x_hi - x_lo);
        let raw = if log_y { py.log10() } else { py };
        let ty = (raw - ty_lo) / (ty_hi - ty_lo);
        (MARGIN_LEFT + tx * plot_w, MARGIN_TOP + (1.0 - ty) * plot_h)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    // Frame.
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
    ));

    // Y ticks.
    if log_y {
        for k in decade_ticks(y_lo, y_hi) {
            let value = 10f64.powi(k);
            let (_, py) = to_px(x_lo, value);
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"12\" font-family=\"monospace\">1e{k}</text>\n",
                MARGIN_LEFT - 6.0,
                py + 4.0
            ));
        }
    } else {
        for i in 0..=4 {
            let value = ty_lo + (ty_hi - ty_lo) * i as f64 / 4.0;
            let (_, py) = to_px(x_lo, value);
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"12\" font-family=\"monospace\">{}</text>\n",
                MARGIN_LEFT - 6.0,
                py + 4.0,
                tick_label(value)
            ));
        }
    }
    // X ticks.
    for i in 0..=4 {
        let value = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let (px, _) = to_px(value, if log_y { y_lo } else { ty_lo });
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\" font-family=\"monospace\">{}</text>\n",
            MARGIN_TOP + plot_h + 18.0,
            tick_label(value)
        ));
    }
    // Axis titles.
    let x_title = match x {
        XColumn::Gradients => "stochastic gradients",
        XColumn::Seconds => "wall-clock seconds",
    };
    let y_title = match y {
        YColumn::Gap => "objective gap",
        YColumn::Metric => "metric",
    };
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\" font-family=\"monospace\">{x_title}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\" font-family=\"monospace\" \
         transform=\"rotate(-90 16 {:.2})\">{y_title}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // Series paths and legend.
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, &(px, py)) in s.points.iter().enumerate() {
            let (cx, cy) = to_px(px, py);
            if j == 0 {
                d.push_str(&format!("M {cx:.2} {cy:.2}"));
            } else {
                d.push_str(&format!(" L {cx:.2} {cy:.2}"));
            }
        }
        svg.push_str(&format!(
            "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
        ));
        let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            MARGIN_LEFT + plot_w - 170.0,
            ly - 9.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{ly:.2}\" font-size=\"12\" font-family=\"monospace\">{}</text>\n",
            MARGIN_LEFT + plot_w - 156.0,
            xml_escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick_label(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let abs = value.abs();
    if (0.001..1e6).contains(&abs) {
        let text = format!("{value:.3}");
        let trimmed = text.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        format!("{value:.2e}")
    }
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
