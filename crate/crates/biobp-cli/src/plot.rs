//! Deterministic SVG line charts from metrics CSVs.
//!
//! Pure text emission: the same input bytes always render the same SVG
//! bytes, so charts can be diffed and tested like any other artifact. One
//! polyline per rule, a legend, and min/max labels on both axes.

use biobp::metrics::CsvTable;
use biobp::{Error, Result};

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [(&str, &str); 4] = [
    ("vbp", "#1f77b4"),
    ("fba", "#d62728"),
    ("itd-y", "#2ca02c"),
    ("itd-dy", "#9467bd"),
];

fn color_for(tag: &str, index: usize) -> &'static str {
    PALETTE
        .iter()
        .find(|(t, _)| *t == tag)
        .map(|(_, c)| *c)
        .unwrap_or(["#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"][index % 4])
}

struct Series {
    tag: String,
    points: Vec<(f64, f64)>,
}

/// Extracts `(step, column)` series per rule from one or more parsed tables.
fn collect_series(tables: &[CsvTable], column: &str) -> Result<Vec<Series>> {
    let mut series: Vec<Series> = Vec::new();
    for table in tables {
        let steps = table.numeric_column("step")?;
        let values = table.numeric_column(column)?;
        let rule_idx = table
            .column_index("rule")
            .ok_or_else(|| Error::Format("metrics CSV has no 'rule' column".into()))?;
        for (record, (&step, &value)) in table.records.iter().zip(steps.iter().zip(&values)) {
            if !value.is_finite() {
                continue; // 'nan' cells are simply not plotted
            }
            let tag = &record[rule_idx];
            let slot = match series.iter_mut().find(|s| &s.tag == tag) {
                Some(s) => s,
                None => {
                    series.push(Series {
                        tag: tag.clone(),
                        points: Vec::new(),
                    });
                    series.last_mut().unwrap()
                }
            };
            slot.points.push((step, value));
        }
    }
    // Canonical rule order first, anything else in first-seen order after.
    series.sort_by_key(|s| {
        PALETTE
            .iter()
            .position(|(t, _)| *t == s.tag)
            .unwrap_or(usize::MAX)
    });
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Format(format!(
            "no plottable rows for column '{column}'"
        )));
    }
    Ok(series)
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 100_000.0 {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.3e}")
    }
}

/// Renders the chart. `tables` must contain a `step` column, a `rule` column
/// and `column`; rows whose value is `nan` are skipped.
pub fn render_chart(tables: &[CsvTable], column: &str) -> Result<String> {
    if tables.iter().all(|t| t.records.is_empty()) {
        return Err(Error::Format("metrics CSV has no data rows".into()));
    }
    let series = collect_series(tables, column)?;

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &series {
        for &(x, y) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_min -= 0.5;
        y_max += 0.5;
    } else {
        let pad = (y_max - y_min) * 0.05;
        y_min -= pad;
        y_max += pad;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{column} vs step</text>\n",
        MARGIN_LEFT + plot_w / 2.0
    ));

    // axes
    let x0 = fmt2(MARGIN_LEFT);
    let x1 = fmt2(MARGIN_LEFT + plot_w);
    let y0 = fmt2(MARGIN_TOP + plot_h);
    let y1 = fmt2(MARGIN_TOP);
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));

    // min/max labels on both axes
    svg.push_str(&format!(
        "<text x=\"{x0}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        fmt2(MARGIN_TOP + plot_h + 18.0),
        fmt_label(x_min)
    ));
    svg.push_str(&format!(
        "<text x=\"{x1}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"end\">{}</text>\n",
        fmt2(MARGIN_TOP + plot_h + 18.0),
        fmt_label(x_max)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"end\">{}</text>\n",
        fmt2(MARGIN_LEFT - 6.0),
        fmt2(MARGIN_TOP + plot_h),
        fmt_label(y_min)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"end\">{}</text>\n",
        fmt2(MARGIN_LEFT - 6.0),
        fmt2(MARGIN_TOP + 12.0),
        fmt_label(y_max)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">step</text>\n",
        fmt2(MARGIN_LEFT + plot_w / 2.0),
        fmt2(HEIGHT - 12.0)
    ));

    // series
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = color_for(&s.tag, i);
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt2(sx(x)), fmt2(sy(y))))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        // legend entry
        let ly = MARGIN_TOP + 16.0 + i as f64 * 20.0;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            fmt2(WIDTH - MARGIN_RIGHT + 16.0),
            fmt2(ly),
            fmt2(WIDTH - MARGIN_RIGHT + 44.0),
            fmt2(ly)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
            fmt2(WIDTH - MARGIN_RIGHT + 50.0),
            fmt2(ly + 4.0),
            s.tag
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
