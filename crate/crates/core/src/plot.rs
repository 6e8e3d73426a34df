//! Self-contained SVG figure regeneration: one polyline per policy over the
//! shared time axis, the attack window shaded, no external assets and no
//! nondeterministic content.

use crate::metrics::MetricsRow;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("no input series")]
    Empty,
    #[error("time axes differ between inputs: {0}")]
    MismatchedAxes(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Cost,
    Overhead,
}

impl PlotKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cost" => Some(PlotKind::Cost),
            "overhead" => Some(PlotKind::Overhead),
            _ => None,
        }
    }

    fn value(&self, row: &MetricsRow) -> f64 {
        match self {
            PlotKind::Cost => row.mean_cost,
            PlotKind::Overhead => row.hardening_overhead,
        }
    }

    fn axis_label(&self) -> &'static str {
        match self {
            PlotKind::Cost => "mean defense cost (cost units)",
            PlotKind::Overhead => "hardening overhead (units)",
        }
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

/// Render one figure: `series` pairs a label with its rows; `window` is the
/// attack window to shade, in seconds.
pub fn plot(
    series: &[(String, Vec<MetricsRow>)],
    kind: PlotKind,
    window: (f64, f64),
) -> Result<String, PlotError> {
    if series.is_empty() {
        return Err(PlotError::Empty);
    }
    let t_axis: Vec<f64> = series[0].1.iter().map(|r| r.t).collect();
    for (label, rows) in series.iter().skip(1) {
        let axis: Vec<f64> = rows.iter().map(|r| r.t).collect();
        if axis != t_axis {
            return Err(PlotError::MismatchedAxes(label.clone()));
        }
    }
    if t_axis.is_empty() {
        return Err(PlotError::Empty);
    }

    let t_min = t_axis[0];
    let t_max = *t_axis.last().unwrap();
    let mut y_max = f64::MIN;
    for (_, rows) in series {
        for r in rows {
            y_max = y_max.max(kind.value(r));
        }
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    y_max *= 1.05;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let x_of = |t: f64| MARGIN_L + (t - t_min) / (t_max - t_min).max(1e-12) * plot_w;
    let y_of = |v: f64| MARGIN_T + (1.0 - (v / y_max).clamp(0.0, 1.0)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // Shaded attack window.
    let (w0, w1) = window;
    let wx0 = x_of(w0.max(t_min));
    let wx1 = x_of(w1.min(t_max));
    if wx1 > wx0 {
        let _ = writeln!(
            svg,
            r#"<rect x="{:.3}" y="{MARGIN_T}" width="{:.3}" height="{plot_h}" fill="mistyrose" opacity="0.7"/>"#,
            wx0,
            wx1 - wx0
        );
    }

    // Axes.
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_L}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black"/>"#,
        MARGIN_T + plot_h,
        MARGIN_L + plot_w,
        MARGIN_T + plot_h
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{:.3}" stroke="black"/>"#,
        MARGIN_T + plot_h
    );
    for i in 0..=5 {
        let t = t_min + (t_max - t_min) * i as f64 / 5.0;
        let x = x_of(t);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.3}" y="{:.3}" font-size="12" text-anchor="middle">{t:.1}</text>"#,
            MARGIN_T + plot_h + 18.0
        );
        let v = y_max * i as f64 / 5.0;
        let y = y_of(v);
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{y:.3}" font-size="12" text-anchor="end">{v:.2}</text>"#,
            MARGIN_L - 6.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.3}" y="{:.3}" font-size="13" text-anchor="middle">time (s)</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.3}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.3})">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        kind.axis_label()
    );

    // One polyline per series plus its legend entry.
    for (idx, (label, rows)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut points = String::new();
        for r in rows {
            let _ = write!(points, "{:.3},{:.3} ", x_of(r.t), y_of(kind.value(r)));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.trim_end()
        );
        let ly = MARGIN_T + 16.0 + idx as f64 * 18.0;
        let lx = MARGIN_L + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.3}" y1="{ly:.3}" x2="{:.3}" y2="{ly:.3}" stroke="{color}" stroke-width="2"/>"#,
            lx + 22.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" font-size="12">{label}</text>"#,
            lx + 28.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
