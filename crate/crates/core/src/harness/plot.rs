use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::algorithms::RunRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Episode,
    Steps,
}

impl XAxis {
    fn label(self) -> &'static str {
        match self {
            XAxis::Episode => "episode",
            XAxis::Steps => "env steps",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlotRun {
    pub label: String,
    pub records: Vec<RunRecord>,
}

pub fn metric_value(rec: &RunRecord, metric: &str) -> Result<f64> {
    Ok(match metric {
        "episode" => rec.episode as f64,
        "steps" => rec.steps as f64,
        "reward" => rec.reward,
        "success" => f64::from(u8::from(rec.success)),
        "smoothed" => rec.smoothed,
        "buf_b" => rec.buf_b as f64,
        "buf_blarge" => rec.buf_blarge as f64,
        "ms" => rec.ms as f64,
        other => return Err(Error::Schema(format!("no numeric column `{other}`"))),
    })
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Renders one polyline per run. Output depends only on the inputs.
pub fn render_svg(runs: &[PlotRun], metric: &str, x_axis: XAxis) -> Result<String> {
    if runs.is_empty() {
        return Err(Error::NoData("no runs to plot".into()));
    }
    let mut series = Vec::with_capacity(runs.len());
    for run in runs {
        if run.records.is_empty() {
            return Err(Error::NoData(format!("run `{}` has no `{metric}` values", run.label)));
        }
        let mut pts = Vec::with_capacity(run.records.len());
        for rec in &run.records {
            let x = match x_axis {
                XAxis::Episode => rec.episode as f64,
                XAxis::Steps => rec.steps as f64,
            };
            pts.push((x, metric_value(rec, metric)?));
        }
        series.push(pts);
    }
    let all = series.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for (v, x, anchor) in [(x0, sx(x0), "start"), (x1, sx(x1), "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="{anchor}">{v}</text>"#,
            HEIGHT - MARGIN + 16.0
        );
    }
    for (v, y) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{y:.2}" font-size="12" text-anchor="end">{v:.3}</text>"#,
            MARGIN - 6.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        x_axis.label()
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(metric)
    );
    for (i, (run, pts)) in runs.iter().zip(&series).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            if j > 0 {
                points.push(' ');
            }
            let _ = write!(points, "{:.2},{:.2}", sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{color}">{}</text>"#,
            WIDTH - MARGIN + 4.0 - 150.0,
            MARGIN + 14.0 * i as f64,
            escape(&run.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes the chart to `path`. Nothing is written when rendering fails.
pub fn emit_plot(runs: &[PlotRun], metric: &str, x_axis: XAxis, path: &Path) -> Result<()> {
    let svg = render_svg(runs, metric, x_axis)?;
    fs::write(path, svg)?;
    Ok(())
}
