//! Static SVG line charts from sweep records. Output bytes are a pure
//! function of the input rows, so re-rendering a CSV always reproduces the
//! same file.

use anyhow::{bail, Context, Result};
use irsim_core::sim::SweepRecord;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMetric {
    /// Upper-bound, proposed (one series per sigma_e) and no-optimization
    /// received SNR in dB.
    Snr,
    /// Mean position error in metres, one series per sigma_e.
    Error,
}

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

struct Series {
    label: String,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

enum Abscissa {
    X,
    Y,
}

/// The coordinate that varies along the sweep. Rows where both panel-plane
/// coordinates vary cannot come from one sweep and are rejected.
fn detect_abscissa(records: &[SweepRecord]) -> Result<Abscissa> {
    let varies = |f: fn(&SweepRecord) -> f64| {
        let first = f(&records[0]);
        records.iter().any(|r| (f(r) - first).abs() > 1e-12)
    };
    let x_varies = varies(|r| r.ue_position.x);
    let y_varies = varies(|r| r.ue_position.y);
    match (x_varies, y_varies) {
        (true, false) => Ok(Abscissa::X),
        (false, true) => Ok(Abscissa::Y),
        (true, true) => bail!("rows mix sweep axes (both x and y vary)"),
        (false, false) => bail!("rows do not form a sweep (no coordinate varies)"),
    }
}

/// Group row indices by sigma_e in order of first appearance.
fn sigma_groups(records: &[SweepRecord]) -> Vec<(f64, Vec<usize>)> {
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        match groups.iter_mut().find(|(s, _)| (*s - r.sigma_e).abs() < 1e-12) {
            Some((_, idx)) => idx.push(i),
            None => groups.push((r.sigma_e, vec![i])),
        }
    }
    groups
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

/// Render the chart as an SVG document string.
pub fn render_plot(records: &[SweepRecord], metric: PlotMetric) -> Result<String> {
    if records.is_empty() {
        bail!("no rows to plot");
    }
    let abscissa = detect_abscissa(records)?;
    let coord = |r: &SweepRecord| match abscissa {
        Abscissa::X => r.ue_position.x,
        Abscissa::Y => r.ue_position.y,
    };
    let groups = sigma_groups(records);

    let mut series: Vec<Series> = Vec::new();
    let mut palette = PALETTE.iter().cycle();
    match metric {
        PlotMetric::Snr => {
            // Upper bound and baseline are sigma-independent; take them from
            // the first group.
            let first = &groups[0].1;
            series.push(Series {
                label: "upper".into(),
                color: palette.next().unwrap(),
                points: first
                    .iter()
                    .map(|&i| (coord(&records[i]), records[i].snr_upper_db))
                    .collect(),
            });
            for (sigma, idx) in &groups {
                series.push(Series {
                    label: format!("proposed (sigma_e={sigma})"),
                    color: palette.next().unwrap(),
                    points: idx
                        .iter()
                        .map(|&i| (coord(&records[i]), records[i].snr_proposed_db))
                        .collect(),
                });
            }
            series.push(Series {
                label: "noopt".into(),
                color: palette.next().unwrap(),
                points: first
                    .iter()
                    .map(|&i| (coord(&records[i]), records[i].snr_noopt_db))
                    .collect(),
            });
        }
        PlotMetric::Error => {
            for (sigma, idx) in &groups {
                series.push(Series {
                    label: format!("error (sigma_e={sigma})"),
                    color: palette.next().unwrap(),
                    points: idx
                        .iter()
                        .map(|&i| (coord(&records[i]), records[i].mean_position_error_m))
                        .collect(),
                });
            }
        }
    }

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &series {
        for &(x, y) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !(x_min < x_max) {
        bail!("degenerate abscissa range");
    }
    let pad = 0.05 * (y_max - y_min).max(1e-12);
    y_min -= pad;
    y_max += pad;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = move |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let x_label = match abscissa {
        Abscissa::X => "UE x-coordinate (m)",
        Abscissa::Y => "UE y-coordinate (m)",
    };
    let y_label = match metric {
        PlotMetric::Snr => "Received SNR (dB)",
        PlotMetric::Error => "Position error (m)",
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
    );
    let _ = writeln!(svg, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##);

    // Gridlines and tick labels.
    let ticks = 6usize;
    for i in 0..=ticks {
        let t = i as f64 / ticks as f64;
        let xv = x_min + t * (x_max - x_min);
        let yv = y_min + t * (y_max - y_min);
        let px = sx(xv);
        let py = sy(yv);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#dddddd" stroke-width="1"/>"##,
            fmt2(px),
            fmt2(MARGIN_TOP),
            fmt2(px),
            fmt2(MARGIN_TOP + plot_h)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#dddddd" stroke-width="1"/>"##,
            fmt2(MARGIN_LEFT),
            fmt2(py),
            fmt2(MARGIN_LEFT + plot_w),
            fmt2(py)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-size="12" text-anchor="middle" fill="#333333">{}</text>"##,
            fmt2(px),
            fmt2(MARGIN_TOP + plot_h + 18.0),
            fmt2(xv)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-size="12" text-anchor="end" fill="#333333">{}</text>"##,
            fmt2(MARGIN_LEFT - 6.0),
            fmt2(py + 4.0),
            fmt2(yv)
        );
    }
    // Axes.
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333333" stroke-width="1"/>"##,
        fmt2(MARGIN_LEFT),
        fmt2(MARGIN_TOP),
        fmt2(plot_w),
        fmt2(plot_h)
    );
    let _ = writeln!(
        svg,
        r##"<text x="{}" y="{}" font-size="14" text-anchor="middle" fill="#111111">{}</text>"##,
        fmt2(MARGIN_LEFT + plot_w / 2.0),
        fmt2(HEIGHT - 14.0),
        x_label
    );
    let _ = writeln!(
        svg,
        r##"<text x="18" y="{}" font-size="14" text-anchor="middle" fill="#111111" transform="rotate(-90 18 {})">{}</text>"##,
        fmt2(MARGIN_TOP + plot_h / 2.0),
        fmt2(MARGIN_TOP + plot_h / 2.0),
        y_label
    );

    // Series polylines.
    for s in &series {
        let mut points = String::new();
        for &(x, y) in &s.points {
            let _ = write!(points, "{},{} ", fmt2(sx(x)), fmt2(sy(y)));
        }
        let _ = writeln!(
            svg,
            r##"<polyline fill="none" stroke="{}" stroke-width="1.8" points="{}"/>"##,
            s.color,
            points.trim_end()
        );
    }

    // Legend.
    for (i, s) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 8.0 + i as f64 * 18.0;
        let lx = MARGIN_LEFT + plot_w - 210.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="3"/>"##,
            fmt2(lx),
            fmt2(ly),
            fmt2(lx + 26.0),
            fmt2(ly),
            s.color
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-size="12" fill="#111111">{}</text>"##,
            fmt2(lx + 32.0),
            fmt2(ly + 4.0),
            s.label
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render and write the chart to `path`.
pub fn emit_plot(records: &[SweepRecord], metric: PlotMetric, path: &Path) -> Result<()> {
    let svg = render_plot(records, metric)?;
    std::fs::write(path, svg).with_context(|| format!("writing plot to {}", path.display()))
}
