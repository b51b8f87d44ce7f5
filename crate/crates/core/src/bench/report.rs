use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::Strategy;
use super::experiment::{read_summary, SummaryRow};
use super::stats::SummaryStats;
use super::BenchError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

fn color(s: Strategy) -> &'static str {
    match s {
        Strategy::Cb => "#1f77b4",
        Strategy::Pp => "#ff7f0e",
        Strategy::Gut => "#2ca02c",
    }
}

/// Grouped bar chart of one metric: a group per speed ratio, a bar per
/// strategy, whiskers at one standard deviation.
pub fn metric_chart(
    rows: &[SummaryRow],
    title: &str,
    y_label: &str,
    metric: fn(&SummaryRow) -> SummaryStats,
) -> String {
    let ratios: Vec<f64> = {
        let bits: BTreeSet<u64> = rows.iter().map(|r| r.speed_ratio.to_bits()).collect();
        let mut v: Vec<f64> = bits.into_iter().map(f64::from_bits).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let strategies: Vec<Strategy> = Strategy::ALL
        .into_iter()
        .filter(|s| rows.iter().any(|r| r.strategy == *s))
        .collect();
    let y_max = rows
        .iter()
        .map(|r| {
            let m = metric(r);
            m.mean + m.std
        })
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.1 } else { 1.0 };
    let py = |y: f64| HEIGHT - MARGIN - y / y_max * (HEIGHT - 2.0 * MARGIN);
    let group_w = (WIDTH - 2.0 * MARGIN) / ratios.len().max(1) as f64;
    let bar_w = group_w * 0.8 / strategies.len().max(1) as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        WIDTH / 2.0
    );
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">V_p : V_e</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for k in 0..=4 {
        let y = y_max * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{y:.3}</text>"#,
            x0 - 6.0,
            py(y) + 4.0
        );
    }

    for (g, ratio) in ratios.iter().enumerate() {
        let gx = x0 + group_w * g as f64 + group_w * 0.1;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{ratio}:1</text>"#,
            x0 + group_w * (g as f64 + 0.5),
            y0 + 16.0
        );
        for (b, s) in strategies.iter().enumerate() {
            let Some(r) = rows
                .iter()
                .find(|r| r.strategy == *s && r.speed_ratio == *ratio)
            else {
                continue;
            };
            let m = metric(r);
            if !m.mean.is_finite() {
                continue;
            }
            let c = color(*s);
            let x = gx + bar_w * b as f64;
            let top = py(m.mean);
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" fill="{c}"/>"#,
                bar_w * 0.9,
                y0 - top
            );
            let cx = x + bar_w * 0.45;
            let _ = writeln!(
                svg,
                r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
                py((m.mean - m.std).max(0.0)),
                py(m.mean + m.std)
            );
        }
    }
    for (i, s) in strategies.iter().enumerate() {
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{s}</text>"#,
            x1 - 60.0,
            ly - 9.0,
            color(*s),
            x1 - 45.0,
            ly
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes capture-time and energy charts for every pursuer count.
pub fn write_charts(rows: &[SummaryRow], dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let counts: BTreeSet<usize> = rows.iter().map(|r| r.pursuers).collect();
    let mut files = Vec::new();
    for n in counts {
        let subset: Vec<SummaryRow> = rows.iter().filter(|r| r.pursuers == n).cloned().collect();
        let charts = [
            (
                format!("capture_time_{n}p.svg"),
                metric_chart(
                    &subset,
                    &format!("Capture time, {n} pursuer(s)"),
                    "time (s)",
                    |r| r.capture_time,
                ),
            ),
            (
                format!("energy_{n}p.svg"),
                metric_chart(
                    &subset,
                    &format!("Average energy, {n} pursuer(s)"),
                    "energy",
                    |r| r.avg_energy,
                ),
            ),
        ];
        for (name, svg) in charts {
            let path = dir.join(name);
            fs::write(&path, svg).map_err(|source| BenchError::Io {
                path: path.clone(),
                source,
            })?;
            files.push(path);
        }
    }
    Ok(files)
}

/// Regenerates charts from an existing run directory.
pub fn report(run_dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let rows = read_summary(&run_dir.join("summary.csv"))?;
    write_charts(&rows, &run_dir.join("charts"))
}
