//! Report writers: JSON, CSV tables and a standalone SVG chart.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::algo::fmt_f64;
use crate::error::{Error, Result};

use super::harness::ExperimentReport;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_f64)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// `t, policy, mean_regret, stderr` for every curve point.
pub fn write_curves_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "policy", "mean_regret", "stderr"]).map_err(csv_err)?;
    for p in &report.policies {
        for (i, &t) in report.curve_times.iter().enumerate() {
            w.write_record([t.to_string(), p.policy.name().to_string(), fmt_f64(p.curve_mean[i]), opt(p.curve_stderr[i])])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// `policy, trial, collaborative_regret`.
pub fn write_per_seed_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "trial", "collaborative_regret"]).map_err(csv_err)?;
    for p in &report.policies {
        for (i, &v) in p.per_seed.iter().enumerate() {
            w.write_record([p.policy.name().to_string(), i.to_string(), fmt_f64(v)]).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// `policy, group, mean_regret`.
pub fn write_groups_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "group", "mean_regret"]).map_err(csv_err)?;
    for p in &report.policies {
        for (g, &v) in p.group_mean_regret.iter().enumerate() {
            w.write_record([p.policy.name().to_string(), g.to_string(), fmt_f64(v)]).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Mean regret against `t` per policy with a ±2 standard error band. The
/// timestamp comment is left out when `reproducible` is set.
pub fn render_svg(report: &ExperimentReport, reproducible: bool) -> String {
    let (w, h) = (800.0, 500.0);
    let (left, right, top, bottom) = (70.0, 180.0, 30.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let tmax = report.horizon as f64;
    let ymax = report
        .policies
        .iter()
        .flat_map(|p| p.curve_mean.iter().zip(&p.curve_stderr).map(|(m, s)| m + 2.0 * s.unwrap_or(0.0)))
        .fold(0.0, f64::max)
        .max(1e-9);
    let x = |t: f64| left + pw * t / tmax;
    let y = |v: f64| top + ph * (1.0 - v.max(0.0) / ymax);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    if !reproducible {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let _ = writeln!(s, "<!-- generated at unix time {secs} -->");
    }
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<path d="M{left},{top} V{} H{}" stroke="#333" fill="none"/>"##,
        top + ph,
        left + pw
    );
    for i in 0..=4 {
        let v = ymax * i as f64 / 4.0;
        let t = tmax * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{:.3}</text>"#,
            left - 6.0,
            y(v) + 4.0,
            v
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{:.0}</text>"#,
            x(t),
            top + ph + 16.0,
            t
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">round t</text>"#,
        left + pw / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">collaborative regret</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (k, p) in report.policies.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64, f64)> = report
            .curve_times
            .iter()
            .zip(&p.curve_mean)
            .zip(&p.curve_stderr)
            .map(|((&t, &m), &se)| (t as f64, m, 2.0 * se.unwrap_or(0.0)))
            .collect();
        if p.curve_stderr.iter().any(Option::is_some) {
            let mut d = String::new();
            for (i, &(t, m, b)) in pts.iter().enumerate() {
                let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, x(t), y(m + b));
            }
            for &(t, m, b) in pts.iter().rev() {
                let _ = write!(d, "L{:.2},{:.2} ", x(t), y(m - b));
            }
            let _ = writeln!(s, r#"<path d="{}Z" fill="{color}" fill-opacity="0.15" stroke="none"/>"#, d);
        }
        let line: Vec<String> = pts.iter().map(|&(t, m, _)| format!("{:.2},{:.2}", x(t), y(m))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            line.join(" ")
        );
        let ly = top + 20.0 * k as f64 + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#,
            left + pw + 15.0,
            left + pw + 35.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
            left + pw + 40.0,
            ly + 4.0,
            p.policy.name()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Paths written by [`write_report_files`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub report_json: PathBuf,
    pub summary: PathBuf,
    pub curves_csv: PathBuf,
    pub per_seed_csv: PathBuf,
    pub groups_csv: PathBuf,
    pub svg: Option<PathBuf>,
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, `summary.txt`, `curves.csv`, `per_seed.csv`,
/// `groups.csv` and optionally `regret.svg` into `dir`.
pub fn write_report_files(report: &ExperimentReport, dir: &Path, svg: bool, reproducible: bool) -> Result<OutputFiles> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = OutputFiles {
        report_json: dir.join("report.json"),
        summary: dir.join("summary.txt"),
        curves_csv: dir.join("curves.csv"),
        per_seed_csv: dir.join("per_seed.csv"),
        groups_csv: dir.join("groups.csv"),
        svg: svg.then(|| dir.join("regret.svg")),
    };
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(&files.report_json, json + "\n").map_err(|e| Error::io(&files.report_json, e))?;
    std::fs::write(&files.summary, report.summary()).map_err(|e| Error::io(&files.summary, e))?;
    write_curves_csv(report, create(&files.curves_csv)?)?;
    write_per_seed_csv(report, create(&files.per_seed_csv)?)?;
    write_groups_csv(report, create(&files.groups_csv)?)?;
    if let Some(p) = &files.svg {
        std::fs::write(p, render_svg(report, reproducible)).map_err(|e| Error::io(p, e))?;
    }
    Ok(files)
}
