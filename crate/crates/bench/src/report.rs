//! Repetition statistics and report files: summary CSV, raw JSON lines,
//! an SVG line chart and a run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, BenchResult};

/// Decimal places of every number in the summary CSV.
pub const CSV_DECIMALS: usize = 9;

/// Rounds to the CSV precision, so the in-memory value re-parses bit-identically.
pub fn round_fixed(x: f64) -> f64 {
    format!("{x:.CSV_DECIMALS$}").parse().expect("formatted float parses")
}

/// Aggregated utilities of one algorithm at one sweep value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    /// For aggregate rows, the configuration whose runs are reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub sweep: usize,
    pub utilities: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (zero for a single repetition).
    pub std: f64,
    pub stderr: f64,
}

impl ResultRow {
    pub fn new(algorithm: impl Into<String>, sweep: usize, utilities: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&utilities);
        let stderr = std / (utilities.len().max(1) as f64).sqrt();
        Self {
            algorithm: algorithm.into(),
            variant: None,
            sweep,
            mean: round_fixed(mean),
            std: round_fixed(std),
            stderr: round_fixed(stderr),
            utilities,
        }
    }

    pub fn with_variant(mut self, variant: impl Into<String>) -> Self {
        self.variant = Some(variant.into());
        self
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One repetition's utility, as persisted in `raw.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub algorithm: String,
    pub sweep: usize,
    pub repetition: usize,
    pub utility: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
}

pub fn summary_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("algorithm,sweep,mean,std,stderr\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:.p$},{:.p$},{:.p$}",
            r.algorithm,
            r.sweep,
            r.mean,
            r.std,
            r.stderr,
            p = CSV_DECIMALS
        )
        .expect("writing to a string");
    }
    out
}

pub fn raw_jsonl(observations: &[Observation]) -> String {
    observations
        .iter()
        .map(|o| serde_json::to_string(o).expect("observation serializes") + "\n")
        .collect()
}

/// Observations implied by the rows, in row order.
pub fn observations(rows: &[ResultRow]) -> Vec<Observation> {
    rows.iter()
        .flat_map(|r| {
            r.utilities.iter().enumerate().map(|(rep, &u)| Observation {
                algorithm: r.algorithm.clone(),
                sweep: r.sweep,
                repetition: rep,
                utility: u,
                variant: r.variant.clone(),
            })
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// A self-contained SVG line chart, one series per algorithm, with
/// ±1 standard deviation error bars.
pub fn svg_chart(rows: &[ResultRow], title: &str, x_label: &str, y_label: &str) -> String {
    let (w, h) = (720.0, 460.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let mut series: Vec<(&str, Vec<&ResultRow>)> = Vec::new();
    for r in rows {
        match series.iter_mut().find(|(name, _)| *name == r.algorithm) {
            Some((_, pts)) => pts.push(r),
            None => series.push((&r.algorithm, vec![r])),
        }
    }
    let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
    let xs = rows.iter().map(|r| r.sweep as f64);
    let (x0, x1) = xs.fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(x), b.max(x)));
    let (x0, x1) = if x0 < x1 { (x0, x1) } else { (x0 - 1.0, x0 + 1.0) };
    let (y0, y1) = rows.iter().fold((f64::MAX, f64::MIN), |(a, b), r| {
        (a.min(finite(r.mean - r.std)), b.max(finite(r.mean + r.std)))
    });
    let pad = ((y1 - y0) * 0.05).max(1e-9);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (finite(y) - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let y = y0 + (y1 - y0) * k as f64 / 5.0;
        let py = sy(y);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#dddddd" stroke-dasharray="4 3"/>"##,
            left + pw
        );
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, left - 6.0, py + 4.0, fmt_tick(y));
    }
    let mut ticks: Vec<usize> = rows.iter().map(|r| r.sweep).collect();
    ticks.sort_unstable();
    ticks.dedup();
    for t in ticks {
        let px = sx(t as f64);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#, top + ph, top + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{t}</text>"#, top + ph + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        top + ph / 2.0,
        escape(y_label)
    );

    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(s, r#"<g stroke="{color}" fill="{color}">"#);
        let path: Vec<String> = pts.iter().map(|r| format!("{:.2},{:.2}", sx(r.sweep as f64), sy(r.mean))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke-width="2" points="{}"/>"#, path.join(" "));
        for r in pts {
            let px = sx(r.sweep as f64);
            let (lo, hi) = (sy(r.mean - r.std), sy(r.mean + r.std));
            let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{lo:.2}" x2="{px:.2}" y2="{hi:.2}"/>"#);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{lo:.2}" x2="{:.2}" y2="{lo:.2}"/>"#, px - 4.0, px + 4.0);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{hi:.2}" x2="{:.2}" y2="{hi:.2}"/>"#, px - 4.0, px + 4.0);
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{:.2}" r="3"/>"#, sy(r.mean));
        }
        let ly = top + 10.0 + 20.0 * k as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" stroke="none" fill="black">{}</text>"#, lx + 26.0, ly + 4.0, escape(name));
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(y: f64) -> String {
    if y.abs() >= 100.0 {
        format!("{y:.0}")
    } else if y.abs() >= 1.0 {
        format!("{y:.2}")
    } else {
        format!("{y:.3}")
    }
}

/// Which files [`emit_report`] writes besides the summary and raw lines.
#[derive(Clone, Debug, Default)]
pub struct ReportOptions {
    /// Chart title and axis labels; no chart when `None`.
    pub chart: Option<(String, String, String)>,
    /// Arbitrary JSON written as `manifest.json`.
    pub manifest: Option<serde_json::Value>,
}

/// Writes `summary.csv`, `raw.jsonl` and, as requested, `chart.svg` and
/// `manifest.json` into `dir`, returning the written paths.
pub fn emit_report(rows: &[ResultRow], dir: &Path, opts: &ReportOptions) -> BenchResult<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(BenchError::Runtime("no result rows to report".into()));
    }
    fs::create_dir_all(dir).map_err(|e| BenchError::Io(dir.to_path_buf(), e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> BenchResult<()> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| BenchError::Io(path.clone(), e))?;
        written.push(path);
        Ok(())
    };
    put("summary.csv", summary_csv(rows))?;
    put("raw.jsonl", raw_jsonl(&observations(rows)))?;
    if let Some((title, x, y)) = &opts.chart {
        put("chart.svg", svg_chart(rows, title, x, y))?;
    }
    if let Some(manifest) = &opts.manifest {
        put("manifest.json", serde_json::to_string_pretty(manifest).expect("json value serializes") + "\n")?;
    }
    Ok(written)
}

/// Parses a summary CSV back into `(algorithm, sweep, mean, std, stderr)` tuples.
pub fn parse_summary(text: &str) -> BenchResult<Vec<(String, usize, f64, f64, f64)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|r| r.map_err(|e| BenchError::Runtime(format!("summary csv: {e}"))))
        .collect()
}
