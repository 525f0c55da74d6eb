//! Output files, checksums and run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = concat!("cspin ", env!("CARGO_PKG_VERSION"));

/// 17 significant digits, enough to round-trip any `f64`. Negative zero
/// prints as zero.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Rows joined with LF, header first.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(f.as_ref());
            first = false;
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub parameters: Value,
    pub seeds: Vec<u64>,
    pub rng: Option<String>,
    pub timestamp: String,
    pub outputs: Vec<OutputRecord>,
    pub wall_clock_seconds: f64,
    pub warnings: Vec<String>,
}

/// Files of one run, all listed in a single `<command>.manifest.json`.
pub struct Run {
    command: &'static str,
    dir: PathBuf,
    started: Instant,
    outputs: Vec<OutputRecord>,
    pub seeds: Vec<u64>,
    pub rng: Option<String>,
    pub warnings: Vec<String>,
}

impl Run {
    pub fn start(command: &'static str, dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            command,
            dir: dir.to_path_buf(),
            started: Instant::now(),
            outputs: Vec::new(),
            seeds: Vec::new(),
            rng: None,
            warnings: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(OutputRecord {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
            bytes: contents.len() as u64,
        });
        Ok(path)
    }

    /// Writes the manifest; `parameters` gains the command name so the file
    /// can be fed back through `--config`.
    pub fn finish<P: Serialize>(self, parameters: &P) -> CliResult<PathBuf> {
        let mut parameters = serde_json::to_value(parameters).expect("parameters serialize");
        if let Value::Object(map) = &mut parameters {
            map.insert("command".into(), Value::String(self.command.into()));
        }
        let manifest = RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            parameters,
            seeds: self.seeds,
            rng: self.rng,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            outputs: self.outputs,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            warnings: self.warnings,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join(format!("{}.manifest.json", self.command));
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

const LOW: [f64; 3] = [59.0, 76.0, 192.0];
const HIGH: [f64; 3] = [221.0, 221.0, 48.0];

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c: Vec<u8> = (0..3).map(|k| (LOW[k] + t * (HIGH[k] - LOW[k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Self-contained heatmap of `values[iy][ix]`; NaN cells are grey.
pub fn heatmap_svg(x_name: &str, xs: &[f64], y_name: &str, ys: &[f64], values: &[Vec<f64>], title: &str) -> String {
    let (left, top, plot, bar) = (80.0, 40.0, 480.0, 20.0);
    let width = left + plot + 110.0;
    let height = top + plot + 60.0;
    let finite = values.iter().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cw = plot / xs.len().max(1) as f64;
    let ch = plot / ys.len().max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, left + plot / 2.0, escape(title));
    for (iy, row) in values.iter().enumerate() {
        for (ix, &v) in row.iter().enumerate() {
            let fill = if v.is_finite() { ramp((v - lo) / span) } else { "#999999".to_string() };
            let x = left + ix as f64 * cw;
            let y = top + plot - (iy + 1) as f64 * ch;
            let _ = writeln!(s, r#"<rect x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{ch:.3}" fill="{fill}"/>"#);
        }
    }
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{plot}" height="{plot}" fill="none" stroke="black"/>"#);

    let first_last = |v: &[f64]| (v.first().copied().unwrap_or(0.0), v.last().copied().unwrap_or(0.0));
    let (x0, x1) = first_last(xs);
    let (y0, y1) = first_last(ys);
    let base = top + plot;
    let _ = writeln!(s, r#"<text x="{left}" y="{}" text-anchor="start">{x0:.4}</text>"#, base + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{x1:.4}</text>"#, left + plot, base + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + plot / 2.0, base + 40.0, escape(x_name));
    let _ = writeln!(s, r#"<text x="{}" y="{base}" text-anchor="end">{y0:.4}</text>"#, left - 6.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y1:.4}</text>"#, left - 6.0, top + 10.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        top + plot / 2.0,
        escape(y_name)
    );

    let bx = left + plot + 20.0;
    let steps = 32;
    let sh = plot / steps as f64;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let y = top + plot - (k + 1) as f64 * sh;
        let _ = writeln!(s, r#"<rect x="{bx}" y="{y:.3}" width="{bar}" height="{sh:.3}" fill="{}"/>"#, ramp(t));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{base}">{lo:.4}</text>"#, bx + bar + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}">{hi:.4}</text>"#, bx + bar + 4.0, top + 10.0);
    s.push_str("</svg>\n");
    s
}
