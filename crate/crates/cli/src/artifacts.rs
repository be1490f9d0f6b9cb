//! Output artifacts. Every one of them carries the tool version, the echoed
//! configuration, the seed and the tolerances in force.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use adsqf::limit_set::LimitSample;
use adsqf::tol::Tolerances;
use serde::Serialize;

use crate::{CliError, RunFlags};

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool { name: "adsqf", version: env!("CARGO_PKG_VERSION") };

/// The configuration echoed into artifacts. Thread count and output location
/// are left out: neither changes any result, and artifacts must be
/// byte-identical across them.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub command: &'static str,
    pub input: String,
    pub words: u8,
    pub gap: f64,
    pub seed: u64,
    pub svg: bool,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl ConfigEcho {
    pub fn new(command: &'static str, input: &Path, run: &RunFlags) -> Self {
        Self {
            command,
            input: input.display().to_string(),
            words: run.words,
            gap: run.gap,
            seed: run.seed,
            svg: run.svg,
            extra: serde_json::Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: Tool,
    pub config: &'a ConfigEcho,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub report: T,
}

pub fn envelope<T: Serialize>(config: &ConfigEcho, report: T) -> Envelope<'_, T> {
    Envelope { tool: TOOL, config, seed: config.seed, tolerances: Tolerances::current(), report }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(adsqf::Error::from)?;
    s.push('\n');
    Ok(s)
}

pub fn out_dir(run: &RunFlags) -> Result<Option<PathBuf>, CliError> {
    match &run.out {
        None => Ok(None),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
            Ok(Some(dir.clone()))
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e| CliError::Io(path.to_path_buf(), e);
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}

/// Prints the report to stdout and, with `--out`, also writes `<stem>.json`.
pub fn emit_report<T: Serialize>(config: &ConfigEcho, report: T, run: &RunFlags, stem: &str) -> Result<(), CliError> {
    let text = to_json(&envelope(config, report))?;
    if let Some(dir) = out_dir(run)? {
        write_file(&dir.join(format!("{stem}.json")), text.as_bytes())?;
    }
    print!("{text}");
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

/// Scatter of `(u-angle, theta)` on the fixed window `[0, 2 pi) x [0, pi)`.
/// Only the first two sphere coordinates enter the u-angle, so for `n > 2`
/// this is a projection.
pub fn limit_set_svg(sample: &LimitSample, metadata_json: &str) -> String {
    let sx = |x: f64| MARGIN + x / TAU * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - y / PI * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<metadata>{}</metadata>", xml_escape(metadata_json.trim_end()));
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (label, x) in [("0", 0.0), ("π", PI), ("2π", TAU)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{label}</text>"#,
            sx(x),
            HEIGHT - MARGIN + 16.0
        );
    }
    for (label, y) in [("0", 0.0), ("π/2", PI / 2.0), ("π", PI)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{label}</text>"#,
            MARGIN - 6.0,
            sy(y) + 4.0
        );
    }
    let _ = writeln!(s, r#"<g fill="steelblue">"#);
    for i in 0..sample.len() {
        let u = sample.u(i);
        let phi = u[1].atan2(u[0]).rem_euclid(TAU);
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="0.8"/>"#, sx(phi), sy(sample.theta(i)));
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
