//! On-disk formats used by the command-line tool: sweep CSV, polyline
//! CSV/SVG, node and edge lists, flat `key=value` configs and run manifests.
//!
//! Floating-point values are written with Rust's shortest round-trip
//! representation, so re-reading any file reproduces the exact `f64`s.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::domain::{Family, FractalDomain};
use crate::error::{Error, Result};
use crate::experiments::SweepRow;
use crate::geometry::Point2;

pub const SWEEP_HEADER: &str =
    "family,theta,rho,trials,successes,p_hat,ci_low,ci_high,mean_n,mean_isolated,depth_exhausted";
pub const POLYLINE_HEADER: &str = "x,y";
pub const NODES_HEADER: &str = "id,x,y";
pub const EDGES_HEADER: &str = "id_a,id_b";

/// Formats `x` with `digits` significant digits in plain decimal notation.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.family,
            r.theta,
            r.rho,
            r.trials,
            r.successes,
            r.p_hat,
            r.ci_low,
            r.ci_high,
            r.mean_n,
            r.mean_isolated,
            r.depth_exhausted
        )?;
    }
    Ok(())
}

fn malformed(line: usize, what: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("malformed CSV at line {line}: {what}"))
}

fn field<T: std::str::FromStr>(line: usize, name: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| malformed(line, format_args!("bad {name} value {raw:?}")))
}

pub fn read_sweep_csv<R: BufRead>(input: R) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == SWEEP_HEADER => {}
        Some((_, Ok(h))) => return Err(malformed(1, format_args!("unexpected header {h:?}"))),
        _ => return Err(malformed(1, "missing header")),
    }
    for (i, line) in lines {
        let line = line.map_err(|e| malformed(i + 1, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(malformed(i + 1, format_args!("expected 11 fields, found {}", f.len())));
        }
        let ln = i + 1;
        let family: u32 = field(ln, "family", f[0])?;
        let row = SweepRow {
            family: Family::try_from(family).map_err(|e| malformed(ln, e))?,
            theta: field(ln, "theta", f[1])?,
            rho: field(ln, "rho", f[2])?,
            trials: field(ln, "trials", f[3])?,
            successes: field(ln, "successes", f[4])?,
            p_hat: field(ln, "p_hat", f[5])?,
            ci_low: field(ln, "ci_low", f[6])?,
            ci_high: field(ln, "ci_high", f[7])?,
            mean_n: field(ln, "mean_n", f[8])?,
            mean_isolated: field(ln, "mean_isolated", f[9])?,
            depth_exhausted: field(ln, "depth_exhausted", f[10])?,
        };
        if row.trials == 0 || row.successes > row.trials {
            return Err(malformed(ln, "successes must lie in 0..=trials with trials >= 1"));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Closed polyline as `x,y` rows; the first vertex is repeated at the end.
pub fn write_polyline_csv<W: Write>(mut out: W, vertices: &[Point2]) -> io::Result<()> {
    writeln!(out, "{POLYLINE_HEADER}")?;
    for v in vertices.iter().chain(vertices.first()) {
        writeln!(out, "{},{}", v.x, v.y)?;
    }
    Ok(())
}

pub fn read_polyline_csv<R: BufRead>(input: R) -> Result<Vec<Point2>> {
    read_points(input, POLYLINE_HEADER, false)
}

pub fn write_nodes_csv<W: Write>(mut out: W, points: &[Point2]) -> io::Result<()> {
    writeln!(out, "{NODES_HEADER}")?;
    for (i, p) in points.iter().enumerate() {
        writeln!(out, "{i},{},{}", p.x, p.y)?;
    }
    Ok(())
}

pub fn read_nodes_csv<R: BufRead>(input: R) -> Result<Vec<Point2>> {
    read_points(input, NODES_HEADER, true)
}

fn read_points<R: BufRead>(input: R, header: &str, with_id: bool) -> Result<Vec<Point2>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| malformed(i + 1, e))?;
        if i == 0 {
            if line.trim() != header {
                return Err(malformed(1, format_args!("unexpected header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let off = with_id as usize;
        if f.len() != 2 + off {
            return Err(malformed(i + 1, "wrong field count"));
        }
        if with_id {
            let id: usize = field(i + 1, "id", f[0])?;
            if id != out.len() {
                return Err(malformed(i + 1, "ids must be consecutive from 0"));
            }
        }
        out.push(Point2::new(field(i + 1, "x", f[off])?, field(i + 1, "y", f[off + 1])?));
    }
    Ok(out)
}

pub fn write_edges_csv<W: Write>(mut out: W, edges: &[(usize, usize)]) -> io::Result<()> {
    writeln!(out, "{EDGES_HEADER}")?;
    for (a, b) in edges {
        writeln!(out, "{a},{b}")?;
    }
    Ok(())
}

pub fn read_edges_csv<R: BufRead>(input: R) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| malformed(i + 1, e))?;
        if i == 0 {
            if line.trim() != EDGES_HEADER {
                return Err(malformed(1, "unexpected header"));
            }
            continue;
        }
        if let Some((a, b)) = line.split_once(',') {
            out.push((field(i + 1, "id_a", a)?, field(i + 1, "id_b", b)?));
        }
    }
    Ok(out)
}

/// Stroke-only SVG of a closed boundary on the fixed viewBox
/// `[-y_max, y_max]²`, with the y axis pointing up.
pub fn polyline_svg(domain: &FractalDomain, vertices: &[Point2]) -> String {
    let h = domain.y_max;
    let mut path = String::new();
    for (i, v) in vertices.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(path, "{cmd}{} {} ", v.x, -v.y);
    }
    path.push('Z');
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n\
         <path d=\"{path}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\" stroke-linejoin=\"round\"/>\n\
         </svg>\n",
        -h,
        -h,
        2.0 * h,
        2.0 * h,
        2.0 * h / 800.0
    )
}

/// Parses a flat `key = value` file. Blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("config line {}: expected key=value, got {raw:?}", i + 1))
        })?;
        let k = k.trim().to_ascii_lowercase().replace('-', "_");
        if map.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::InvalidParameter(format!("config key {k:?} given twice")));
        }
    }
    Ok(map)
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number {s:?} in list {raw:?}")))
        })
        .collect()
}

/// Provenance record written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub master_seed: Option<u64>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, master_seed: Option<u64>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: serde_json::to_value(config).expect("config serialises"),
            master_seed,
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}
