//! Piecewise-linear HU → RGBA transfer functions, one per anatomy group.
//!
//! Text format (UTF-8):
//!
//! ```text
//! preset seen_tf          # optional name line
//! group 7 Skeleton Group  # index 0..=11, free-form name
//! -1024 0 0 0 0           # hu r g b a
//! 350 255 255 255 1.0
//! ```
//!
//! All twelve groups must be present.

use crate::error::{Error, Result};
use crate::gauss6d::NUM_GROUPS;
use std::path::Path;

const SEEN_TF: &str = include_str!("../../presets/seen_tf.txt");
const UNSEEN_TF: &str = include_str!("../../presets/unseen_tf.txt");

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TfPoint {
    pub hu: f64,
    /// Colours 0-255, alpha 0-1.
    pub rgba: [f64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferFunction {
    pub name: String,
    pub points: Vec<TfPoint>,
}

impl TransferFunction {
    pub fn new(name: impl Into<String>, points: Vec<TfPoint>) -> Result<Self> {
        let name = name.into();
        if points.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "transfer function `{name}` has no points"
            )));
        }
        for w in points.windows(2) {
            if !(w[1].hu > w[0].hu) {
                return Err(Error::InvalidParameter(format!(
                    "transfer function `{name}`: HU values must strictly increase ({} then {})",
                    w[0].hu, w[1].hu
                )));
            }
        }
        for p in &points {
            let [r, g, b, a] = p.rgba;
            if ![r, g, b].iter().all(|c| (0.0..=255.0).contains(c)) || !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidParameter(format!(
                    "transfer function `{name}`: value {:?} at {} HU out of range",
                    p.rgba, p.hu
                )));
            }
        }
        Ok(Self { name, points })
    }
}

/// Linear interpolation between neighbouring control points, per channel,
/// clamped to the end values outside the covered HU range. Control points
/// themselves are reproduced exactly.
pub fn eval_transfer_function(tf: &TransferFunction, hu: f64) -> [f64; 4] {
    let pts = &tf.points;
    let first = &pts[0];
    let last = &pts[pts.len() - 1];
    if hu.is_nan() || hu <= first.hu {
        return first.rgba;
    }
    if hu >= last.hu {
        return last.rgba;
    }
    // first index with point.hu > hu; in 1..len
    let hi = pts.partition_point(|p| p.hu <= hu);
    let a = &pts[hi - 1];
    let b = &pts[hi];
    if hu == a.hu {
        return a.rgba;
    }
    let t = (hu - a.hu) / (b.hu - a.hu);
    std::array::from_fn(|c| a.rgba[c] * (1.0 - t) + b.rgba[c] * t)
}

/// A complete set of per-group transfer functions.
#[derive(Clone, Debug, PartialEq)]
pub struct TfSet {
    pub name: String,
    pub groups: Vec<TransferFunction>,
}

impl TfSet {
    pub fn seen() -> Self {
        Self::parse(SEEN_TF, "seen_tf").expect("bundled preset parses")
    }

    pub fn unseen() -> Self {
        Self::parse(UNSEEN_TF, "unseen_tf").expect("bundled preset parses")
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["seen_tf", "unseen_tf"]
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "seen_tf" | "seen" => Some(Self::seen()),
            "unseen_tf" | "unseen" => Some(Self::unseen()),
            _ => None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("custom");
        Self::parse(&text, stem).map_err(|e| Error::Malformed {
            what: "transfer-function file",
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    pub fn group(&self, g: usize) -> &TransferFunction {
        &self.groups[g]
    }

    pub fn parse(text: &str, default_name: &str) -> Result<Self> {
        let mut name = default_name.to_string();
        let mut groups: Vec<Option<(String, Vec<TfPoint>)>> = vec![None; NUM_GROUPS];
        let mut current: Option<usize> = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::InvalidParameter(format!("line {}: {msg}", n + 1));
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap_or_default();
            match head {
                "preset" => {
                    name = tokens.collect::<Vec<_>>().join(" ");
                }
                "group" => {
                    let idx: usize = tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("expected group index".into()))?;
                    if idx >= NUM_GROUPS {
                        return Err(bad(format!("group index {idx} outside 0..=11")));
                    }
                    if groups[idx].is_some() {
                        return Err(bad(format!("group {idx} defined twice")));
                    }
                    let gname = tokens.collect::<Vec<_>>().join(" ");
                    groups[idx] = Some((gname, Vec::new()));
                    current = Some(idx);
                }
                _ => {
                    let idx = current.ok_or_else(|| bad("point before any `group` line".into()))?;
                    let vals: Vec<f64> = line
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| bad(format!("{e}")))?;
                    if vals.len() != 5 {
                        return Err(bad(format!("expected `hu r g b a`, found {} values", vals.len())));
                    }
                    let entry = groups[idx].as_mut().expect("current group exists");
                    entry.1.push(TfPoint {
                        hu: vals[0],
                        rgba: [vals[1], vals[2], vals[3], vals[4]],
                    });
                }
            }
        }
        let groups = groups
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                let (gname, pts) =
                    g.ok_or_else(|| Error::InvalidParameter(format!("group {i} missing")))?;
                TransferFunction::new(gname, pts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { name, groups })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("preset {}\n", self.name);
        for (i, tf) in self.groups.iter().enumerate() {
            s.push_str(&format!("group {i} {}\n", tf.name));
            for p in &tf.points {
                s.push_str(&format!(
                    "{:?} {:?} {:?} {:?} {:?}\n",
                    p.hu, p.rgba[0], p.rgba[1], p.rgba[2], p.rgba[3]
                ));
            }
        }
        s
    }
}
