//! Render requests as they arrive on the wire or the command line.

use ctsplat_core::agp::GroupMask;
use ctsplat_core::image::encode_png;
use ctsplat_core::raster::Camera;
use ctsplat_core::Renderer32;
use std::collections::HashMap;
use std::fmt;

pub const MAX_PIXELS: usize = 4096 * 4096;
pub const FOV_RANGE: (f64, f64) = (0.05, 3.0);
pub const DEFAULT_SIZE: usize = 512;
pub const DEFAULT_FOV: f64 = 0.5;
pub const DEFAULT_UP: [f64; 3] = [0.0, 1.0, 0.0];

#[derive(Debug, Clone, PartialEq)]
pub enum RequestError {
    Malformed(String),
    TooLarge(String),
}

impl fmt::Display for RequestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RequestError::Malformed(m) => write!(f, "malformed request: {m}"),
            RequestError::TooLarge(m) => write!(f, "resolution too large: {m}"),
        }
    }
}

impl std::error::Error for RequestError {}

fn bad(msg: impl Into<String>) -> RequestError {
    RequestError::Malformed(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderRequest {
    pub position: [f64; 3],
    pub target: [f64; 3],
    pub up: [f64; 3],
    pub fov_y: f64,
    pub width: usize,
    pub height: usize,
    pub mask: GroupMask,
    pub background: [f64; 3],
}

pub fn parse_vec3(s: &str) -> Result<[f64; 3], RequestError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad(format!("expected three comma-separated numbers, got {s:?}")));
    }
    let mut out = [0.0f64; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| bad(format!("not a number: {p:?}")))?;
        if !o.is_finite() {
            return Err(bad(format!("not finite: {p:?}")));
        }
    }
    Ok(out)
}

/// Group mask as decimal or `0x` hexadecimal bits.
pub fn parse_mask(s: &str) -> Result<GroupMask, RequestError> {
    let s = s.trim();
    let bits = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u16::from_str_radix(hex, 16),
        None => s.parse::<u16>(),
    }
    .map_err(|_| bad(format!("bad group mask {s:?}")))?;
    GroupMask::from_bits(bits).ok_or_else(|| bad(format!("group mask {bits:#x} has bits above group 11")))
}

pub fn parse_background(s: &str) -> Result<[f64; 3], RequestError> {
    let bg = parse_vec3(s)?;
    if bg.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(bad("background components must lie in [0, 1]"));
    }
    Ok(bg)
}

impl RenderRequest {
    pub fn new(position: [f64; 3], target: [f64; 3]) -> Self {
        Self {
            position,
            target,
            up: DEFAULT_UP,
            fov_y: DEFAULT_FOV,
            width: DEFAULT_SIZE,
            height: DEFAULT_SIZE,
            mask: GroupMask::all(),
            background: [0.0; 3],
        }
    }

    /// Query keys: `pos`, `target` (required), `up`, `fov`, `width`,
    /// `height`, `groups`, `bg`.
    pub fn from_query(q: &HashMap<String, String>) -> Result<Self, RequestError> {
        for k in q.keys() {
            if !matches!(k.as_str(), "pos" | "target" | "up" | "fov" | "width" | "height" | "groups" | "bg") {
                return Err(bad(format!("unknown parameter {k:?}")));
            }
        }
        let get = |k: &str| q.get(k).map(String::as_str);
        let need = |k: &str| get(k).ok_or_else(|| bad(format!("missing parameter {k:?}")));
        let size = |k: &str| -> Result<usize, RequestError> {
            get(k).map_or(Ok(DEFAULT_SIZE), |v| v.trim().parse().map_err(|_| bad(format!("bad {k} {v:?}"))))
        };
        let mut r = Self::new(parse_vec3(need("pos")?)?, parse_vec3(need("target")?)?);
        if let Some(v) = get("up") {
            r.up = parse_vec3(v)?;
        }
        if let Some(v) = get("fov") {
            r.fov_y = v.trim().parse().map_err(|_| bad(format!("bad fov {v:?}")))?;
        }
        r.width = size("width")?;
        r.height = size("height")?;
        if let Some(v) = get("groups") {
            r.mask = parse_mask(v)?;
        }
        if let Some(v) = get("bg") {
            r.background = parse_background(v)?;
        }
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), RequestError> {
        if self.width == 0 || self.height == 0 {
            return Err(bad("width and height must be positive"));
        }
        if self.width.checked_mul(self.height).is_none_or(|n| n > MAX_PIXELS) {
            return Err(RequestError::TooLarge(format!(
                "{}x{} exceeds 4096² pixels",
                self.width, self.height
            )));
        }
        let (lo, hi) = FOV_RANGE;
        if !(self.fov_y > lo && self.fov_y < hi) {
            return Err(bad(format!("fov {} outside ({lo}, {hi})", self.fov_y)));
        }
        self.camera().map(|_| ())
    }

    pub fn camera(&self) -> Result<Camera<f32>, RequestError> {
        let f = |v: [f64; 3]| v.map(|x| x as f32);
        Camera::look_at(
            f(self.position),
            f(self.target),
            f(self.up),
            self.fov_y as f32,
            self.width,
            self.height,
        )
        .map_err(|e| bad(e.to_string()))
    }
}

/// Renders `req` to an opaque 8-bit RGBA PNG.
pub fn render_png(renderer: &Renderer32, req: &RenderRequest) -> ctsplat_core::Result<Vec<u8>> {
    let cam = req.camera().map_err(|e| ctsplat_core::Error::InvalidParameter(e.to_string()))?;
    let img = renderer.render(&cam, req.mask)?;
    let rgba = img.to_rgba8(Some(req.background.map(|c| c as f32)));
    encode_png(req.width, req.height, &rgba)
}
