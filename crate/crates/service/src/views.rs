//! JSON view lists: cameras plus reference image paths.
//!
//! ```json
//! { "background": [0, 0, 0],
//!   "views": [ { "position": [0, 0, 300], "target": [0, 0, 0], "up": [0, 1, 0],
//!                "fov": 0.5, "width": 128, "height": 128, "image": "view_000.png" } ] }
//! ```
//!
//! Image paths are relative to the directory of the JSON file.

use crate::request::{RenderRequest, RequestError, DEFAULT_UP};
use ctsplat_core::agp::{GroupMask, Scene};
use ctsplat_core::image::read_png_rgb;
use ctsplat_core::metrics::View;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn default_up() -> [f64; 3] {
    DEFAULT_UP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewSpec {
    pub position: [f64; 3],
    pub target: [f64; 3],
    #[serde(default = "default_up")]
    pub up: [f64; 3],
    pub fov: f64,
    pub width: usize,
    pub height: usize,
    pub image: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewsFile {
    #[serde(default)]
    pub background: [f64; 3],
    pub views: Vec<ViewSpec>,
}

#[derive(Debug)]
pub enum ViewsError {
    Io(String),
    Invalid(String),
}

impl ViewSpec {
    pub fn request(&self, background: [f64; 3]) -> Result<RenderRequest, RequestError> {
        let r = RenderRequest {
            position: self.position,
            target: self.target,
            up: self.up,
            fov_y: self.fov,
            width: self.width,
            height: self.height,
            mask: GroupMask::all(),
            background,
        };
        r.validate()?;
        Ok(r)
    }
}

impl ViewsFile {
    pub fn load(path: &Path) -> Result<Self, ViewsError> {
        let text = std::fs::read_to_string(path).map_err(|e| ViewsError::Io(format!("reading {}: {e}", path.display())))?;
        let v: Self =
            serde_json::from_str(&text).map_err(|e| ViewsError::Io(format!("parsing {}: {e}", path.display())))?;
        if v.views.is_empty() {
            return Err(ViewsError::Invalid(format!("{} lists no views", path.display())));
        }
        for (i, spec) in v.views.iter().enumerate() {
            spec.request(v.background)
                .map_err(|e| ViewsError::Invalid(format!("view {i}: {e}")))?;
        }
        Ok(v)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("views serialise");
        std::fs::write(path, text + "\n")
    }

    pub fn image_path(views_path: &Path, spec: &ViewSpec) -> PathBuf {
        views_path.parent().unwrap_or(Path::new(".")).join(&spec.image)
    }

    /// Cameras with their reference images composited over the background.
    pub fn load_views(&self, views_path: &Path) -> Result<Vec<View<f32>>, ViewsError> {
        let bg = self.background.map(|c| c as f32);
        self.views
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let camera = spec
                    .request(self.background)
                    .and_then(|r| r.camera())
                    .map_err(|e| ViewsError::Invalid(format!("view {i}: {e}")))?;
                let path = Self::image_path(views_path, spec);
                let image = read_png_rgb(&path, bg).map_err(|e| ViewsError::Io(e.to_string()))?;
                if image.width != spec.width || image.height != spec.height {
                    return Err(ViewsError::Invalid(format!(
                        "{} is {}x{}, view {i} expects {}x{}",
                        path.display(),
                        image.width,
                        image.height,
                        spec.width,
                        spec.height
                    )));
                }
                Ok(View { camera, image })
            })
            .collect()
    }
}

/// `count` cameras on a ring around the scene's bounding box, slightly
/// tilted so consecutive views differ in elevation.
pub fn ring_views<T: ctsplat_core::Real>(scene: &Scene<T>, count: usize, size: usize, fov: f64, distance: Option<f64>) -> ViewsFile {
    let (lo, hi) = scene.bounds().unwrap_or(([-1.0; 3], [1.0; 3]));
    let centre: [f64; 3] = std::array::from_fn(|a| 0.5 * (lo[a] + hi[a]));
    let radius = (0..3).map(|a| (hi[a] - lo[a]).powi(2)).sum::<f64>().sqrt() * 0.5;
    let dist = distance.unwrap_or(radius.max(1e-3) / (0.5 * fov).tan() * 1.1);
    let views = (0..count)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / count as f64;
            let e = 0.35 * (a * 1.7).sin();
            let offset = [e.cos() * a.sin(), e.sin(), e.cos() * a.cos()];
            ViewSpec {
                position: std::array::from_fn(|k| centre[k] + dist * offset[k]),
                target: centre,
                up: DEFAULT_UP,
                fov,
                width: size,
                height: size,
                image: PathBuf::from(format!("view_{i:03}.png")),
            }
        })
        .collect();
    ViewsFile { background: [0.0; 3], views }
}
