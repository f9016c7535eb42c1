//! Image-quality metrics: PSNR and SSIM over RGB.

mod ssim;

pub use ssim::{default_ms_weights, effective_weights, min_side_for_scales, MS_SSIM_WEIGHTS, WINDOW};
pub(crate) use ssim::ms_ssim_with_grad;

use crate::agp::GroupMask;
use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::raster::{Camera, Renderer};
use crate::scalar::Real;
use std::fmt::Write as _;

/// A camera together with its reference image.
#[derive(Clone, Debug, PartialEq)]
pub struct View<T> {
    pub camera: Camera<T>,
    pub image: RgbImage<T>,
}

fn check_shapes<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>) -> Result<()> {
    if !a.same_shape(b) || a.data.len() != b.data.len() {
        return Err(Error::ShapeMismatch(format!(
            "images are {}x{} and {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// `10·log10(peak² / MSE)` over all RGB values; `+∞` for identical images.
pub fn psnr<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>, peak: f64) -> Result<f64> {
    check_shapes(a, b)?;
    let n = a.data.len().max(1) as f64;
    let mse = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| (x.as_f64() - y.as_f64()).powi(2))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Single-scale SSIM averaged over the three channels.
pub fn ssim<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>) -> Result<f64> {
    check_shapes(a, b)?;
    if a.width.min(a.height) < WINDOW {
        return Err(Error::InvalidParameter(format!(
            "SSIM needs images of at least {WINDOW}x{WINDOW}, got {}x{}",
            a.width, a.height
        )));
    }
    Ok(ms_ssim_with_grad(a, b, &[1.0], false).0.as_f64())
}

/// Multi-scale SSIM; falls back to [`ssim`] when the image is too small
/// for `weights.len()` scales.
pub fn ms_ssim<T: Real>(a: &RgbImage<T>, b: &RgbImage<T>, weights: &[f64]) -> Result<f64> {
    check_shapes(a, b)?;
    if a.width.min(a.height) < WINDOW {
        return Err(Error::InvalidParameter(format!(
            "MS-SSIM needs images of at least {WINDOW}x{WINDOW}"
        )));
    }
    Ok(ms_ssim_with_grad(a, b, weights, false).0.as_f64())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewMetrics {
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub views: Vec<ViewMetrics>,
    pub mean: ViewMetrics,
}

impl MetricReport {
    pub fn from_views(views: Vec<ViewMetrics>) -> Self {
        let n = views.len().max(1) as f64;
        let mean = ViewMetrics {
            psnr: views.iter().map(|v| v.psnr).sum::<f64>() / n,
            ssim: views.iter().map(|v| v.ssim).sum::<f64>() / n,
        };
        Self { views, mean }
    }

    pub fn psnr_is_infinite(&self) -> bool {
        self.mean.psnr.is_infinite()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("view,psnr,ssim\n");
        for (i, v) in self.views.iter().enumerate() {
            let _ = writeln!(s, "{i},{},{:.6}", fmt_psnr(v.psnr), v.ssim);
        }
        let _ = writeln!(s, "mean,{},{:.6}", fmt_psnr(self.mean.psnr), self.mean.ssim);
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("{:>6}  {:>9}  {:>8}\n", "view", "PSNR dB", "SSIM");
        for (i, v) in self.views.iter().enumerate() {
            let _ = writeln!(s, "{i:>6}  {:>9}  {:>8.4}", fmt_psnr(v.psnr), v.ssim);
        }
        let _ = writeln!(s, "{:>6}  {:>9}  {:>8.4}", "mean", fmt_psnr(self.mean.psnr), self.mean.ssim);
        s
    }
}

fn fmt_psnr(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p:.4}")
    }
}

/// Renders every view, composites over `bg` and scores it against the
/// view's reference image.
pub fn evaluate<T: Real>(
    renderer: &Renderer<T>,
    views: &[View<T>],
    mask: GroupMask,
    bg: [T; 3],
) -> Result<MetricReport> {
    if views.is_empty() {
        return Err(Error::InvalidParameter("evaluation needs at least one view".into()));
    }
    let mut out = Vec::with_capacity(views.len());
    for v in views {
        let pred = renderer.render(&v.camera, mask)?.over(bg);
        out.push(ViewMetrics {
            psnr: psnr(&pred, &v.image, 1.0)?,
            ssim: ssim(&pred, &v.image)?,
        });
    }
    Ok(MetricReport::from_views(out))
}
