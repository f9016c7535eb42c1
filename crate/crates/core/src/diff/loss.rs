use crate::error::{Error, Result};
use crate::image::{RenderedImage, RgbImage};
use crate::metrics::{default_ms_weights, ms_ssim_with_grad, WINDOW};
use crate::scalar::Real;

/// `λ_L1 · L1 + λ_SSIM · (1 − MS-SSIM)`
#[derive(Clone, Debug, PartialEq)]
pub struct LossConfig {
    pub lambda_l1: f64,
    pub lambda_ssim: f64,
    /// One exponent per scale.
    pub ms_ssim_weights: Vec<f64>,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda_l1: 0.8,
            lambda_ssim: 0.2,
            ms_ssim_weights: default_ms_weights(),
        }
    }
}

impl LossConfig {
    pub fn ms_ssim_scales(&self) -> usize {
        self.ms_ssim_weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        let ok_lambda = |x: f64| x.is_finite() && x >= 0.0;
        if !ok_lambda(self.lambda_l1) || !ok_lambda(self.lambda_ssim) {
            return Err(Error::InvalidParameter("loss weights must be finite and non-negative".into()));
        }
        if self.lambda_l1 == 0.0 && self.lambda_ssim == 0.0 {
            return Err(Error::InvalidParameter("both loss weights are zero".into()));
        }
        if self.ms_ssim_weights.is_empty() {
            return Err(Error::InvalidParameter("MS-SSIM needs at least one scale".into()));
        }
        let s: f64 = self.ms_ssim_weights.iter().sum();
        if (s - 1.0).abs() > 1e-9 || self.ms_ssim_weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "MS-SSIM weights must be non-negative and sum to 1 (sum {s})"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossValue {
    pub l1: f64,
    /// `1 − MS-SSIM`
    pub ssim_loss: f64,
    pub total: f64,
}

/// Loss over the RGB channels and its gradient with respect to `pred`.
pub fn loss<T: Real>(pred: &RgbImage<T>, gt: &RgbImage<T>, cfg: &LossConfig) -> Result<(LossValue, RgbImage<T>)> {
    cfg.validate()?;
    if !pred.same_shape(gt) || pred.data.len() != gt.data.len() {
        return Err(Error::ShapeMismatch(format!(
            "prediction {}x{} vs ground truth {}x{}",
            pred.width, pred.height, gt.width, gt.height
        )));
    }
    let n = T::lit(pred.data.len() as f64);
    let l1_scale = T::lit(cfg.lambda_l1) / n;
    let mut l1 = T::zero();
    let mut grad = RgbImage::filled(pred.width, pred.height, [T::zero(); 3]);
    for ((g, &p), &q) in grad.data.iter_mut().zip(&pred.data).zip(&gt.data) {
        let d = p - q;
        l1 += d.abs();
        *g = if d > T::zero() {
            l1_scale
        } else if d < T::zero() {
            -l1_scale
        } else {
            T::zero()
        };
    }
    l1 /= n;
    let mut ssim_loss = T::zero();
    if cfg.lambda_ssim > 0.0 {
        if pred.width.min(pred.height) < WINDOW {
            return Err(Error::InvalidParameter(format!(
                "the SSIM term needs images of at least {WINDOW}x{WINDOW}"
            )));
        }
        let (ms, g) = ms_ssim_with_grad(pred, gt, &cfg.ms_ssim_weights, true);
        ssim_loss = T::one() - ms;
        let k = T::lit(cfg.lambda_ssim);
        for (a, b) in grad.data.iter_mut().zip(&g.expect("gradient requested").data) {
            *a -= k * *b;
        }
    }
    let total = T::lit(cfg.lambda_l1) * l1 + T::lit(cfg.lambda_ssim) * ssim_loss;
    Ok((
        LossValue {
            l1: l1.as_f64(),
            ssim_loss: ssim_loss.as_f64(),
            total: total.as_f64(),
        },
        grad,
    ))
}

/// Pulls an RGB gradient of `render.over(bg)` back to the premultiplied
/// RGBA framebuffer: `∂/∂C = g`, `∂/∂A = −g·bg`.
pub fn grad_through_background<T: Real>(g: &RgbImage<T>, bg: [T; 3]) -> RenderedImage<T> {
    let mut data = Vec::with_capacity(4 * g.width * g.height);
    for p in g.data.chunks_exact(3) {
        data.extend_from_slice(p);
        data.push(-(p[0] * bg[0] + p[1] * bg[1] + p[2] * bg[2]));
    }
    RenderedImage {
        width: g.width,
        height: g.height,
        data,
    }
}
