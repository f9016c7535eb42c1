use super::{adam_step, backward_from_projection, grad_through_background, loss, AdamConfig, LossConfig, OptimizerState};
use crate::agp::{GroupMask, Scene};
use crate::error::{Error, Result};
use crate::metrics::View;
use crate::raster::{composite, RenderConfig, Renderer};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;

pub const DEFAULT_ITERS: usize = 300;
pub const DEFAULT_BASE_LR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct FinetuneConfig {
    pub iters: usize,
    pub base_lr: f64,
    pub seed: u64,
    pub loss: LossConfig,
    pub adam: AdamConfig,
    pub render: RenderConfig,
    pub mask: GroupMask,
    /// Colour the rendering is composited over before comparison.
    pub background: [f64; 3],
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        Self {
            iters: DEFAULT_ITERS,
            base_lr: DEFAULT_BASE_LR,
            seed: 0,
            loss: LossConfig::default(),
            adam: AdamConfig::default(),
            render: RenderConfig::default(),
            mask: GroupMask::all(),
            background: [0.0; 3],
        }
    }
}

/// One row of the loss trace, measured before that iteration's update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub view: usize,
    pub lr: f64,
    pub l1: f64,
    pub ssim_loss: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct FinetuneResult<T> {
    pub scene: Scene<T>,
    pub trace: Vec<TraceRow>,
    pub state: OptimizerState<T>,
}

/// Per-scene optimisation against reference views. Each iteration picks a
/// view uniformly at random (seeded), renders, evaluates the loss,
/// backpropagates and applies one Adam update.
pub fn finetune<T: Real>(scene: &Scene<T>, views: &[View<T>], cfg: &FinetuneConfig) -> Result<FinetuneResult<T>> {
    let state = OptimizerState::new(scene.len(), cfg.base_lr, cfg.iters as u64, cfg.adam);
    finetune_resume(scene.clone(), state, views, cfg)
}

/// Continues from a checkpointed optimizer state; runs until
/// `state.step + skipped` reaches `cfg.iters`.
pub fn finetune_resume<T: Real>(
    mut scene: Scene<T>,
    mut state: OptimizerState<T>,
    views: &[View<T>],
    cfg: &FinetuneConfig,
) -> Result<FinetuneResult<T>> {
    if views.is_empty() {
        return Err(Error::InvalidParameter("fine-tuning needs at least one view".into()));
    }
    cfg.loss.validate()?;
    if state.m.len() != scene.len() {
        return Err(Error::ShapeMismatch(format!(
            "optimizer state has {} rows for {} primitives",
            state.m.len(),
            scene.len()
        )));
    }
    for v in views {
        if v.image.width != v.camera.width || v.image.height != v.camera.height {
            return Err(Error::ShapeMismatch("view image and camera sizes differ".into()));
        }
    }
    let bg = cfg.background.map(T::lit);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = (state.step + state.skipped) as usize;
    // Keep the view sequence aligned with an uninterrupted run.
    for _ in 0..start {
        rng.gen_range(0..views.len());
    }
    let mut trace = Vec::with_capacity(cfg.iters.saturating_sub(start));
    for it in start..cfg.iters {
        let vi = rng.gen_range(0..views.len());
        let view = &views[vi];
        let renderer = Renderer::new(&scene, cfg.render);
        let proj = renderer.project(&view.camera, cfg.mask)?;
        let (img, _) = composite(&proj);
        let (lv, d_rgb) = loss(&img.over(bg), &view.image, &cfg.loss)?;
        let d_img = grad_through_background(&d_rgb, bg);
        let grads = backward_from_projection(&scene, &view.camera, &cfg.render, &proj, &d_img)?;
        let lr = state.current_lr()?;
        adam_step(&mut state, &grads, &mut scene)?;
        trace.push(TraceRow {
            iteration: it,
            view: vi,
            lr,
            l1: lv.l1,
            ssim_loss: lv.ssim_loss,
            total: lv.total,
        });
    }
    Ok(FinetuneResult { scene, trace, state })
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut s = String::from("iteration,lr,l1,ssim_loss,total\n");
    for r in trace {
        let _ = writeln!(s, "{},{:e},{:.9},{:.9},{:.9}", r.iteration, r.lr, r.l1, r.ssim_loss, r.total);
    }
    s
}

pub fn write_trace_csv(path: impl AsRef<Path>, trace: &[TraceRow]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, trace_csv(trace)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
