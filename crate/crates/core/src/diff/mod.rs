//! Loss, analytic render gradients, Adam with PolyLR, and per-scene
//! fine-tuning.

mod adam;
mod backward;
mod finetune;
mod loss;

pub use adam::{
    adam_step, load_optimizer_state, polylr, save_optimizer_state, AdamConfig, LrMultipliers, OptimizerState,
    POLY_POWER,
};
pub use backward::{backward_from_projection, render_backward, GradientBuffer};
pub use finetune::{
    finetune, finetune_resume, trace_csv, write_trace_csv, FinetuneConfig, FinetuneResult, TraceRow, DEFAULT_BASE_LR,
    DEFAULT_ITERS,
};
pub use loss::{grad_through_background, loss, LossConfig, LossValue};
