//! Anatomy-aware 6D Gaussian splatting for CT volumes.
//!
//! The pipeline runs preprocessing ([`volume`]), scene instantiation
//! ([`agp`]), view-dependent slicing of each primitive ([`gauss6d`]),
//! tile-based rasterisation ([`raster`]) and, for per-scene fine-tuning,
//! analytic gradients plus Adam ([`diff`]). Scenes persist through
//! [`scene_io`].
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the usual choices.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod agp;
pub mod diff;
pub mod error;
pub mod gauss6d;
pub mod image;
pub mod linalg;
pub mod metrics;
pub mod phantom;
pub mod raster;
pub mod scalar;
pub mod scene_io;
pub mod volume;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Gaussian6D32 = gauss6d::Gaussian6D<f32>;
pub type Gaussian6D64 = gauss6d::Gaussian6D<f64>;
pub type Scene32 = agp::Scene<f32>;
pub type Scene64 = agp::Scene<f64>;
pub type CtVolume32 = volume::CtVolume<f32>;
pub type InputVolume32 = volume::InputVolume6<f32>;
pub type ParamVolume32 = agp::ParamVolume<f32>;
pub type Camera32 = raster::Camera<f32>;
pub type Camera64 = raster::Camera<f64>;
pub type Renderer32 = raster::Renderer<f32>;
pub type Renderer64 = raster::Renderer<f64>;
