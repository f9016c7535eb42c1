//! Forward rendering: per-view slicing, EWA projection, tile binning and
//! front-to-back compositing.
//!
//! A [`Renderer`] caches the view-independent part of every primitive
//! (covariance factor, Schur complement, directional precision) so that
//! each frame only pays for the per-view work. Group masks are applied
//! while projecting, which keeps toggling anatomy free of any
//! re-instantiation.

mod camera;
mod composite;
mod project;
mod tiles;

pub use camera::{Camera, DEFAULT_FAR, DEFAULT_NEAR};
pub use composite::composite_tile;
pub use project::{
    prepare_gaussian, project_gaussian, project_prepared, splat_power, PixelRect, PreparedGaussian,
    Splat2D, ALPHA_MAX, ALPHA_MIN, T_MIN,
};
pub(crate) use project::screen_jacobian;
pub use tiles::{bin_and_sort, depth_order, TileGrid, DEFAULT_TILE_SIZE};

use crate::agp::{GroupMask, Scene};
use crate::error::{Error, Result};
use crate::gauss6d::Modulation;
use crate::image::RenderedImage;
use crate::scalar::Real;
use rayon::prelude::*;

pub const DEFAULT_LOW_PASS: f64 = 0.3;
/// Largest fraction of degenerate primitives tolerated before a render fails.
pub const MAX_DEGENERATE_FRACTION: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderConfig {
    pub tile_size: usize,
    /// Added to the diagonal of every screen covariance, in pixels².
    pub low_pass: f64,
    pub modulation: Modulation,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            tile_size: DEFAULT_TILE_SIZE,
            low_pass: DEFAULT_LOW_PASS,
            modulation: Modulation::PeakNormalized,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RenderStats {
    /// Primitives selected by the group mask.
    pub selected: usize,
    /// Selected primitives skipped for a degenerate covariance.
    pub degenerate: usize,
    pub visible: usize,
    pub tile_entries: usize,
    pub contributions: usize,
}

/// Splats of one view plus the bookkeeping needed to composite them.
#[derive(Clone, Debug)]
pub struct Projection<T> {
    pub splats: Vec<Splat2D<T>>,
    pub grid: TileGrid,
    pub tiles: Vec<Vec<u32>>,
    pub stats: RenderStats,
}

/// A scene prepared for rendering. Safe to share between threads.
#[derive(Clone, Debug)]
pub struct Renderer<T> {
    prepared: Vec<Option<PreparedGaussian<T>>>,
    labels: Vec<u8>,
    config: RenderConfig,
}

impl<T: Real> Renderer<T> {
    pub fn new(scene: &Scene<T>, config: RenderConfig) -> Self {
        let prepared = scene
            .gaussians
            .par_iter()
            .map(|g| prepare_gaussian(g, scene.cov_scale, config.modulation).ok())
            .collect();
        Self {
            prepared,
            labels: scene.gaussians.iter().map(|g| g.label).collect(),
            config,
        }
    }

    pub fn config(&self) -> &RenderConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.prepared.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prepared.is_empty()
    }

    /// Projects every selected primitive and bins the visible splats.
    pub fn project(&self, cam: &Camera<T>, mask: GroupMask) -> Result<Projection<T>> {
        cam.validate()?;
        let low_pass = T::lit(self.config.low_pass);
        let per: Vec<(bool, bool, Option<Splat2D<T>>)> = self
            .prepared
            .par_iter()
            .zip(self.labels.par_iter())
            .enumerate()
            .map(|(i, (p, &label))| {
                if !mask.contains(label) {
                    return (false, false, None);
                }
                match p {
                    None => (true, true, None),
                    Some(p) => (true, false, project_prepared(p, cam, low_pass, i as u32)),
                }
            })
            .collect();
        let mut stats = RenderStats::default();
        let mut splats = Vec::new();
        for (selected, degenerate, splat) in per {
            stats.selected += selected as usize;
            stats.degenerate += degenerate as usize;
            splats.extend(splat);
        }
        if stats.degenerate as f64 > MAX_DEGENERATE_FRACTION * stats.selected as f64 {
            return Err(Error::DegenerateCovariance(format!(
                "{} of {} primitives have degenerate covariances",
                stats.degenerate, stats.selected
            )));
        }
        if stats.degenerate > 0 {
            log::debug!("skipped {} degenerate primitives", stats.degenerate);
        }
        stats.visible = splats.len();
        let grid = TileGrid::new(cam.width, cam.height, self.config.tile_size);
        let tiles = bin_and_sort(&splats, &grid);
        stats.tile_entries = tiles.iter().map(Vec::len).sum();
        Ok(Projection {
            splats,
            grid,
            tiles,
            stats,
        })
    }

    pub fn render(&self, cam: &Camera<T>, mask: GroupMask) -> Result<RenderedImage<T>> {
        self.render_with_stats(cam, mask).map(|(img, _)| img)
    }

    pub fn render_with_stats(&self, cam: &Camera<T>, mask: GroupMask) -> Result<(RenderedImage<T>, RenderStats)> {
        let proj = self.project(cam, mask)?;
        let (img, contributions) = composite(&proj);
        let mut stats = proj.stats;
        stats.contributions = contributions;
        Ok((img, stats))
    }
}

/// Composites all tiles of a projection in parallel.
pub fn composite<T: Real>(proj: &Projection<T>) -> (RenderedImage<T>, usize) {
    let grid = &proj.grid;
    let tiles: Vec<(PixelRect, Vec<T>, usize)> = (0..grid.len())
        .into_par_iter()
        .map(|t| {
            let rect = grid.tile_rect(t);
            let n = (rect.x1 - rect.x0 + 1) * (rect.y1 - rect.y0 + 1);
            let mut buf = vec![T::zero(); 4 * n];
            let c = composite_tile(&proj.splats, &proj.tiles[t], rect, &mut buf);
            (rect, buf, c)
        })
        .collect();
    let mut img = RenderedImage::transparent(grid.width, grid.height);
    let mut contributions = 0;
    for (rect, buf, c) in tiles {
        contributions += c;
        let tw = rect.x1 - rect.x0 + 1;
        for (row, y) in (rect.y0..=rect.y1).enumerate() {
            let dst = 4 * (y * grid.width + rect.x0);
            img.data[dst..dst + 4 * tw].copy_from_slice(&buf[4 * row * tw..4 * (row + 1) * tw]);
        }
    }
    (img, contributions)
}

/// One-shot render; prefer a long-lived [`Renderer`] for repeated frames.
pub fn render<T: Real>(scene: &Scene<T>, cam: &Camera<T>, mask: GroupMask, config: &RenderConfig) -> Result<RenderedImage<T>> {
    Renderer::new(scene, *config).render(cam, mask)
}
