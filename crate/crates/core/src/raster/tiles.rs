use super::project::{PixelRect, Splat2D};
use crate::scalar::Real;
use rayon::prelude::*;
use std::cmp::Ordering;

pub const DEFAULT_TILE_SIZE: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileGrid {
    pub tile_size: usize,
    pub width: usize,
    pub height: usize,
    pub tiles_x: usize,
    pub tiles_y: usize,
}

impl TileGrid {
    pub fn new(width: usize, height: usize, tile_size: usize) -> Self {
        let tile_size = tile_size.max(1);
        Self {
            tile_size,
            width,
            height,
            tiles_x: width.div_ceil(tile_size),
            tiles_y: height.div_ceil(tile_size),
        }
    }

    pub fn len(&self) -> usize {
        self.tiles_x * self.tiles_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pixel bounds of tile `t` (row-major tile order).
    pub fn tile_rect(&self, t: usize) -> PixelRect {
        let (tx, ty) = (t % self.tiles_x, t / self.tiles_x);
        let x0 = tx * self.tile_size;
        let y0 = ty * self.tile_size;
        PixelRect {
            x0,
            y0,
            x1: (x0 + self.tile_size).min(self.width) - 1,
            y1: (y0 + self.tile_size).min(self.height) - 1,
        }
    }
}

/// Front-to-back order: ascending depth, ties by primitive id.
#[inline]
pub fn depth_order<T: Real>(a: &Splat2D<T>, b: &Splat2D<T>) -> Ordering {
    a.depth
        .partial_cmp(&b.depth)
        .unwrap_or(Ordering::Equal)
        .then(a.gaussian_id.cmp(&b.gaussian_id))
}

/// Per-tile lists of indices into `splats`, each in front-to-back order.
///
/// Splats are sorted once globally and then scattered, so every tile list
/// inherits the global order.
pub fn bin_and_sort<T: Real>(splats: &[Splat2D<T>], grid: &TileGrid) -> Vec<Vec<u32>> {
    let mut order: Vec<u32> = (0..splats.len() as u32).collect();
    order.par_sort_unstable_by(|&a, &b| depth_order(&splats[a as usize], &splats[b as usize]));
    let ts = grid.tile_size;
    let mut counts = vec![0usize; grid.len()];
    for s in splats {
        for ty in s.rect.y0 / ts..=s.rect.y1 / ts {
            for tx in s.rect.x0 / ts..=s.rect.x1 / ts {
                counts[ty * grid.tiles_x + tx] += 1;
            }
        }
    }
    let mut lists: Vec<Vec<u32>> = counts.into_iter().map(Vec::with_capacity).collect();
    for &i in &order {
        let r = splats[i as usize].rect;
        for ty in r.y0 / ts..=r.y1 / ts {
            for tx in r.x0 / ts..=r.x1 / ts {
                lists[ty * grid.tiles_x + tx].push(i);
            }
        }
    }
    lists
}
