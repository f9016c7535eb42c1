use super::project::{splat_power, PixelRect, Splat2D, ALPHA_MAX, ALPHA_MIN, T_MIN};
use crate::scalar::Real;

/// Front-to-back compositing of one tile.
///
/// `list` indexes `splats` in depth order; `out` receives premultiplied
/// RGBA for the pixels of `tile`, row-major within the tile. Returns the
/// number of splat-pixel contributions.
pub fn composite_tile<T: Real>(splats: &[Splat2D<T>], list: &[u32], tile: PixelRect, out: &mut [T]) -> usize {
    let tw = tile.x1 - tile.x0 + 1;
    let th = tile.y1 - tile.y0 + 1;
    let n = tw * th;
    debug_assert_eq!(out.len(), 4 * n);
    out.fill(T::zero());
    let mut trans = vec![T::one(); n];
    let mut done = vec![false; n];
    let mut remaining = n;
    let mut contributions = 0;
    let (amin, amax, tmin) = (T::lit(ALPHA_MIN), T::lit(ALPHA_MAX), T::lit(T_MIN));
    let half = T::lit(0.5);
    for &si in list {
        if remaining == 0 {
            break;
        }
        let s = &splats[si as usize];
        let Some(r) = s.rect.intersect(&tile) else {
            continue;
        };
        // α ≥ ALPHA_MIN needs q ≤ 2 ln(α / ALPHA_MIN) with q = -2·power; solve
        // that per row for the x extent, with slack so no passing pixel is
        // ever skipped.
        let [c0, c1, c2] = s.conic.map(|c| c.as_f64());
        let reach = 2.0 * (s.alpha.as_f64() / ALPHA_MIN).ln() * (1.0 + 1e-6) + 1e-6;
        let (mx, my) = (s.mean2d[0].as_f64(), s.mean2d[1].as_f64());
        for py in r.y0..=r.y1 {
            let dy = T::lit(py as f64) + half - s.mean2d[1];
            let dyf = py as f64 + 0.5 - my;
            let b = c1 * dyf;
            let disc = b * b - c0 * (c2 * dyf * dyf - reach);
            if !(disc >= 0.0) {
                continue;
            }
            let sd = disc.sqrt();
            let lo = (mx + (-b - sd) / c0 - 0.5).floor() - 1.0;
            let hi = (mx + (-b + sd) / c0 - 0.5).ceil() + 1.0;
            if hi < r.x0 as f64 || lo > r.x1 as f64 {
                continue;
            }
            let x0 = r.x0.max(lo.max(0.0) as usize);
            let x1 = r.x1.min(hi as usize);
            let row = (py - tile.y0) * tw;
            for px in x0..=x1 {
                let p = row + px - tile.x0;
                if done[p] {
                    continue;
                }
                let dx = T::lit(px as f64) + half - s.mean2d[0];
                let alpha = (s.alpha * splat_power(&s.conic, dx, dy).exp()).min(amax);
                if alpha < amin {
                    continue;
                }
                let w = alpha * trans[p];
                let o = &mut out[4 * p..4 * p + 4];
                o[0] += s.color[0] * w;
                o[1] += s.color[1] * w;
                o[2] += s.color[2] * w;
                o[3] += w;
                trans[p] *= T::one() - alpha ;
                contributions += 1;
                if trans[p] < tmin {
                    done[p] = true;
                    remaining -= 1;
                }
            }
        }
    }
    contributions
}
