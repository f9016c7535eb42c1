use super::{CtVolume, LabelVolume, VolumeGeometry};
use crate::error::{Error, Result};
use crate::scalar::Real;
use rayon::prelude::*;

pub const DEFAULT_ISOTROPIC_MM: f64 = 1.5;

/// Output grid and, per axis, the ratio mapping output index to input index.
fn target_grid(g: &VolumeGeometry, target: f64) -> Result<(VolumeGeometry, [f64; 3])> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target spacing must be positive, got {target}"
        )));
    }
    let mut dims = [0usize; 3];
    let mut ratio = [0.0; 3];
    for a in 0..3 {
        ratio[a] = target / g.spacing[a];
        let extent = (g.dims[a] - 1) as f64 * g.spacing[a];
        dims[a] = (extent / target + 1e-9).floor() as usize + 1;
    }
    Ok((
        VolumeGeometry {
            dims,
            spacing: [target; 3],
            ..*g
        },
        ratio,
    ))
}

#[inline]
fn axis_sample(x: f64, n: usize) -> (usize, usize, f64) {
    let i0 = (x.floor() as usize).min(n - 1);
    let i1 = (i0 + 1).min(n - 1);
    (i0, i1, x - i0 as f64)
}

/// Trilinear resampling onto an isotropic grid with the same origin and
/// orientation. Output samples never leave the range of their 8 neighbours.
pub fn resample_isotropic<T: Real>(vol: &CtVolume<T>, target: f64) -> Result<CtVolume<T>> {
    let src = &vol.geometry;
    src.validate()?;
    let (dst, ratio) = target_grid(src, target)?;
    let [nx, ny, _] = dst.dims;
    let mut data = vec![T::zero(); dst.voxel_count()];
    data.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        let (z0, z1, fz) = axis_sample(k as f64 * ratio[2], src.dims[2]);
        let fz = T::lit(fz);
        for j in 0..ny {
            let (y0, y1, fy) = axis_sample(j as f64 * ratio[1], src.dims[1]);
            let fy = T::lit(fy);
            for i in 0..nx {
                let (x0, x1, fx) = axis_sample(i as f64 * ratio[0], src.dims[0]);
                let fx = T::lit(fx);
                let c = |x, y, z| vol.at([x, y, z]);
                let corners = [
                    c(x0, y0, z0),
                    c(x1, y0, z0),
                    c(x0, y1, z0),
                    c(x1, y1, z0),
                    c(x0, y0, z1),
                    c(x1, y0, z1),
                    c(x0, y1, z1),
                    c(x1, y1, z1),
                ];
                let lerp = |a: T, b: T, t: T| a + t * (b - a);
                let c00 = lerp(corners[0], corners[1], fx);
                let c10 = lerp(corners[2], corners[3], fx);
                let c01 = lerp(corners[4], corners[5], fx);
                let c11 = lerp(corners[6], corners[7], fx);
                let v = lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz);
                let lo = corners.iter().copied().fold(T::infinity(), T::min);
                let hi = corners.iter().copied().fold(T::neg_infinity(), T::max);
                slab[j * nx + i] = v.max(lo).min(hi);
            }
        }
    });
    CtVolume::new(dst, data)
}

/// Nearest-neighbour counterpart of [`resample_isotropic`] for label maps.
pub fn resample_labels_isotropic(labels: &LabelVolume, target: f64) -> Result<LabelVolume> {
    let src = &labels.geometry;
    src.validate()?;
    let (dst, ratio) = target_grid(src, target)?;
    let [nx, ny, _] = dst.dims;
    let nearest = |x: f64, n: usize| (x.round() as usize).min(n - 1);
    let mut out = vec![0u16; dst.voxel_count()];
    out.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        let z = nearest(k as f64 * ratio[2], src.dims[2]);
        for j in 0..ny {
            let y = nearest(j as f64 * ratio[1], src.dims[1]);
            for i in 0..nx {
                let x = nearest(i as f64 * ratio[0], src.dims[0]);
                slab[j * nx + i] = labels.at([x, y, z]);
            }
        }
    });
    LabelVolume::new(dst, out, labels.kind)
}
