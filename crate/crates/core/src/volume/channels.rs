use super::{eval_transfer_function, CtVolume, LabelKind, LabelVolume, TfSet, VolumeGeometry};
use crate::error::{Error, Result};
use crate::scalar::Real;
use rayon::prelude::*;

pub const INPUT_CHANNELS: usize = 6;

/// Channel-major 6-channel input: normalised HU, group label, then the
/// transfer-function RGBA rescaled to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct InputVolume6<T> {
    pub geometry: VolumeGeometry,
    pub data: Vec<T>,
}

impl<T: Real> InputVolume6<T> {
    pub const HU: usize = 0;
    pub const LABEL: usize = 1;
    pub const RGBA: usize = 2;

    pub fn new(geometry: VolumeGeometry, data: Vec<T>) -> Result<Self> {
        if data.len() != INPUT_CHANNELS * geometry.voxel_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for 6 channels of {:?}, got {}",
                INPUT_CHANNELS * geometry.voxel_count(),
                geometry.dims,
                data.len()
            )));
        }
        Ok(Self { geometry, data })
    }

    pub fn channel(&self, c: usize) -> &[T] {
        let n = self.geometry.voxel_count();
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn value(&self, c: usize, voxel: usize) -> T {
        self.data[c * self.geometry.voxel_count() + voxel]
    }

    /// Base colour `[r, g, b, a]` at a linear voxel index.
    pub fn rgba(&self, voxel: usize) -> [T; 4] {
        std::array::from_fn(|c| self.value(Self::RGBA + c, voxel))
    }

    /// Keeps every second voxel along each axis.
    pub fn downsample_half(&self) -> Result<Self> {
        let g = self.geometry.half();
        let n = g.voxel_count();
        let mut data = Vec::with_capacity(INPUT_CHANNELS * n);
        for c in 0..INPUT_CHANNELS {
            for lin in 0..n {
                let [i, j, k] = g.voxel_index(lin);
                let src = self.geometry.linear_index([2 * i, 2 * j, 2 * k]);
                data.push(self.value(c, src));
            }
        }
        Self::new(g, data)
    }
}

/// Assembles the 6-channel input. The transfer function of each voxel's
/// group is evaluated at the *raw* HU; channel 0 carries the normalised HU.
pub fn build_input_channels<T: Real>(
    normalized: &CtVolume<T>,
    raw_hu: &CtVolume<T>,
    labels: &LabelVolume,
    tfs: &TfSet,
) -> Result<InputVolume6<T>> {
    let g = normalized.geometry;
    if !g.same_grid(&raw_hu.geometry) || !g.same_grid(&labels.geometry) {
        return Err(Error::ShapeMismatch(format!(
            "normalized {:?}, raw {:?}, labels {:?}",
            g.dims, raw_hu.geometry.dims, labels.geometry.dims
        )));
    }
    if labels.kind != LabelKind::Consolidated {
        return Err(Error::InvalidParameter(
            "input channels need consolidated labels".into(),
        ));
    }
    let n = g.voxel_count();
    let mut data = vec![T::zero(); INPUT_CHANNELS * n];
    let (hu_ch, rest) = data.split_at_mut(n);
    let (label_ch, rgba_ch) = rest.split_at_mut(n);
    hu_ch.copy_from_slice(&normalized.data);
    for (dst, &l) in label_ch.iter_mut().zip(&labels.labels) {
        *dst = T::lit(l as f64);
    }
    let inv255 = 1.0 / 255.0;
    let (r, rest) = rgba_ch.split_at_mut(n);
    let (gch, rest) = rest.split_at_mut(n);
    let (b, a) = rest.split_at_mut(n);
    r.par_iter_mut()
        .zip(gch.par_iter_mut())
        .zip(b.par_iter_mut())
        .zip(a.par_iter_mut())
        .enumerate()
        .for_each(|(v, (((r, g), b), a))| {
            let tf = tfs.group(labels.labels[v] as usize);
            let rgba = eval_transfer_function(tf, raw_hu.data[v].as_f64());
            *r = T::lit(rgba[0] * inv255);
            *g = T::lit(rgba[1] * inv255);
            *b = T::lit(rgba[2] * inv255);
            *a = T::lit(rgba[3]);
        });
    InputVolume6::new(g, data)
}
