//! Scene instantiation from volumes.
//!
//! [`agp_initialize`] builds one primitive per foreground voxel directly
//! from the 6-channel input (world position, transfer-function colour and
//! opacity, group label). [`decode_param_volume`] does the same on the
//! half-resolution grid of a 37-channel parameter volume, adding the
//! predicted offsets to those priors.

mod params;

pub use params::{
    decode_param_volume, encode_param_volume, load_param_volume, save_param_volume, ParamVolume,
    PARAM_CHANNELS, PARAM_LAYOUT_VERSION,
};

use crate::error::{Error, Result};
use crate::gauss6d::{CovScale, Gaussian6D, COV_RAW_LEN, NUM_GROUPS, SH_C0, SH_COEFFS};
use crate::scalar::{logit, Real};
use crate::volume::{InputVolume6, LabelKind, LabelVolume, VolumeGeometry};
use rayon::prelude::*;
use std::cell::Cell;

/// Set of anatomy groups, bit `g` for group `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupMask(u16);

impl GroupMask {
    pub const ALL_BITS: u16 = (1 << NUM_GROUPS) - 1;

    pub fn all() -> Self {
        Self(Self::ALL_BITS)
    }

    pub fn none() -> Self {
        Self(0)
    }

    pub fn from_bits(bits: u16) -> Option<Self> {
        (bits & !Self::ALL_BITS == 0).then_some(Self(bits))
    }

    pub fn from_groups(groups: impl IntoIterator<Item = u8>) -> Self {
        Self(
            groups
                .into_iter()
                .filter(|&g| (g as usize) < NUM_GROUPS)
                .fold(0, |m, g| m | 1 << g),
        )
    }

    pub fn only(group: u8) -> Self {
        Self::from_groups([group])
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn contains(self, group: u8) -> bool {
        (group as usize) < NUM_GROUPS && self.0 >> group & 1 == 1
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }
}

/// An instantiated primitive set plus the grid it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene<T> {
    pub gaussians: Vec<Gaussian6D<T>>,
    pub geometry: VolumeGeometry,
    pub cov_scale: CovScale<T>,
    pub layout_version: u32,
}

impl<T: Real> Scene<T> {
    pub fn new(gaussians: Vec<Gaussian6D<T>>, geometry: VolumeGeometry, cov_scale: CovScale<T>) -> Self {
        Self {
            gaussians,
            geometry,
            cov_scale,
            layout_version: PARAM_LAYOUT_VERSION,
        }
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    pub fn group_counts(&self) -> [usize; NUM_GROUPS] {
        let mut counts = [0; NUM_GROUPS];
        for g in &self.gaussians {
            counts[g.label as usize] += 1;
        }
        counts
    }

    /// Bounding box of the primitive means, `None` when empty.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = self.gaussians.first()?;
        let init = (first.mu_p.map(|x| x.as_f64()), first.mu_p.map(|x| x.as_f64()));
        Some(self.gaussians.iter().fold(init, |(mut lo, mut hi), g| {
            for a in 0..3 {
                lo[a] = lo[a].min(g.mu_p[a].as_f64());
                hi[a] = hi[a].max(g.mu_p[a].as_f64());
            }
            (lo, hi)
        }))
    }

    pub fn cast<U: Real>(&self) -> Scene<U> {
        Scene {
            gaussians: self.gaussians.iter().map(Gaussian6D::cast).collect(),
            geometry: self.geometry,
            cov_scale: CovScale {
                spatial: U::lit(self.cov_scale.spatial.as_f64()),
                directional: U::lit(self.cov_scale.directional.as_f64()),
            },
            layout_version: self.layout_version,
        }
    }
}

/// Keeps the primitives whose group is in `mask`, preserving order.
pub fn filter_scene<T: Real>(scene: &Scene<T>, mask: GroupMask) -> Scene<T> {
    Scene {
        gaussians: scene
            .gaussians
            .iter()
            .filter(|g| mask.contains(g.label))
            .copied()
            .collect(),
        ..*scene
    }
}

/// `origin + direction · (spacing ⊙ index)`
pub fn voxel_world_coords(ijk: [usize; 3], geometry: &VolumeGeometry) -> Result<[f64; 3]> {
    if !geometry.contains(ijk) {
        return Err(Error::InvalidParameter(format!(
            "voxel index {ijk:?} outside dims {:?}",
            geometry.dims
        )));
    }
    Ok(geometry.world_unchecked(ijk.map(|i| i as f64)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgpConfig {
    /// Keep voxels whose indices are all multiples of `stride`.
    pub stride: usize,
    /// Spatial Cholesky scale in mm; defaults to half the mean spacing of
    /// the strided grid.
    pub spatial_scale: Option<f64>,
    pub directional_scale: f64,
}

impl Default for AgpConfig {
    fn default() -> Self {
        Self {
            stride: 1,
            spatial_scale: None,
            directional_scale: 1.0,
        }
    }
}

impl AgpConfig {
    pub(crate) fn cov_scale<T: Real>(&self, geometry: &VolumeGeometry) -> CovScale<T> {
        let mean_spacing = geometry.spacing.iter().sum::<f64>() / 3.0;
        CovScale {
            spatial: T::lit(self.spatial_scale.unwrap_or(0.5 * mean_spacing * self.stride.max(1) as f64)),
            directional: T::lit(self.directional_scale),
        }
    }
}

pub const DEFAULT_MU_D: [f64; 3] = [0.0, 0.0, 1.0];
/// Colour and opacity are kept this far inside `[0, 1]` so that neither the
/// logit nor the colour clamp starts out saturated.
const PRIOR_EPS: f64 = 1e-4;

/// SH DC coefficient whose evaluated colour equals `color`.
#[inline]
pub fn dc_from_color<T: Real>(color: T) -> T {
    (color - T::lit(0.5)) / T::lit(SH_C0)
}

fn clamp_unit<T: Real>(x: T) -> T {
    x.max(T::lit(PRIOR_EPS)).min(T::lit(1.0 - PRIOR_EPS))
}

/// The anatomy-guided prior for one voxel.
pub(crate) fn prior_gaussian<T: Real>(
    mu_p: [f64; 3],
    rgba: [T; 4],
    label: u8,
) -> Gaussian6D<T> {
    let mut sh = [T::zero(); SH_COEFFS];
    for c in 0..3 {
        sh[c] = dc_from_color(clamp_unit(rgba[c]));
    }
    let a = clamp_unit(rgba[3]);
    Gaussian6D {
        mu_p: mu_p.map(T::lit),
        mu_d: DEFAULT_MU_D.map(T::lit),
        cov_raw: [T::zero(); COV_RAW_LEN],
        sh,
        opacity_raw: logit(a),
        label,
    }
}

thread_local! {
    static INSTANTIATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of scene instantiations (AGP or parameter-volume decoding)
/// performed on the calling thread.
pub fn instantiation_count() -> u64 {
    INSTANTIATIONS.with(Cell::get)
}

pub(crate) fn record_instantiation() {
    INSTANTIATIONS.with(|c| c.set(c.get() + 1));
}

fn check_labels(labels: &LabelVolume, geometry: &VolumeGeometry) -> Result<()> {
    if labels.kind != LabelKind::Consolidated {
        return Err(Error::InvalidParameter(
            "instantiation needs consolidated labels".into(),
        ));
    }
    if !labels.geometry.same_grid(geometry) {
        return Err(Error::ShapeMismatch(format!(
            "labels {:?} vs input {:?}",
            labels.geometry.dims, geometry.dims
        )));
    }
    Ok(())
}

/// One primitive per foreground voxel (label ≠ 0) on the strided grid.
pub fn agp_initialize<T: Real>(
    in6: &InputVolume6<T>,
    labels: &LabelVolume,
    config: &AgpConfig,
) -> Result<Scene<T>> {
    record_instantiation();
    let g = in6.geometry;
    check_labels(labels, &g)?;
    if config.stride == 0 {
        return Err(Error::InvalidParameter("stride must be at least 1".into()));
    }
    let s = config.stride;
    let [nx, ny, nz] = g.dims;
    let slabs: Vec<Vec<Gaussian6D<T>>> = (0..nz)
        .into_par_iter()
        .filter(|k| k % s == 0)
        .map(|k| {
            let mut out = Vec::new();
            for j in (0..ny).step_by(s) {
                for i in (0..nx).step_by(s) {
                    let v = g.linear_index([i, j, k]);
                    let label = labels.labels[v];
                    if label == 0 {
                        continue;
                    }
                    let pos = g.world_unchecked([i as f64, j as f64, k as f64]);
                    out.push(prior_gaussian(pos, in6.rgba(v), label as u8));
                }
            }
            out
        })
        .collect();
    let gaussians: Vec<_> = slabs.into_iter().flatten().collect();
    if gaussians.is_empty() {
        return Err(Error::EmptyScene("no foreground voxels".into()));
    }
    Ok(Scene::new(gaussians, g, config.cov_scale(&g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss6d::eval_sh_color;
    use crate::volume::{build_input_channels, CtVolume, TfSet};

    fn single_liver_voxel() -> (InputVolume6<f64>, LabelVolume) {
        let g = VolumeGeometry::new([2, 2, 2], [1.5; 3]);
        let mut labels = vec![0u16; 8];
        labels[0] = 2;
        let labels = LabelVolume::new(g, labels, LabelKind::Consolidated).unwrap();
        let hu = CtVolume::filled(g, 250.0).unwrap();
        let in6 = build_input_channels(&hu, &hu, &labels, &TfSet::seen()).unwrap();
        (in6, labels)
    }

    #[test]
    fn world_coords_examples() {
        let mut g = VolumeGeometry::new([4, 4, 4], [1.0; 3]);
        g.origin = [10.0, 0.0, 0.0];
        assert_eq!(voxel_world_coords([0, 0, 0], &g).unwrap(), [10.0, 0.0, 0.0]);
        let g = VolumeGeometry::new([4, 4, 4], [1.5; 3]);
        assert_eq!(voxel_world_coords([1, 0, 0], &g).unwrap(), [1.5, 0.0, 0.0]);
        assert!(voxel_world_coords([4, 0, 0], &g).is_err());
    }

    #[test]
    fn world_coords_rotated_axes() {
        // x axis → world +y, y axis → world −x, z unchanged (columns).
        let mut g = VolumeGeometry::new([4, 4, 4], [1.0, 2.0, 3.0]);
        g.direction = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        g.origin = [1.0, 1.0, 1.0];
        // index (1,2,3) scaled = (1,4,9); rotated = (-4, 1, 9)
        assert_eq!(voxel_world_coords([1, 2, 3], &g).unwrap(), [-3.0, 2.0, 10.0]);
    }

    #[test]
    fn single_voxel_scene() {
        let (in6, labels) = single_liver_voxel();
        let scene = agp_initialize(&in6, &labels, &AgpConfig::default()).unwrap();
        assert_eq!(scene.len(), 1);
        let g = &scene.gaussians[0];
        assert_eq!(g.label, 2);
        assert_eq!(g.mu_p, [0.0; 3]);
        assert_eq!(scene.cov_scale.spatial, 0.75);
        assert!((g.opacity() - 0.75).abs() < 1e-12);
        let c = eval_sh_color(&g.sh, [0.0, 0.0, 1.0]);
        let expect = [190.0, 150.0, 110.0].map(|x| x / 255.0);
        for i in 0..3 {
            assert!((c[i] - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn half_alpha_has_zero_logit() {
        let g = prior_gaussian::<f64>([0.0; 3], [0.2, 0.2, 0.2, 0.5], 3);
        assert_eq!(g.opacity_raw, 0.0);
    }

    #[test]
    fn empty_foreground_is_an_error() {
        let g = VolumeGeometry::new([2, 2, 2], [1.0; 3]);
        let labels = LabelVolume::new(g, vec![0; 8], LabelKind::Consolidated).unwrap();
        let in6 = InputVolume6::new(g, vec![0.0f32; 48]).unwrap();
        assert!(matches!(
            agp_initialize(&in6, &labels, &AgpConfig::default()),
            Err(Error::EmptyScene(_))
        ));
    }

    #[test]
    fn stride_subsamples() {
        let g = VolumeGeometry::new([4, 4, 4], [1.0; 3]);
        let labels = LabelVolume::new(g, vec![7; 64], LabelKind::Consolidated).unwrap();
        let in6 = InputVolume6::new(g, vec![0.5f32; 6 * 64]).unwrap();
        let cfg = AgpConfig {
            stride: 2,
            ..Default::default()
        };
        assert_eq!(agp_initialize(&in6, &labels, &cfg).unwrap().len(), 8);
        assert_eq!(
            agp_initialize(&in6, &labels, &AgpConfig::default()).unwrap().len(),
            64
        );
    }

    #[test]
    fn instantiation_is_counted() {
        let (in6, labels) = single_liver_voxel();
        let before = instantiation_count();
        agp_initialize(&in6, &labels, &AgpConfig::default()).unwrap();
        assert_eq!(instantiation_count(), before + 1);
    }

    #[test]
    fn mask_filtering() {
        let mut gs = Vec::new();
        for label in [1u8, 7, 7, 2, 11, 7] {
            gs.push(Gaussian6D::<f64> {
                label,
                ..Default::default()
            });
        }
        let scene = Scene::new(gs, VolumeGeometry::new([1, 1, 1], [1.0; 3]), CovScale::unit());
        assert_eq!(filter_scene(&scene, GroupMask::all()), scene);
        assert!(filter_scene(&scene, GroupMask::none()).is_empty());
        assert_eq!(filter_scene(&scene, GroupMask::only(7)).len(), 3);
        assert_eq!(scene.group_counts().iter().sum::<usize>(), 6);
    }

    #[test]
    fn group_mask_bits() {
        assert_eq!(GroupMask::all().bits(), 0xFFF);
        assert!(GroupMask::from_bits(0x1000).is_none());
        let m = GroupMask::from_groups([2, 7]);
        assert!(m.contains(7) && m.contains(2) && !m.contains(3));
        assert!(!m.contains(200));
    }
}
