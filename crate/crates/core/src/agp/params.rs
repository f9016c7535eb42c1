use super::{check_labels, prior_gaussian, record_instantiation, AgpConfig, Scene, DEFAULT_MU_D};
use crate::error::{Error, Result};
use crate::gauss6d::{Gaussian6D, COV_RAW_LEN};
use crate::scalar::Real;
use crate::volume::{
    format_descriptor, lookup, malformed, read_geometry, volume_paths, InputVolume6, LabelVolume,
    VolumeGeometry,
};
use std::ops::Range;
use std::path::Path;

pub const PARAM_CHANNELS: usize = 37;
/// Version of the channel layout below; also written into scene files.
pub const PARAM_LAYOUT_VERSION: u32 = 1;

/// Channel ranges.
pub mod channel {
    use std::ops::Range;
    /// Offset added to the default view direction `(0, 0, 1)`.
    pub const MU_D: Range<usize> = 0..3;
    pub const SH_DC: Range<usize> = 3..6;
    /// Degree-1 coefficients in the same basis-major order as `Gaussian6D::sh`.
    pub const SH_REST: Range<usize> = 6..15;
    pub const OPACITY: usize = 15;
    pub const COV_DIAG: Range<usize> = 16..22;
    pub const COV_OFFDIAG: Range<usize> = 22..37;
}

/// Dense 37-channel grid at half input resolution, channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVolume<T> {
    pub geometry: VolumeGeometry,
    pub data: Vec<T>,
}

impl<T: Real> ParamVolume<T> {
    pub fn new(geometry: VolumeGeometry, data: Vec<T>) -> Result<Self> {
        let n = geometry.voxel_count();
        if data.len() != PARAM_CHANNELS * n {
            let found = data.len().checked_div(n).unwrap_or(0);
            return Err(Error::ShapeMismatch(format!(
                "parameter volume needs {PARAM_CHANNELS} channels of {:?}, got {} values ({found} channels)",
                geometry.dims,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "parameter volume contains non-finite entries".into(),
            ));
        }
        Ok(Self { geometry, data })
    }

    pub fn zeros(geometry: VolumeGeometry) -> Self {
        Self {
            geometry,
            data: vec![T::zero(); PARAM_CHANNELS * geometry.voxel_count()],
        }
    }

    pub fn channel(&self, c: usize) -> &[T] {
        let n = self.geometry.voxel_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [T] {
        let n = self.geometry.voxel_count();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    fn get(&self, c: usize, voxel: usize) -> T {
        self.data[c * self.geometry.voxel_count() + voxel]
    }

    fn gather<const N: usize>(&self, r: Range<usize>, voxel: usize) -> [T; N] {
        debug_assert_eq!(r.len(), N);
        std::array::from_fn(|i| self.get(r.start + i, voxel))
    }
}

/// Turns the half-resolution foreground of `labels` into primitives whose
/// attributes are the priors plus the offsets stored in `psi`.
pub fn decode_param_volume<T: Real>(
    psi: &ParamVolume<T>,
    in6: &InputVolume6<T>,
    labels: &LabelVolume,
) -> Result<Scene<T>> {
    record_instantiation();
    check_labels(labels, &in6.geometry)?;
    let half = in6.geometry.half();
    if psi.geometry.dims != half.dims {
        return Err(Error::ShapeMismatch(format!(
            "parameter volume dims {:?}, expected half of {:?} = {:?}",
            psi.geometry.dims, in6.geometry.dims, half.dims
        )));
    }
    let base = in6.downsample_half()?;
    let labels = labels.downsample_half()?;
    let mut gaussians = Vec::new();
    for v in 0..half.voxel_count() {
        let label = labels.labels[v];
        if label == 0 {
            continue;
        }
        let rgba = base.rgba(v);
        let pos = half.world_unchecked(half.voxel_index(v).map(|i| i as f64));
        let mut g = prior_gaussian(pos, rgba, label as u8);
        let dmu: [T; 3] = psi.gather(channel::MU_D, v);
        let ddc: [T; 3] = psi.gather(channel::SH_DC, v);
        let rest: [T; 9] = psi.gather(channel::SH_REST, v);
        let diag: [T; 6] = psi.gather(channel::COV_DIAG, v);
        let off: [T; 15] = psi.gather(channel::COV_OFFDIAG, v);
        for a in 0..3 {
            g.mu_d[a] = T::lit(DEFAULT_MU_D[a]) + dmu[a];
            g.sh[a] += ddc[a];
        }
        g.sh[3..].copy_from_slice(&rest);
        g.opacity_raw = rgba[3] + psi.get(channel::OPACITY, v);
        g.cov_raw[..6].copy_from_slice(&diag);
        g.cov_raw[6..].copy_from_slice(&off);
        gaussians.push(g);
    }
    if gaussians.is_empty() {
        return Err(Error::EmptyScene(
            "no foreground voxels on the half-resolution grid".into(),
        ));
    }
    Ok(Scene::new(
        gaussians,
        half,
        AgpConfig::default().cov_scale(&half),
    ))
}

/// Inverse of [`decode_param_volume`] for scenes it produced (or edited
/// versions of them). Voxels without a primitive are left at zero.
pub fn encode_param_volume<T: Real>(scene: &Scene<T>, in6: &InputVolume6<T>) -> Result<ParamVolume<T>> {
    let half = in6.geometry.half();
    let base = in6.downsample_half()?;
    let mut psi = ParamVolume::zeros(half);
    let n = half.voxel_count();
    for g in &scene.gaussians {
        let ijk = locate_voxel(&half, g.mu_p.map(|x| x.as_f64())).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "primitive at {:?} does not sit on a half-resolution voxel",
                g.mu_p.map(|x| x.as_f64())
            ))
        })?;
        let v = half.linear_index(ijk);
        let base_rgba = base.rgba(v);
        let prior: Gaussian6D<T> = prior_gaussian([0.0; 3], base_rgba, g.label);
        let mut put = |c: usize, x: T| psi.data[c * n + v] = x;
        for a in 0..3 {
            put(channel::MU_D.start + a, g.mu_d[a] - T::lit(DEFAULT_MU_D[a]));
            put(channel::SH_DC.start + a, g.sh[a] - prior.sh[a]);
        }
        for (i, &x) in g.sh[3..].iter().enumerate() {
            put(channel::SH_REST.start + i, x);
        }
        put(channel::OPACITY, g.opacity_raw - base_rgba[3]);
        for i in 0..COV_RAW_LEN {
            put(channel::COV_DIAG.start + i, g.cov_raw[i]);
        }
    }
    Ok(psi)
}

/// Grid index whose world position matches `p`, within a tenth of a voxel.
fn locate_voxel(g: &VolumeGeometry, p: [f64; 3]) -> Option<[usize; 3]> {
    let d = [p[0] - g.origin[0], p[1] - g.origin[1], p[2] - g.origin[2]];
    let mut ijk = [0usize; 3];
    for a in 0..3 {
        // column a of the direction matrix is the unit axis a
        let t = (0..3).map(|r| g.direction[r][a] * d[r]).sum::<f64>() / g.spacing[a];
        let r = t.round();
        if (t - r).abs() > 0.1 || r < 0.0 || r as usize >= g.dims[a] {
            return None;
        }
        ijk[a] = r as usize;
    }
    Some(ijk)
}

/// Reads `<stem>.raw` (little-endian `f32`, channel-major) and `<stem>.meta`.
pub fn load_param_volume<T: Real>(path: impl AsRef<Path>) -> Result<ParamVolume<T>> {
    let (raw, meta) = volume_paths(path.as_ref());
    let (geometry, entries) = read_geometry(&meta, "float32")?;
    if let Ok(c) = lookup(&meta, &entries, "channels") {
        if c.parse::<usize>().ok() != Some(PARAM_CHANNELS) {
            return Err(Error::ShapeMismatch(format!(
                "{} declares {c} channels, expected {PARAM_CHANNELS}",
                meta.display()
            )));
        }
    }
    if let Ok(v) = lookup(&meta, &entries, "layout_version") {
        if v.parse::<u32>().ok() != Some(PARAM_LAYOUT_VERSION) {
            return Err(malformed(&meta, format!("unsupported layout_version `{v}`")));
        }
    }
    let bytes = std::fs::read(&raw).map_err(|e| Error::io(format!("reading {}", raw.display()), e))?;
    let expected = (PARAM_CHANNELS * geometry.voxel_count() * 4) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            path: raw,
            expected,
            found: bytes.len() as u64,
        });
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| T::lit(f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64))
        .collect();
    ParamVolume::new(geometry, data)
}

pub fn save_param_volume<T: Real>(path: impl AsRef<Path>, psi: &ParamVolume<T>) -> Result<()> {
    let (raw, meta) = volume_paths(path.as_ref());
    let mut bytes = Vec::with_capacity(psi.data.len() * 4);
    for x in &psi.data {
        bytes.extend_from_slice(&(x.as_f64() as f32).to_le_bytes());
    }
    std::fs::write(&raw, bytes).map_err(|e| Error::io(format!("writing {}", raw.display()), e))?;
    let text = format_descriptor(
        &psi.geometry,
        &[
            ("type", "float32".into()),
            ("channels", PARAM_CHANNELS.to_string()),
            ("layout_version", PARAM_LAYOUT_VERSION.to_string()),
        ],
    );
    std::fs::write(&meta, text).map_err(|e| Error::io(format!("writing {}", meta.display()), e))
}
