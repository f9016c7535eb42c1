//! CT volume ingestion and preprocessing.
//!
//! On disk a volume is a pair of files sharing a stem: `<name>.raw` holds
//! little-endian `i16` samples with x varying fastest, and `<name>.meta`
//! is a UTF-8 `key = value` descriptor:
//!
//! ```text
//! dims = 64 64 48          # nx ny nz
//! spacing = 1.5 1.5 2.0    # mm per voxel along x y z
//! origin = 0 0 0           # world mm of voxel (0,0,0)
//! direction = 1 0 0 0 1 0 0 0 1   # 3x3, row-major; column a is axis a
//! ```
//!
//! Label volumes use the same container.

mod channels;
mod labels;
mod normalize;
mod resample;
mod transfer;

pub use channels::{build_input_channels, InputVolume6, INPUT_CHANNELS};
pub use labels::{consolidate_labels, group_name, GROUP_NAMES, LABEL_TABLE, NUM_RAW_LABELS};
pub use normalize::{normalize_hu, percentile, HuStats};
pub use resample::{resample_isotropic, resample_labels_isotropic, DEFAULT_ISOTROPIC_MM};
pub use transfer::{eval_transfer_function, TfPoint, TfSet, TransferFunction};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3, Vec3};
use crate::scalar::Real;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const HU_MIN: f64 = -1024.0;
pub const HU_MAX: f64 = 3072.0;

/// Grid layout shared by intensity, label and channel volumes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeGeometry {
    /// Voxel counts along x, y, z.
    pub dims: [usize; 3],
    pub spacing: Vec3<f64>,
    pub origin: Vec3<f64>,
    /// Column `a` is the world direction of grid axis `a`.
    pub direction: Mat3<f64>,
}

impl VolumeGeometry {
    pub fn new(dims: [usize; 3], spacing: Vec3<f64>) -> Self {
        Self {
            dims,
            spacing,
            origin: [0.0; 3],
            direction: linalg::identity3(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "volume dims must be positive, got {:?}",
                self.dims
            )));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "volume spacing must be positive, got {:?}",
                self.spacing
            )));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidParameter("origin is not finite".into()));
        }
        if linalg::orthonormal_det(&self.direction, 1e-6).is_none() {
            return Err(Error::InvalidParameter(
                "direction matrix is not orthonormal".into(),
            ));
        }
        Ok(())
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }

    #[inline]
    pub fn linear_index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }

    #[inline]
    pub fn voxel_index(&self, linear: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [linear % nx, (linear / nx) % ny, linear / (nx * ny)]
    }

    /// `origin + direction · (spacing ⊙ index)`, without a range check.
    #[inline]
    pub fn world_unchecked(&self, ijk: [f64; 3]) -> Vec3<f64> {
        let scaled = [
            ijk[0] * self.spacing[0],
            ijk[1] * self.spacing[1],
            ijk[2] * self.spacing[2],
        ];
        linalg::add3(self.origin, linalg::mat_vec3(&self.direction, scaled))
    }

    pub fn contains(&self, ijk: [usize; 3]) -> bool {
        (0..3).all(|a| ijk[a] < self.dims[a])
    }

    /// World-space bounding box of the voxel centres.
    pub fn world_bounds(&self) -> (Vec3<f64>, Vec3<f64>) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for corner in 0..8 {
            let ijk: [f64; 3] = std::array::from_fn(|a| {
                if corner >> a & 1 == 1 {
                    (self.dims[a] - 1) as f64
                } else {
                    0.0
                }
            });
            let p = self.world_unchecked(ijk);
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    /// Geometry of the grid obtained by keeping every second voxel.
    pub fn half(&self) -> Self {
        Self {
            dims: self.dims.map(|d| d / 2),
            spacing: self.spacing.map(|s| s * 2.0),
            ..*self
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.dims == other.dims
    }
}

/// Hounsfield-unit intensities (or their normalised counterpart).
#[derive(Clone, Debug, PartialEq)]
pub struct CtVolume<T> {
    pub geometry: VolumeGeometry,
    pub data: Vec<T>,
}

impl<T: Real> CtVolume<T> {
    pub fn new(geometry: VolumeGeometry, data: Vec<T>) -> Result<Self> {
        geometry.validate()?;
        if data.len() != geometry.voxel_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for dims {:?}",
                data.len(),
                geometry.dims
            )));
        }
        Ok(Self { geometry, data })
    }

    pub fn filled(geometry: VolumeGeometry, value: T) -> Result<Self> {
        Self::new(geometry, vec![value; geometry.voxel_count()])
    }

    #[inline]
    pub fn at(&self, ijk: [usize; 3]) -> T {
        self.data[self.geometry.linear_index(ijk)]
    }

    pub fn min_max(&self) -> (T, T) {
        self.data.iter().fold(
            (T::infinity(), T::neg_infinity()),
            |(lo, hi), &x| (lo.min(x), hi.max(x)),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelKind {
    /// Segmentation classes 0..=119.
    Raw,
    /// Anatomy groups 0..=11.
    Consolidated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelVolume {
    pub geometry: VolumeGeometry,
    pub labels: Vec<u16>,
    pub kind: LabelKind,
}

impl LabelVolume {
    pub fn new(geometry: VolumeGeometry, labels: Vec<u16>, kind: LabelKind) -> Result<Self> {
        geometry.validate()?;
        if labels.len() != geometry.voxel_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for dims {:?}",
                labels.len(),
                geometry.dims
            )));
        }
        let limit = match kind {
            LabelKind::Raw => NUM_RAW_LABELS as u16 - 1,
            LabelKind::Consolidated => crate::gauss6d::NUM_GROUPS as u16 - 1,
        };
        if let Some(&bad) = labels.iter().find(|&&l| l > limit) {
            return match kind {
                LabelKind::Raw => Err(Error::UnknownLabel(bad as u32)),
                LabelKind::Consolidated => Err(Error::InvalidParameter(format!(
                    "consolidated label {bad} outside 0..=11"
                ))),
            };
        }
        Ok(Self {
            geometry,
            labels,
            kind,
        })
    }

    #[inline]
    pub fn at(&self, ijk: [usize; 3]) -> u16 {
        self.labels[self.geometry.linear_index(ijk)]
    }

    pub fn foreground_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }

    /// Nearest-neighbour 2× downsampling: voxel `(i,j,k)` takes `(2i,2j,2k)`.
    pub fn downsample_half(&self) -> Result<Self> {
        let g = self.geometry.half();
        let mut labels = Vec::with_capacity(g.voxel_count());
        for k in 0..g.dims[2] {
            for j in 0..g.dims[1] {
                for i in 0..g.dims[0] {
                    labels.push(self.at([2 * i, 2 * j, 2 * k]));
                }
            }
        }
        Self::new(g, labels, self.kind)
    }
}

/// Splits `path` into the `.raw` / `.meta` pair sharing its stem.
pub fn volume_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("raw") | Some("meta") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    (with("raw"), with("meta"))
}

pub(crate) fn malformed(path: &Path, msg: impl Into<String>) -> Error {
    Error::Malformed {
        what: "volume descriptor",
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

pub(crate) fn parse_reals(path: &Path, key: &str, value: &str, n: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = value
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| malformed(path, format!("{key}: {e}")))?;
    if vals.len() != n {
        return Err(malformed(
            path,
            format!("{key}: expected {n} values, found {}", vals.len()),
        ));
    }
    Ok(vals)
}

/// Reads a `key = value` descriptor, ignoring blank lines and `#` comments.
pub(crate) fn read_descriptor(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| malformed(path, format!("line {}: expected key = value", n + 1)))?;
        out.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
    }
    Ok(out)
}

pub(crate) fn lookup<'a>(path: &Path, entries: &'a [(String, String)], key: &str) -> Result<&'a str> {
    entries
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| malformed(path, format!("missing key `{key}`")))
}

pub(crate) fn read_geometry(
    meta: &Path,
    sample_type: &str,
) -> Result<(VolumeGeometry, Vec<(String, String)>)> {
    let entries = read_descriptor(meta)?;
    if let Ok(ty) = lookup(meta, &entries, "type") {
        if ty != sample_type {
            return Err(malformed(meta, format!("unsupported sample type `{ty}`")));
        }
    }
    let dims_raw: Vec<usize> = lookup(meta, &entries, "dims")?
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| malformed(meta, format!("dims: {e}")))?;
    let dims: [usize; 3] = dims_raw
        .try_into()
        .map_err(|_| malformed(meta, "dims: expected 3 values"))?;
    let spacing = parse_reals(meta, "spacing", lookup(meta, &entries, "spacing")?, 3)?;
    let origin = parse_reals(meta, "origin", lookup(meta, &entries, "origin")?, 3)?;
    let dir = parse_reals(meta, "direction", lookup(meta, &entries, "direction")?, 9)?;
    let geometry = VolumeGeometry {
        dims,
        spacing: [spacing[0], spacing[1], spacing[2]],
        origin: [origin[0], origin[1], origin[2]],
        direction: [
            [dir[0], dir[1], dir[2]],
            [dir[3], dir[4], dir[5]],
            [dir[6], dir[7], dir[8]],
        ],
    };
    geometry
        .validate()
        .map_err(|e| malformed(meta, e.to_string()))?;
    Ok((geometry, entries))
}

pub(crate) fn format_descriptor(g: &VolumeGeometry, extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    let d = &g.direction;
    let _ = writeln!(s, "dims = {} {} {}", g.dims[0], g.dims[1], g.dims[2]);
    let _ = writeln!(s, "spacing = {:?} {:?} {:?}", g.spacing[0], g.spacing[1], g.spacing[2]);
    let _ = writeln!(s, "origin = {:?} {:?} {:?}", g.origin[0], g.origin[1], g.origin[2]);
    let _ = writeln!(
        s,
        "direction = {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?}",
        d[0][0], d[0][1], d[0][2], d[1][0], d[1][1], d[1][2], d[2][0], d[2][1], d[2][2]
    );
    for (k, v) in extra {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

fn read_i16_payload(raw: &Path, geometry: &VolumeGeometry) -> Result<Vec<i16>> {
    let bytes = std::fs::read(raw).map_err(|e| Error::io(format!("reading {}", raw.display()), e))?;
    let expected = geometry.voxel_count() as u64 * 2;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            path: raw.to_path_buf(),
            expected,
            found: bytes.len() as u64,
        });
    }
    Ok(bytes
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]))
        .collect())
}

fn write_pair(path: &Path, geometry: &VolumeGeometry, samples: impl Iterator<Item = i16>) -> Result<()> {
    let (raw, meta) = volume_paths(path);
    let mut bytes = Vec::with_capacity(geometry.voxel_count() * 2);
    for s in samples {
        bytes.extend_from_slice(&s.to_le_bytes());
    }
    std::fs::write(&raw, bytes).map_err(|e| Error::io(format!("writing {}", raw.display()), e))?;
    let text = format_descriptor(geometry, &[("type", "int16".into())]);
    std::fs::write(&meta, text).map_err(|e| Error::io(format!("writing {}", meta.display()), e))
}

/// Loads a CT volume; samples are clamped to `[-1024, 3072]` HU.
pub fn load_volume<T: Real>(path: impl AsRef<Path>) -> Result<CtVolume<T>> {
    let (raw, meta) = volume_paths(path.as_ref());
    let (geometry, _) = read_geometry(&meta, "int16")?;
    let data = read_i16_payload(&raw, &geometry)?
        .into_iter()
        .map(|s| T::lit((s as f64).clamp(HU_MIN, HU_MAX)))
        .collect();
    CtVolume::new(geometry, data)
}

/// Writes samples rounded to the nearest `i16`.
pub fn save_volume<T: Real>(path: impl AsRef<Path>, vol: &CtVolume<T>) -> Result<()> {
    write_pair(
        path.as_ref(),
        &vol.geometry,
        vol.data
            .iter()
            .map(|x| x.as_f64().round().clamp(i16::MIN as f64, i16::MAX as f64) as i16),
    )
}

/// Loads a label volume; every value must lie in `0..=119`.
pub fn load_labels(path: impl AsRef<Path>, kind: LabelKind) -> Result<LabelVolume> {
    let (raw, meta) = volume_paths(path.as_ref());
    let (geometry, _) = read_geometry(&meta, "int16")?;
    let samples = read_i16_payload(&raw, &geometry)?;
    let mut labels = Vec::with_capacity(samples.len());
    for s in samples {
        if s < 0 {
            return Err(Error::UnknownLabel(s as i32 as u32));
        }
        labels.push(s as u16);
    }
    LabelVolume::new(geometry, labels, kind)
}

pub fn save_labels(path: impl AsRef<Path>, labels: &LabelVolume) -> Result<()> {
    write_pair(path.as_ref(), &labels.geometry, labels.labels.iter().map(|&l| l as i16))
}

/// Output of [`preprocess`], all on the same grid.
#[derive(Clone, Debug)]
pub struct Preprocessed<T> {
    pub input: InputVolume6<T>,
    pub labels: LabelVolume,
    pub stats: HuStats,
}

/// Isotropic resampling (when `target_spacing` is given), label
/// consolidation, foreground HU normalisation and 6-channel assembly.
pub fn preprocess<T: Real>(
    hu: &CtVolume<T>,
    labels: &LabelVolume,
    tfs: &TfSet,
    target_spacing: Option<f64>,
) -> Result<Preprocessed<T>> {
    let (hu, labels) = match target_spacing {
        Some(s) => (resample_isotropic(hu, s)?, resample_labels_isotropic(labels, s)?),
        None => (hu.clone(), labels.clone()),
    };
    let labels = match labels.kind {
        LabelKind::Raw => consolidate_labels(&labels)?,
        LabelKind::Consolidated => labels,
    };
    let (normalized, stats) = normalize_hu(&hu, Some(&labels))?;
    let input = build_input_channels(&normalized, &hu, &labels, tfs)?;
    Ok(Preprocessed { input, labels, stats })
}
