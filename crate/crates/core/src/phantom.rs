//! Synthetic torso phantom built from nested ellipsoids.
//!
//! Labels are raw segmentation classes so the phantom exercises the full
//! preprocessing path: ribs and spine (skeleton), two lungs and a liver,
//! inside an unlabelled soft-tissue body.

use crate::error::Result;
use crate::scalar::Real;
use crate::volume::{CtVolume, LabelKind, LabelVolume, VolumeGeometry};

pub const RAW_LIVER: u16 = 5;
pub const RAW_LUNG_LEFT: u16 = 10;
pub const RAW_LUNG_RIGHT: u16 = 11;
pub const RAW_RIB: u16 = 25;
pub const RAW_SPINE: u16 = 92;

pub const HU_AIR: f64 = -1000.0;
pub const HU_TISSUE: f64 = 40.0;
pub const HU_LIVER: f64 = 60.0;
pub const HU_LUNG: f64 = -800.0;
pub const HU_BONE: f64 = 550.0;

#[derive(Clone, Copy, Debug)]
pub struct PhantomConfig {
    /// Voxels per side.
    pub size: usize,
    /// Isotropic spacing in millimetres.
    pub spacing: f64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            size: 64,
            spacing: 2.0,
        }
    }
}

fn inside(u: [f64; 3], c: [f64; 3], r: [f64; 3]) -> f64 {
    (0..3).map(|a| ((u[a] - c[a]) / r[a]).powi(2)).sum()
}

/// HU and raw label at normalised coordinate `u` (box spans `[-1, 1]³`).
fn sample(u: [f64; 3]) -> (f64, u16) {
    let [x, y, z] = u;
    let body = inside(u, [0.0; 3], [0.88, 0.70, 0.92]);
    if body > 1.0 {
        return (HU_AIR, 0);
    }
    let texture = 12.0 * (7.0 * x).sin() * (5.0 * y).cos() + 8.0 * (6.0 * z).sin();

    let shell = body.sqrt();
    if (0.80..=0.90).contains(&shell) && z.abs() < 0.62 && (z * 16.0).sin() > 0.25 {
        return (HU_BONE + 3.0 * texture, RAW_RIB);
    }
    if x * x + (y + 0.5) * (y + 0.5) <= 0.09 * 0.09 && z.abs() < 0.85 {
        return (HU_BONE + 150.0 + 3.0 * texture, RAW_SPINE);
    }
    for (cx, raw) in [(0.32, RAW_LUNG_LEFT), (-0.32, RAW_LUNG_RIGHT)] {
        if inside(u, [cx, 0.0, 0.25], [0.22, 0.34, 0.38]) <= 1.0 {
            return (HU_LUNG + 2.0 * texture, raw);
        }
    }
    if inside(u, [-0.2, 0.05, -0.42], [0.38, 0.30, 0.22]) <= 1.0 {
        return (HU_LIVER + texture, RAW_LIVER);
    }
    (HU_TISSUE + texture, 0)
}

/// Builds the phantom centred on the world origin.
pub fn ct_phantom<T: Real>(cfg: &PhantomConfig) -> Result<(CtVolume<T>, LabelVolume)> {
    let n = cfg.size;
    let mut geometry = VolumeGeometry::new([n; 3], [cfg.spacing; 3]);
    geometry.origin = [-(n as f64 - 1.0) * 0.5 * cfg.spacing; 3];
    geometry.validate()?;
    let half = (n as f64 - 1.0) * 0.5;

    let mut hu = Vec::with_capacity(geometry.voxel_count());
    let mut labels = Vec::with_capacity(geometry.voxel_count());
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let u = [i, j, k].map(|c| (c as f64 - half) / half.max(1.0));
                let (h, l) = sample(u);
                hu.push(T::lit(h));
                labels.push(l);
            }
        }
    }
    Ok((
        CtVolume::new(geometry, hu)?,
        LabelVolume::new(geometry, labels, LabelKind::Raw)?,
    ))
}
