use super::{CtVolume, LabelVolume};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const LOWER_PERCENTILE: f64 = 0.5;
pub const UPPER_PERCENTILE: f64 = 99.5;

/// Clip window and z-score statistics of a normalisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HuStats {
    pub clip_low: f64,
    pub clip_high: f64,
    pub mean: f64,
    pub std: f64,
}

/// Percentile with linear interpolation between order statistics
/// (position `p/100 · (n−1)`). Reorders `values`.
pub fn percentile(values: &mut [f64], p: f64) -> f64 {
    assert!(!values.is_empty());
    let pos = p / 100.0 * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    let (_, &mut v_lo, upper) = values.select_nth_unstable_by(lo, f64::total_cmp);
    if frac == 0.0 || upper.is_empty() {
        return v_lo;
    }
    let v_hi = upper.iter().copied().fold(f64::INFINITY, f64::min);
    v_lo + frac * (v_hi - v_lo)
}

/// Clips to the 0.5–99.5 percentile window of the foreground voxels
/// (non-zero label when `labels` is given, otherwise every voxel), then
/// z-scores with the mean and standard deviation of the clipped foreground.
pub fn normalize_hu<T: Real>(
    vol: &CtVolume<T>,
    labels: Option<&LabelVolume>,
) -> Result<(CtVolume<T>, HuStats)> {
    let mut fg: Vec<f64> = match labels {
        Some(l) => {
            if !vol.geometry.same_grid(&l.geometry) {
                return Err(Error::ShapeMismatch(format!(
                    "volume {:?} vs labels {:?}",
                    vol.geometry.dims, l.geometry.dims
                )));
            }
            vol.data
                .iter()
                .zip(&l.labels)
                .filter(|(_, &lab)| lab != 0)
                .map(|(x, _)| x.as_f64())
                .collect()
        }
        None => vol.data.iter().map(|x| x.as_f64()).collect(),
    };
    if fg.is_empty() {
        return Err(Error::DegenerateVolume("no foreground voxels".into()));
    }
    let clip_low = percentile(&mut fg, LOWER_PERCENTILE);
    let clip_high = percentile(&mut fg, UPPER_PERCENTILE);
    let n = fg.len() as f64;
    let clipped = || fg.iter().map(|&x| x.clamp(clip_low, clip_high));
    let mean = clipped().sum::<f64>() / n;
    let var = clipped().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::DegenerateVolume(
            "zero intensity variance after clipping".into(),
        ));
    }
    let data = vol
        .data
        .iter()
        .map(|x| T::lit((x.as_f64().clamp(clip_low, clip_high) - mean) / std))
        .collect();
    Ok((
        CtVolume::new(vol.geometry, data)?,
        HuStats {
            clip_low,
            clip_high,
            mean,
            std,
        },
    ))
}
