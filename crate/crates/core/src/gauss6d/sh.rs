use crate::linalg::Vec3;
use crate::scalar::Real;

/// Real spherical harmonic normalisation, degree 0.
pub const SH_C0: f64 = 0.282_094_791_773_878_14;
/// Magnitude of the degree-1 real spherical harmonic normalisation.
pub const SH_C1: f64 = 0.488_602_511_902_919_9;
/// 4 basis functions × RGB.
pub const SH_COEFFS: usize = 12;

/// Colour before the `[0, 1]` clamp.
///
/// Degree-1 signs follow the usual real-SH convention used by splatting
/// renderers: `-C1·y`, `+C1·z`, `-C1·x`.
#[inline]
pub fn sh_color_raw<T: Real>(sh: &[T; SH_COEFFS], v: Vec3<T>) -> [T; 3] {
    let c0 = T::lit(SH_C0);
    let c1 = T::lit(SH_C1);
    let half = T::lit(0.5);
    let by = -c1 * v[1];
    let bz = c1 * v[2];
    let bx = -c1 * v[0];
    std::array::from_fn(|c| c0 * sh[c] + by * sh[3 + c] + bz * sh[6 + c] + bx * sh[9 + c] + half)
}

pub fn eval_sh_color<T: Real>(sh: &[T; SH_COEFFS], v: Vec3<T>) -> [T; 3] {
    sh_color_raw(sh, v).map(|x| x.max(T::zero()).min(T::one()))
}
