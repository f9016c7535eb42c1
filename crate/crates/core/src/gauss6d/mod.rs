//! The 6D (position × direction) Gaussian primitive.
//!
//! A primitive stores a 21-entry raw covariance vector from which a lower
//! triangular factor `L` is built (`exp` on the diagonal, `tanh` below it),
//! so `Σ = L·Lᵀ` is positive semi-definite for any finite input. Rendering
//! conditions Σ on the per-primitive view direction ("slicing"), giving a
//! 3D spatial Gaussian, a shifted mean and an opacity modulation factor.

mod sh;

pub use sh::{eval_sh_color, sh_color_raw, SH_C0, SH_C1, SH_COEFFS};

use crate::error::{Error, Result};
use crate::linalg::{
    self, dot3, inverse3, mat_mul3, mat_sub3, mat_vec3, norm1_3, sub3, transpose3, Mat3, Vec3,
};
use crate::scalar::Real;

/// Number of optimizable reals per primitive.
pub const PARAM_COUNT: usize = 40;
pub const COV_RAW_LEN: usize = 21;

/// Offsets of each parameter group inside the flat 40-vector.
pub mod param {
    use std::ops::Range;
    pub const MU_P: Range<usize> = 0..3;
    pub const MU_D: Range<usize> = 3..6;
    pub const COV: Range<usize> = 6..27;
    pub const SH: Range<usize> = 27..39;
    pub const OPACITY: usize = 39;
}

/// `(row, col)` of raw off-diagonal entry `k` (stored at `cov_raw[6 + k]`),
/// lower triangle, row-major.
pub const OFFDIAG_INDEX: [(usize, usize); 15] = [
    (1, 0),
    (2, 0),
    (2, 1),
    (3, 0),
    (3, 1),
    (3, 2),
    (4, 0),
    (4, 1),
    (4, 2),
    (4, 3),
    (5, 0),
    (5, 1),
    (5, 2),
    (5, 3),
    (5, 4),
];

/// Consolidated anatomy group, 0 (background) through 11.
pub const NUM_GROUPS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian6D<T> {
    /// Spatial mean, world millimetres.
    pub mu_p: Vec3<T>,
    /// Directional mean.
    pub mu_d: Vec3<T>,
    /// 6 log-diagonal entries followed by 15 raw off-diagonal entries.
    pub cov_raw: [T; COV_RAW_LEN],
    /// Basis-major: `sh[3 * k + c]` for basis `k` in `[Y00, Y1-1, Y10, Y11]`
    /// and colour channel `c`.
    pub sh: [T; SH_COEFFS],
    /// Pre-sigmoid opacity.
    pub opacity_raw: T,
    pub label: u8,
}

impl<T: Real> Default for Gaussian6D<T> {
    fn default() -> Self {
        Self {
            mu_p: [T::zero(); 3],
            mu_d: [T::zero(), T::zero(), T::one()],
            cov_raw: [T::zero(); COV_RAW_LEN],
            sh: [T::zero(); SH_COEFFS],
            opacity_raw: T::zero(),
            label: 1,
        }
    }
}

impl<T: Real> Gaussian6D<T> {
    pub fn params(&self) -> [T; PARAM_COUNT] {
        let mut out = [T::zero(); PARAM_COUNT];
        out[param::MU_P].copy_from_slice(&self.mu_p);
        out[param::MU_D].copy_from_slice(&self.mu_d);
        out[param::COV].copy_from_slice(&self.cov_raw);
        out[param::SH].copy_from_slice(&self.sh);
        out[param::OPACITY] = self.opacity_raw;
        out
    }

    pub fn set_params(&mut self, p: &[T; PARAM_COUNT]) {
        self.mu_p.copy_from_slice(&p[param::MU_P]);
        self.mu_d.copy_from_slice(&p[param::MU_D]);
        self.cov_raw.copy_from_slice(&p[param::COV]);
        self.sh.copy_from_slice(&p[param::SH]);
        self.opacity_raw = p[param::OPACITY];
    }

    pub fn opacity(&self) -> T {
        crate::scalar::sigmoid(self.opacity_raw)
    }

    pub fn cast<U: Real>(&self) -> Gaussian6D<U> {
        let c = |x: T| U::lit(x.as_f64());
        Gaussian6D {
            mu_p: self.mu_p.map(c),
            mu_d: self.mu_d.map(c),
            cov_raw: self.cov_raw.map(c),
            sh: self.sh.map(c),
            opacity_raw: c(self.opacity_raw),
            label: self.label,
        }
    }
}

/// Multipliers applied to `exp(raw)` on the Cholesky diagonal, so that a
/// zero raw vector yields voxel-sized primitives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovScale<T> {
    pub spatial: T,
    pub directional: T,
}

impl<T: Real> CovScale<T> {
    pub fn unit() -> Self {
        Self {
            spatial: T::one(),
            directional: T::one(),
        }
    }

    #[inline]
    fn for_index(&self, i: usize) -> T {
        if i < 3 {
            self.spatial
        } else {
            self.directional
        }
    }
}

/// Σ = L·Lᵀ together with its factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Covariance6<T> {
    pub sigma: [[T; 6]; 6],
    pub chol: [[T; 6]; 6],
}

impl<T: Real> Covariance6<T> {
    fn block(&self, r0: usize, c0: usize) -> Mat3<T> {
        let mut b = linalg::zero3();
        for (i, row) in b.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.sigma[r0 + i][c0 + j];
            }
        }
        b
    }

    pub fn pp(&self) -> Mat3<T> {
        self.block(0, 0)
    }

    pub fn pd(&self) -> Mat3<T> {
        self.block(0, 3)
    }

    pub fn dd(&self) -> Mat3<T> {
        self.block(3, 3)
    }
}

/// Builds the lower-triangular factor from raw parameters.
pub fn cholesky_factor<T: Real>(raw: &[T; COV_RAW_LEN], scale: CovScale<T>) -> Result<[[T; 6]; 6]> {
    if let Some(bad) = raw.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "cov_raw[{bad}] is not finite"
        )));
    }
    let mut l = [[T::zero(); 6]; 6];
    for (i, row) in l.iter_mut().enumerate() {
        row[i] = raw[i].exp() * scale.for_index(i);
    }
    for (k, &(r, c)) in OFFDIAG_INDEX.iter().enumerate() {
        l[r][c] = raw[6 + k].tanh();
    }
    Ok(l)
}

pub fn build_covariance<T: Real>(
    raw: &[T; COV_RAW_LEN],
    scale: CovScale<T>,
) -> Result<Covariance6<T>> {
    let chol = cholesky_factor(raw, scale)?;
    let mut sigma = [[T::zero(); 6]; 6];
    for i in 0..6 {
        for j in 0..=i {
            let mut s = T::zero();
            for k in 0..=j {
                s += chol[i][k] * chol[j][k];
            }
            sigma[i][j] = s;
            sigma[j][i] = s;
        }
    }
    Ok(Covariance6 { sigma, chol })
}

/// How the directional density scales opacity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Modulation {
    /// `exp(-½ δᵀ Σ_dd⁻¹ δ)`, equal to 1 at the directional mean.
    #[default]
    PeakNormalized,
    /// The full normal density `N(v | μ_d, Σ_dd)`; may exceed 1.
    Density,
}

/// View-conditioned 3D Gaussian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicedGaussian<T> {
    pub mu_p: Vec3<T>,
    pub sigma_pp: Mat3<T>,
    pub w: T,
}

/// Intermediate values of [`slice_covariance`], kept for the backward pass.
#[derive(Clone, Copy, Debug)]
pub struct SliceParts<T> {
    /// Σ_dd⁻¹
    pub precision: Mat3<T>,
    /// v − μ_d
    pub delta: Vec3<T>,
    /// Σ_dd⁻¹ (v − μ_d)
    pub u: Vec3<T>,
}

pub const MAX_DD_CONDITION: f64 = 1e12;
const UNIT_TOL: f64 = 1e-6;

fn check_unit<T: Real>(v: Vec3<T>, what: &str) -> Result<()> {
    let n = linalg::norm3(v).as_f64();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidParameter(format!(
            "{what} must be a unit vector (norm {n})"
        )));
    }
    Ok(())
}

pub fn slice_covariance<T: Real>(
    g: &Gaussian6D<T>,
    cov: &Covariance6<T>,
    v: Vec3<T>,
    modulation: Modulation,
) -> Result<SlicedGaussian<T>> {
    slice_with_parts(g, cov, v, modulation).map(|(s, _)| s)
}

pub fn slice_with_parts<T: Real>(
    g: &Gaussian6D<T>,
    cov: &Covariance6<T>,
    v: Vec3<T>,
    modulation: Modulation,
) -> Result<(SlicedGaussian<T>, SliceParts<T>)> {
    check_unit(v, "view direction")?;
    let pre = precompute_slice(cov, modulation)?;
    Ok(apply_slice(g.mu_p, g.mu_d, &pre, v))
}

/// The view-independent half of slicing: Σ_dd⁻¹, Σ_pd, the Schur
/// complement Σ_pp − Σ_pd Σ_dd⁻¹ Σ_dp and the density normaliser.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicePrecomp<T> {
    pub precision: Mat3<T>,
    pub pd: Mat3<T>,
    pub schur: Mat3<T>,
    /// 1 for [`Modulation::PeakNormalized`].
    pub norm: T,
}

pub fn precompute_slice<T: Real>(cov: &Covariance6<T>, modulation: Modulation) -> Result<SlicePrecomp<T>> {
    let dd = cov.dd();
    let precision = inverse3(&dd).ok_or_else(|| {
        Error::DegenerateCovariance("directional block is singular".into())
    })?;
    let cond = norm1_3(&dd) * norm1_3(&precision);
    if !cond.is_finite() || cond.as_f64() > MAX_DD_CONDITION {
        return Err(Error::DegenerateCovariance(format!(
            "directional block condition number {:e} exceeds {MAX_DD_CONDITION:e}",
            cond.as_f64()
        )));
    }
    let pd = cov.pd();
    // Σ_pd Σ_dd⁻¹ Σ_dp
    let gain = mat_mul3(&pd, &precision);
    let explained = mat_mul3(&gain, &transpose3(&pd));
    let schur = linalg::symmetrize3(&mat_sub3(&cov.pp(), &explained));
    let norm = match modulation {
        Modulation::PeakNormalized => T::one(),
        Modulation::Density => density_norm(&dd),
    };
    Ok(SlicePrecomp {
        precision,
        pd,
        schur,
        norm,
    })
}

/// The per-view half of slicing. `v` is assumed to be a unit vector.
#[inline]
pub fn apply_slice<T: Real>(
    mu_p: Vec3<T>,
    mu_d: Vec3<T>,
    pre: &SlicePrecomp<T>,
    v: Vec3<T>,
) -> (SlicedGaussian<T>, SliceParts<T>) {
    let delta = sub3(v, mu_d);
    let u = mat_vec3(&pre.precision, delta);
    let shift = mat_vec3(&pre.pd, u);
    let maha = dot3(delta, u);
    let w = (T::lit(-0.5) * maha).exp() * pre.norm;
    (
        SlicedGaussian {
            mu_p: linalg::add3(mu_p, shift),
            sigma_pp: pre.schur,
            w,
        },
        SliceParts {
            precision: pre.precision,
            delta,
            u,
        },
    )
}

/// `(2π)^{-3/2} det(Σ)^{-1/2}`
pub(crate) fn density_norm<T: Real>(dd: &Mat3<T>) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    T::one() / (two_pi.powi(3) * linalg::det3(dd)).sqrt()
}

/// Unit vector pointing from the camera centre towards the primitive.
pub fn view_direction<T: Real>(mu_p: Vec3<T>, cam_pos: Vec3<T>) -> Result<Vec3<T>> {
    let d = sub3(mu_p, cam_pos);
    let n = linalg::norm3(d);
    if n == T::zero() || !n.is_finite() {
        return Err(Error::DegenerateGeometry(
            "primitive coincides with the camera centre".into(),
        ));
    }
    Ok(linalg::scale3(d, T::one() / n))
}
