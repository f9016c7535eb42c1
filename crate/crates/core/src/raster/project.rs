use super::Camera;
use crate::error::Result;
use crate::gauss6d::{
    apply_slice, build_covariance, eval_sh_color, precompute_slice, view_direction, CovScale,
    Gaussian6D, Modulation, SlicePrecomp, SlicedGaussian, SH_COEFFS,
};
use crate::linalg::{dot3, mat_vec3, Vec3};
use crate::scalar::{sigmoid, Real};

/// Per-pixel opacities are clamped to this value.
pub const ALPHA_MAX: f64 = 0.99;
/// Contributions below this opacity are skipped.
pub const ALPHA_MIN: f64 = 1.0 / 255.0;
/// Compositing stops once transmittance falls below this.
pub const T_MIN: f64 = 1e-4;

/// View-independent state of one primitive, computed once per scene.
#[derive(Clone, Copy, Debug)]
pub struct PreparedGaussian<T> {
    pub mu_p: Vec3<T>,
    pub mu_d: Vec3<T>,
    pub sh: [T; SH_COEFFS],
    pub opacity: T,
    pub label: u8,
    pub slice: SlicePrecomp<T>,
}

pub fn prepare_gaussian<T: Real>(
    g: &Gaussian6D<T>,
    scale: CovScale<T>,
    modulation: Modulation,
) -> Result<PreparedGaussian<T>> {
    let cov = build_covariance(&g.cov_raw, scale)?;
    Ok(PreparedGaussian {
        mu_p: g.mu_p,
        mu_d: g.mu_d,
        sh: g.sh,
        opacity: sigmoid(g.opacity_raw),
        label: g.label,
        slice: precompute_slice(&cov, modulation)?,
    })
}

/// Inclusive pixel bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PixelRect {
    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let r = Self {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        (r.x0 <= r.x1 && r.y0 <= r.y1).then_some(r)
    }
}

/// A primitive projected to the image plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Splat2D<T> {
    pub mean2d: [T; 2],
    /// `[xx, xy, yy]`, including the low-pass dilation.
    pub cov2d: [T; 3],
    /// Inverse of `cov2d`, same layout.
    pub conic: [T; 3],
    pub depth: T,
    pub color: [T; 3],
    pub alpha: T,
    pub gaussian_id: u32,
    /// Pixels where the splat can reach [`ALPHA_MIN`].
    pub rect: PixelRect,
}

/// `-½ dᵀ Q d` for `d = (dx, dy)` and conic `Q`.
#[inline(always)]
pub fn splat_power<T: Real>(conic: &[T; 3], dx: T, dy: T) -> T {
    T::lit(-0.5) * (conic[0] * dx * dx + conic[2] * dy * dy) - conic[1] * dx * dy
}

/// The 2×3 matrix `J·R` mapping camera-rotated offsets to pixels, where
/// `J` is the Jacobian of the perspective map at camera point `t`.
#[inline]
pub(crate) fn screen_jacobian<T: Real>(cam: &Camera<T>, t: Vec3<T>) -> [[T; 3]; 2] {
    let (fx, fy) = cam.focal();
    let iz = T::one() / t[2];
    let r = &cam.rotation;
    let j00 = fx * iz;
    let j02 = -fx * t[0] * iz * iz;
    let j11 = fy * iz;
    let j12 = -fy * t[1] * iz * iz;
    [
        std::array::from_fn(|k| j00 * r[0][k] + j02 * r[2][k]),
        std::array::from_fn(|k| j11 * r[1][k] + j12 * r[2][k]),
    ]
}

/// EWA projection of a sliced primitive. Returns `None` when the splat is
/// clipped, too transparent to ever reach [`ALPHA_MIN`], or off screen.
pub fn project_gaussian<T: Real>(
    sliced: &SlicedGaussian<T>,
    color: [T; 3],
    opacity: T,
    cam: &Camera<T>,
    low_pass: T,
    gaussian_id: u32,
) -> Option<Splat2D<T>> {
    let t = cam.to_camera(sliced.mu_p);
    let depth = t[2];
    if !(depth >= cam.near && depth <= cam.far) {
        return None;
    }
    let alpha = (opacity * sliced.w).min(T::lit(ALPHA_MAX));
    if !(alpha >= T::lit(ALPHA_MIN)) {
        return None;
    }
    let m = screen_jacobian(cam, t);
    let s0 = mat_vec3(&sliced.sigma_pp, m[0]);
    let s1 = mat_vec3(&sliced.sigma_pp, m[1]);
    let a = dot3(m[0], s0) + low_pass;
    let b = dot3(m[0], s1);
    let c = dot3(m[1], s1) + low_pass;
    let det = a * c - b * b;
    if !(det > T::zero()) || !det.is_finite() {
        return None;
    }
    let inv = T::one() / det;
    let conic = [c * inv, -b * inv, a * inv];

    let (fx, fy) = cam.focal();
    let (cx, cy) = cam.principal();
    let mean2d = [fx * t[0] / depth + cx, fy * t[1] / depth + cy];

    // α·exp(-q/2) ≥ ALPHA_MIN only inside q ≤ 2 ln(α / ALPHA_MIN); the
    // bounding box of that ellipse is ±sqrt(r²·Σ_xx), ±sqrt(r²·Σ_yy).
    let r2 = (T::lit(2.0) * (alpha / T::lit(ALPHA_MIN)).ln()).max(T::zero());
    let hx = (r2 * a).sqrt().as_f64();
    let hy = (r2 * c).sqrt().as_f64();
    let rect = pixel_span(mean2d[0].as_f64(), hx, cam.width)
        .zip(pixel_span(mean2d[1].as_f64(), hy, cam.height))
        .map(|((x0, x1), (y0, y1))| PixelRect { x0, y0, x1, y1 })?;

    Some(Splat2D {
        mean2d,
        cov2d: [a, b, c],
        conic,
        depth,
        color,
        alpha,
        gaussian_id,
        rect,
    })
}

/// Pixels whose centres lie within `half` of `center`, clamped to
/// `[0, size)`. Rounding outwards leaves at least half a pixel of slack.
fn pixel_span(center: f64, half: f64, size: usize) -> Option<(usize, usize)> {
    if !center.is_finite() || !half.is_finite() {
        return None;
    }
    let lo = (center - half - 0.5).floor();
    let hi = (center + half - 0.5).ceil();
    if hi < 0.0 || lo > (size - 1) as f64 {
        return None;
    }
    Some((lo.max(0.0) as usize, hi.min((size - 1) as f64) as usize))
}

/// Slices, colours and projects one prepared primitive for `cam`.
pub fn project_prepared<T: Real>(
    p: &PreparedGaussian<T>,
    cam: &Camera<T>,
    low_pass: T,
    gaussian_id: u32,
) -> Option<Splat2D<T>> {
    let v = view_direction(p.mu_p, cam.position).ok()?;
    let (sliced, _) = apply_slice(p.mu_p, p.mu_d, &p.slice, v);
    let color = eval_sh_color(&p.sh, v);
    project_gaussian(&sliced, color, p.opacity, cam, low_pass, gaussian_id)
}
