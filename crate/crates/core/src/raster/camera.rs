use crate::error::{Error, Result};
use crate::linalg::{cross3, mat_vec3, norm3, orthonormal_det, scale3, sub3, Mat3, Vec3};
use crate::scalar::Real;

pub const DEFAULT_NEAR: f64 = 0.1;
pub const DEFAULT_FAR: f64 = 1.0e5;

/// Pinhole camera, OpenCV convention: x right, y down, z forward.
///
/// `rotation` maps world to camera coordinates (its rows are the camera
/// axes in world space). The principal point is the image centre and
/// pixel `(px, py)` is sampled at `(px + 0.5, py + 0.5)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera<T> {
    pub position: Vec3<T>,
    pub rotation: Mat3<T>,
    pub fov_y: T,
    pub width: usize,
    pub height: usize,
    pub near: T,
    pub far: T,
}

impl<T: Real> Camera<T> {
    pub fn new(position: Vec3<T>, rotation: Mat3<T>, fov_y: T, width: usize, height: usize) -> Result<Self> {
        let cam = Self {
            position,
            rotation,
            fov_y,
            width,
            height,
            near: T::lit(DEFAULT_NEAR),
            far: T::lit(DEFAULT_FAR),
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera at `position` looking at `target`; `up` fixes the roll and
    /// must not be parallel to the viewing direction.
    pub fn look_at(
        position: Vec3<T>,
        target: Vec3<T>,
        up: Vec3<T>,
        fov_y: T,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let fwd = sub3(target, position);
        let n = norm3(fwd);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::DegenerateGeometry(
                "camera target coincides with its position".into(),
            ));
        }
        let z = scale3(fwd, T::one() / n);
        let x = cross3(z, up);
        let nx = norm3(x);
        if !(nx > T::lit(1e-9) * norm3(up)) || !nx.is_finite() {
            return Err(Error::DegenerateGeometry(
                "up vector is parallel to the viewing direction".into(),
            ));
        }
        let x = scale3(x, T::one() / nx);
        let y = cross3(z, x);
        Self::new(position, [x, y, z], fov_y, width, height)
    }

    pub fn with_clip(mut self, near: T, far: T) -> Result<Self> {
        self.near = near;
        self.far = far;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return bad("image size must be positive");
        }
        if !(self.fov_y > T::zero() && self.fov_y < T::PI()) {
            return bad("fov_y must lie in (0, π)");
        }
        if !(self.near > T::zero() && self.near < self.far) {
            return bad("clip planes need 0 < near < far");
        }
        if self.position.iter().any(|x| !x.is_finite()) {
            return bad("camera position is not finite");
        }
        let r = self.rotation.map(|row| row.map(|x| x.as_f64()));
        match orthonormal_det(&r, 1e-5) {
            Some(d) if d > 0.0 => Ok(()),
            _ => bad("camera rotation must be a proper orthonormal matrix"),
        }
    }

    /// Focal lengths in pixels `(fx, fy)`; square pixels.
    #[inline]
    pub fn focal(&self) -> (T, T) {
        let f = T::lit(self.height as f64 * 0.5) / (self.fov_y * T::lit(0.5)).tan();
        (f, f)
    }

    #[inline]
    pub fn principal(&self) -> (T, T) {
        (
            T::lit(self.width as f64 * 0.5),
            T::lit(self.height as f64 * 0.5),
        )
    }

    #[inline]
    pub fn to_camera(&self, p: Vec3<T>) -> Vec3<T> {
        mat_vec3(&self.rotation, sub3(p, self.position))
    }

    /// Pixel coordinates of a world point, `None` behind the near plane.
    pub fn project(&self, p: Vec3<T>) -> Option<[T; 2]> {
        let t = self.to_camera(p);
        if t[2] < self.near {
            return None;
        }
        let (fx, fy) = self.focal();
        let (cx, cy) = self.principal();
        Some([fx * t[0] / t[2] + cx, fy * t[1] / t[2] + cy])
    }

    pub fn cast<U: Real>(&self) -> Camera<U> {
        let c = |x: T| U::lit(x.as_f64());
        Camera {
            position: self.position.map(c),
            rotation: self.rotation.map(|r| r.map(c)),
            fov_y: c(self.fov_y),
            width: self.width,
            height: self.height,
            near: c(self.near),
            far: c(self.far),
        }
    }
}
