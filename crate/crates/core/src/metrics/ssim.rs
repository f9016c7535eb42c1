//! SSIM and MS-SSIM with exact gradients.
//!
//! Statistics use an 11-tap Gaussian window (σ = 1.5) evaluated only where
//! it fits inside the image ("valid" windows). The gradient of a window
//! mean is pushed back through the filter by its adjoint, and through the
//! 2×2 average pooling between scales the same way.

use crate::image::RgbImage;
use crate::scalar::Real;

pub const WINDOW: usize = 11;
pub const WINDOW_SIGMA: f64 = 1.5;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;
/// Standard five-scale exponents; they sum to 1.0001 as published, so
/// [`default_ms_weights`] rescales them to sum to one.
pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

pub fn default_ms_weights() -> Vec<f64> {
    let s: f64 = MS_SSIM_WEIGHTS.iter().sum();
    MS_SSIM_WEIGHTS.iter().map(|w| w / s).collect()
}

/// Smallest side length that supports `scales` levels of MS-SSIM.
pub fn min_side_for_scales(scales: usize) -> usize {
    (1 << scales.saturating_sub(1)) * WINDOW
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Plane<T> {
    pub w: usize,
    pub h: usize,
    pub data: Vec<T>,
}

impl<T: Real> Plane<T> {
    fn zeros(w: usize, h: usize) -> Self {
        Self {
            w,
            h,
            data: vec![T::zero(); w * h],
        }
    }

    pub(crate) fn channel(img: &RgbImage<T>, c: usize) -> Self {
        Self {
            w: img.width,
            h: img.height,
            data: img.data.iter().skip(c).step_by(3).copied().collect(),
        }
    }

    fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            w: self.w,
            h: self.h,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

fn kernel<T: Real>() -> [T; WINDOW] {
    let c = (WINDOW / 2) as f64;
    let raw: [f64; WINDOW] =
        std::array::from_fn(|i| (-((i as f64 - c).powi(2)) / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp());
    let s: f64 = raw.iter().sum();
    raw.map(|k| T::lit(k / s))
}

/// Separable valid correlation; output is `(w − 10) × (h − 10)`.
fn filter<T: Real>(p: &Plane<T>, k: &[T; WINDOW]) -> Plane<T> {
    let ow = p.w + 1 - WINDOW;
    let oh = p.h + 1 - WINDOW;
    let mut rows = Plane::zeros(ow, p.h);
    for y in 0..p.h {
        let src = &p.data[y * p.w..(y + 1) * p.w];
        for x in 0..ow {
            let mut s = T::zero();
            for (i, &kv) in k.iter().enumerate() {
                s += kv * src[x + i];
            }
            rows.data[y * ow + x] = s;
        }
    }
    let mut out = Plane::zeros(ow, oh);
    for y in 0..oh {
        for x in 0..ow {
            let mut s = T::zero();
            for (i, &kv) in k.iter().enumerate() {
                s += kv * rows.data[(y + i) * ow + x];
            }
            out.data[y * ow + x] = s;
        }
    }
    out
}

/// Adjoint of [`filter`]: scatters a valid-size plane back to `w × h`.
fn filter_adjoint<T: Real>(g: &Plane<T>, w: usize, h: usize, k: &[T; WINDOW]) -> Plane<T> {
    let mut rows = Plane::zeros(g.w, h);
    for y in 0..g.h {
        for x in 0..g.w {
            let v = g.data[y * g.w + x];
            for (i, &kv) in k.iter().enumerate() {
                rows.data[(y + i) * g.w + x] += kv * v;
            }
        }
    }
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..g.w {
            let v = rows.data[y * g.w + x];
            for (i, &kv) in k.iter().enumerate() {
                out.data[y * w + x + i] += kv * v;
            }
        }
    }
    out
}

fn pool<T: Real>(p: &Plane<T>) -> Plane<T> {
    let (w, h) = (p.w / 2, p.h / 2);
    let q = T::lit(0.25);
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let a = |dx: usize, dy: usize| p.data[(2 * y + dy) * p.w + 2 * x + dx];
            out.data[y * w + x] = (a(0, 0) + a(1, 0) + a(0, 1) + a(1, 1)) * q;
        }
    }
    out
}

fn pool_adjoint<T: Real>(g: &Plane<T>, w: usize, h: usize) -> Plane<T> {
    let q = T::lit(0.25);
    let mut out = Plane::zeros(w, h);
    for y in 0..g.h {
        for x in 0..g.w {
            let v = g.data[y * g.w + x] * q;
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                out.data[(2 * y + dy) * w + 2 * x + dx] += v;
            }
        }
    }
    out
}

/// Mean over valid windows of `cs` (or `l·cs` when `luminance`), and its
/// gradient with respect to `x` if requested.
fn window_mean<T: Real>(x: &Plane<T>, y: &Plane<T>, luminance: bool, grad: bool) -> (T, Option<Plane<T>>) {
    let k = kernel::<T>();
    let c1 = T::lit(K1 * K1);
    let c2 = T::lit(K2 * K2);
    let two = T::lit(2.0);
    let mux = filter(x, &k);
    let muy = filter(y, &k);
    let exx = filter(&x.zip_map(x, |a, b| a * b), &k);
    let eyy = filter(&y.zip_map(y, |a, b| a * b), &k);
    let exy = filter(&x.zip_map(y, |a, b| a * b), &k);
    let n = mux.data.len();
    let inv_n = T::one() / T::lit(n as f64);
    let mut sum = T::zero();
    let (mut ga, mut gb, mut gc) = if grad {
        (Plane::zeros(mux.w, mux.h), Plane::zeros(mux.w, mux.h), Plane::zeros(mux.w, mux.h))
    } else {
        (Plane::zeros(0, 0), Plane::zeros(0, 0), Plane::zeros(0, 0))
    };
    for p in 0..n {
        let (mx, my) = (mux.data[p], muy.data[p]);
        let sxx = exx.data[p] - mx * mx;
        let syy = eyy.data[p] - my * my;
        let sxy = exy.data[p] - mx * my;
        let cs_num = two * sxy + c2;
        let cs_den = sxx + syy + c2;
        let cs = cs_num / cs_den;
        let (l, dl_dmx) = if luminance {
            let num = two * mx * my + c1;
            let den = mx * mx + my * my + c1;
            (num / den, (two * my * den - num * two * mx) / (den * den))
        } else {
            (T::one(), T::zero())
        };
        sum += l * cs;
        if grad {
            // ∂f/∂σxy, ∂f/∂σx², ∂f/∂μx with f = l·cs, each scaled by 1/n
            let d_sxy = l * two / cs_den * inv_n;
            let d_sxx = -l * cs / cs_den * inv_n;
            let d_mx = dl_dmx * cs * inv_n;
            ga.data[p] = d_mx - two * mx * d_sxx - my * d_sxy;
            gb.data[p] = d_sxx;
            gc.data[p] = d_sxy;
        }
    }
    let value = sum * inv_n;
    if !grad {
        return (value, None);
    }
    let fa = filter_adjoint(&ga, x.w, x.h, &k);
    let fb = filter_adjoint(&gb, x.w, x.h, &k);
    let fc = filter_adjoint(&gc, x.w, x.h, &k);
    let mut g = Plane::zeros(x.w, x.h);
    for i in 0..g.data.len() {
        g.data[i] = fa.data[i] + two * x.data[i] * fb.data[i] + y.data[i] * fc.data[i];
    }
    (value, Some(g))
}

/// MS-SSIM of one channel; `weights.len()` is the number of scales.
fn ms_ssim_plane<T: Real>(x: &Plane<T>, y: &Plane<T>, weights: &[f64], grad: bool) -> (T, Option<Plane<T>>) {
    let scales = weights.len();
    let mut xs = vec![x.clone()];
    let mut ys = vec![y.clone()];
    for s in 1..scales {
        xs.push(pool(&xs[s - 1]));
        ys.push(pool(&ys[s - 1]));
    }
    let terms: Vec<(T, Option<Plane<T>>)> = (0..scales)
        .map(|s| window_mean(&xs[s], &ys[s], s + 1 == scales, grad))
        .collect();
    let mut value = T::one();
    for (s, (m, _)) in terms.iter().enumerate() {
        value *= m.max(T::zero()).powf(T::lit(weights[s]));
    }
    if !grad {
        return (value, None);
    }
    let mut acc: Option<Plane<T>> = None;
    for s in (0..scales).rev() {
        let (m, g) = &terms[s];
        let coef = if *m > T::zero() {
            value * T::lit(weights[s]) / *m
        } else {
            T::zero()
        };
        let mut here = g.clone().expect("gradient requested");
        for v in &mut here.data {
            *v *= coef;
        }
        if let Some(a) = acc.take() {
            let up = pool_adjoint(&a, here.w, here.h);
            for (h, u) in here.data.iter_mut().zip(&up.data) {
                *h += *u;
            }
        }
        acc = Some(here);
    }
    (value, acc)
}

/// Effective scale weights for an image: the requested set, or plain SSIM
/// when the image is too small for that many scales.
pub fn effective_weights(width: usize, height: usize, weights: &[f64]) -> Vec<f64> {
    if width.min(height) < min_side_for_scales(weights.len()) {
        vec![1.0]
    } else {
        weights.to_vec()
    }
}

/// Channel-averaged MS-SSIM and, optionally, its gradient with respect to
/// `a`. Callers guarantee matching shapes of at least 11 pixels a side.
pub(crate) fn ms_ssim_with_grad<T: Real>(
    a: &RgbImage<T>,
    b: &RgbImage<T>,
    weights: &[f64],
    grad: bool,
) -> (T, Option<RgbImage<T>>) {
    let weights = effective_weights(a.width, a.height, weights);
    let third = T::lit(1.0 / 3.0);
    let mut total = T::zero();
    let mut g = grad.then(|| RgbImage::filled(a.width, a.height, [T::zero(); 3]));
    for c in 0..3 {
        let (v, gp) = ms_ssim_plane(&Plane::channel(a, c), &Plane::channel(b, c), &weights, grad);
        total += v;
        if let (Some(g), Some(gp)) = (g.as_mut(), gp) {
            for (i, &x) in gp.data.iter().enumerate() {
                g.data[3 * i + c] = x * third;
            }
        }
    }
    (total * third, g)
}
