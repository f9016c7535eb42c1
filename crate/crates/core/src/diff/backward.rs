//! Reverse-mode derivatives of the renderer.
//!
//! The backward pass recomputes each tile's compositing per pixel (no
//! per-pixel state is kept from the forward pass), accumulates gradients
//! of the 2D splat attributes per tile, merges them in tile order and then
//! pulls each splat's gradient back through projection, slicing, the
//! Cholesky parameterisation, the SH colour and the opacity sigmoid.

use crate::agp::{GroupMask, Scene};
use crate::error::{Error, Result};
use crate::gauss6d::{
    apply_slice, build_covariance, param, precompute_slice, sh_color_raw, view_direction,
    Gaussian6D, Modulation, OFFDIAG_INDEX, PARAM_COUNT, SH_C0, SH_C1,
};
use crate::image::RenderedImage;
use crate::linalg::{
    dot3, mat_mul3, mat_t_vec3, mat_vec3, norm3, outer3, sub3, transpose3, Mat3,
};
use crate::raster::{
    screen_jacobian, splat_power, Camera, Projection, RenderConfig, Renderer, Splat2D, ALPHA_MAX,
    ALPHA_MIN, T_MIN,
};
use crate::scalar::{sigmoid, Real};
use rayon::prelude::*;

/// Per-primitive partial derivatives in [`Gaussian6D::params`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientBuffer<T> {
    pub grads: Vec<[T; PARAM_COUNT]>,
}

impl<T: Real> GradientBuffer<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            grads: vec![[T::zero(); PARAM_COUNT]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.grads.iter().flatten().all(|x| x.is_finite())
    }

    pub fn mu_p(&self, i: usize) -> &[T] {
        &self.grads[i][param::MU_P]
    }

    pub fn mu_d(&self, i: usize) -> &[T] {
        &self.grads[i][param::MU_D]
    }

    pub fn cov_raw(&self, i: usize) -> &[T] {
        &self.grads[i][param::COV]
    }

    pub fn sh(&self, i: usize) -> &[T] {
        &self.grads[i][param::SH]
    }

    pub fn opacity_raw(&self, i: usize) -> T {
        self.grads[i][param::OPACITY]
    }
}

/// Gradient of one splat's screen-space attributes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct SplatGrad<T> {
    mean: [T; 2],
    conic: [T; 3],
    alpha: T,
    color: [T; 3],
}

impl<T: Real> SplatGrad<T> {
    fn zero() -> Self {
        Self {
            mean: [T::zero(); 2],
            conic: [T::zero(); 3],
            alpha: T::zero(),
            color: [T::zero(); 3],
        }
    }

    fn add(&mut self, o: &Self) {
        for k in 0..2 {
            self.mean[k] += o.mean[k];
        }
        for k in 0..3 {
            self.conic[k] += o.conic[k];
            self.color[k] += o.color[k];
        }
        self.alpha += o.alpha;
    }

    fn is_zero(&self) -> bool {
        self.mean.iter().chain(&self.conic).chain(&self.color).all(|x| *x == T::zero())
            && self.alpha == T::zero()
    }
}

struct Contribution<T> {
    k: usize,
    alpha: T,
    trans: T,
    gauss: T,
    dx: T,
    dy: T,
    clamped: bool,
}

/// Splat gradients for one tile, aligned with its depth-ordered list.
fn tile_backward<T: Real>(
    splats: &[Splat2D<T>],
    list: &[u32],
    tile: crate::raster::PixelRect,
    width: usize,
    d_image: &RenderedImage<T>,
) -> Vec<SplatGrad<T>> {
    let mut out = vec![SplatGrad::zero(); list.len()];
    let (amin, amax, tmin) = (T::lit(ALPHA_MIN), T::lit(ALPHA_MAX), T::lit(T_MIN));
    let half = T::lit(0.5);
    let mut recs: Vec<Contribution<T>> = Vec::new();
    for py in tile.y0..=tile.y1 {
        for px in tile.x0..=tile.x1 {
            let pi = 4 * (py * width + px);
            let g = &d_image.data[pi..pi + 4];
            if g.iter().all(|x| *x == T::zero()) {
                continue;
            }
            recs.clear();
            let mut trans = T::one();
            for (k, &si) in list.iter().enumerate() {
                let s = &splats[si as usize];
                if !s.rect.contains(px, py) {
                    continue;
                }
                let dy = T::lit(py as f64) + half - s.mean2d[1];
                let dx = T::lit(px as f64) + half - s.mean2d[0];
                let gauss = splat_power(&s.conic, dx, dy).exp();
                let raw = s.alpha * gauss;
                let alpha = raw.min(amax);
                if alpha < amin {
                    continue;
                }
                recs.push(Contribution {
                    k,
                    alpha,
                    trans,
                    gauss,
                    dx,
                    dy,
                    clamped: raw > amax,
                });
                trans *= T::one() - alpha;
                if trans < tmin {
                    break;
                }
            }
            // behind = Σ_{j later} (g_C·c_j + g_A) α_j T_j
            let mut behind = T::zero();
            for r in recs.iter().rev() {
                let s = &splats[list[r.k] as usize];
                let gc = g[0] * s.color[0] + g[1] * s.color[1] + g[2] * s.color[2] + g[3];
                let w = r.alpha * r.trans;
                let o = &mut out[r.k];
                for c in 0..3 {
                    o.color[c] += g[c] * w;
                }
                let d_alpha = r.trans * gc - behind / (T::one() - r.alpha);
                behind += gc * w;
                if r.clamped {
                    continue;
                }
                o.alpha += d_alpha * r.gauss;
                let d_power = d_alpha * s.alpha * r.gauss;
                let (dx, dy) = (r.dx, r.dy);
                o.conic[0] += -half * dx * dx * d_power;
                o.conic[1] += -dx * dy * d_power;
                o.conic[2] += -half * dy * dy * d_power;
                o.mean[0] += (s.conic[0] * dx + s.conic[1] * dy) * d_power;
                o.mean[1] += (s.conic[2] * dy + s.conic[1] * dx) * d_power;
            }
        }
    }
    out
}

/// Gradient of a scalar loss with respect to every primitive of `scene`,
/// given `d_image = ∂loss/∂(premultiplied RGBA)` for the rendered view.
pub fn render_backward<T: Real>(
    scene: &Scene<T>,
    cam: &Camera<T>,
    config: &RenderConfig,
    mask: GroupMask,
    d_image: &RenderedImage<T>,
) -> Result<GradientBuffer<T>> {
    let proj = Renderer::new(scene, *config).project(cam, mask)?;
    backward_from_projection(scene, cam, config, &proj, d_image)
}

/// As [`render_backward`], reusing the projection of the forward pass.
pub fn backward_from_projection<T: Real>(
    scene: &Scene<T>,
    cam: &Camera<T>,
    config: &RenderConfig,
    proj: &Projection<T>,
    d_image: &RenderedImage<T>,
) -> Result<GradientBuffer<T>> {
    if d_image.width != cam.width || d_image.height != cam.height || d_image.data.len() != 4 * cam.width * cam.height {
        return Err(Error::ShapeMismatch(format!(
            "image gradient is {}x{}, camera is {}x{}",
            d_image.width, d_image.height, cam.width, cam.height
        )));
    }
    let grid = &proj.grid;
    let per_tile: Vec<Vec<SplatGrad<T>>> = (0..grid.len())
        .into_par_iter()
        .map(|t| tile_backward(&proj.splats, &proj.tiles[t], grid.tile_rect(t), cam.width, d_image))
        .collect();
    let mut splat_grads = vec![SplatGrad::zero(); proj.splats.len()];
    for (t, grads) in per_tile.iter().enumerate() {
        for (k, g) in grads.iter().enumerate() {
            splat_grads[proj.tiles[t][k] as usize].add(g);
        }
    }
    let low_pass = T::lit(config.low_pass);
    let per_gaussian: Vec<(usize, [T; PARAM_COUNT])> = proj
        .splats
        .par_iter()
        .zip(splat_grads.par_iter())
        .filter(|(_, g)| !g.is_zero())
        .map(|(s, g)| {
            let id = s.gaussian_id as usize;
            (id, gaussian_vjp(&scene.gaussians[id], scene, cam, config.modulation, low_pass, g))
        })
        .collect();
    let mut out = GradientBuffer::zeros(scene.len());
    for (id, g) in per_gaussian {
        out.grads[id] = g;
    }
    Ok(out)
}

/// Pulls screen-space gradients back to the 40 raw parameters.
fn gaussian_vjp<T: Real>(
    g: &Gaussian6D<T>,
    scene: &Scene<T>,
    cam: &Camera<T>,
    modulation: Modulation,
    low_pass: T,
    sg: &SplatGrad<T>,
) -> [T; PARAM_COUNT] {
    let mut out = [T::zero(); PARAM_COUNT];
    // Forward recomputation; these succeeded when the splat was produced.
    let Ok(cov) = build_covariance(&g.cov_raw, scene.cov_scale) else {
        return out;
    };
    let Ok(pre) = precompute_slice(&cov, modulation) else {
        return out;
    };
    let Ok(v) = view_direction(g.mu_p, cam.position) else {
        return out;
    };
    let (sliced, parts) = apply_slice(g.mu_p, g.mu_d, &pre, v);
    let two = T::lit(2.0);
    let half = T::lit(0.5);

    // Colour (clamped to [0, 1]) and SH.
    let raw_color = sh_color_raw(&g.sh, v);
    let mut dv = [T::zero(); 3];
    let (c0, c1) = (T::lit(SH_C0), T::lit(SH_C1));
    let basis = [c0, -c1 * v[1], c1 * v[2], -c1 * v[0]];
    for c in 0..3 {
        let rc = raw_color[c];
        if !(rc > T::zero() && rc < T::one()) {
            continue;
        }
        let dc = sg.color[c];
        for (k, b) in basis.iter().enumerate() {
            out[param::SH.start + 3 * k + c] = dc * *b;
        }
        dv[0] += dc * -c1 * g.sh[9 + c];
        dv[1] += dc * -c1 * g.sh[3 + c];
        dv[2] += dc * c1 * g.sh[6 + c];
    }

    // Opacity: alpha = min(σ(o)·w, ALPHA_MAX).
    let sig = sigmoid(g.opacity_raw);
    let mut dw = T::zero();
    if sig * sliced.w <= T::lit(ALPHA_MAX) {
        out[param::OPACITY] = sg.alpha * sliced.w * sig * (T::one() - sig);
        dw = sg.alpha * sig;
    }

    // Projection.
    let t = cam.to_camera(sliced.mu_p);
    let m = screen_jacobian(cam, t);
    let sp = &sliced.sigma_pp;
    let s0 = mat_vec3(sp, m[0]);
    let s1 = mat_vec3(sp, m[1]);
    let a = dot3(m[0], s0) + low_pass;
    let b = dot3(m[0], s1);
    let c = dot3(m[1], s1) + low_pass;
    let det = a * c - b * b;
    let q = [c / det, -b / det, a / det];
    // dCov2 = −Q·G·Q with G the symmetric gradient w.r.t. the conic
    let gq = [[sg.conic[0], half * sg.conic[1]], [half * sg.conic[1], sg.conic[2]]];
    let qm = [[q[0], q[1]], [q[1], q[2]]];
    let mut gcov = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = T::zero();
            for k in 0..2 {
                for l in 0..2 {
                    s += qm[i][k] * gq[k][l] * qm[l][j];
                }
            }
            gcov[i][j] = -s;
        }
    }
    // Σ' gradient Mᵀ·G·M and M gradient 2·G·M·Σ'
    let mut g_sigma = [[T::zero(); 3]; 3];
    for r in 0..3 {
        for col in 0..3 {
            let mut s = T::zero();
            for i in 0..2 {
                for j in 0..2 {
                    s += m[i][r] * gcov[i][j] * m[j][col];
                }
            }
            g_sigma[r][col] = s;
        }
    }
    let ms = [s0, s1];
    let mut dm = [[T::zero(); 3]; 2];
    for i in 0..2 {
        for k in 0..3 {
            dm[i][k] = two * (gcov[i][0] * ms[0][k] + gcov[i][1] * ms[1][k]);
        }
    }
    // M = J·R, so dJ = dM·Rᵀ; only four entries of J are non-zero.
    let r = &cam.rotation;
    let dj = |i: usize, j: usize| dm[i][0] * r[j][0] + dm[i][1] * r[j][1] + dm[i][2] * r[j][2];
    let (dj00, dj02, dj11, dj12) = (dj(0, 0), dj(0, 2), dj(1, 1), dj(1, 2));
    let (fx, fy) = cam.focal();
    let iz = T::one() / t[2];
    let iz2 = iz * iz;
    let iz3 = iz2 * iz;
    let mut dt = [T::zero(); 3];
    dt[0] = -fx * iz2 * dj02 + sg.mean[0] * fx * iz;
    dt[1] = -fy * iz2 * dj12 + sg.mean[1] * fy * iz;
    dt[2] = -fx * iz2 * dj00 + two * fx * t[0] * iz3 * dj02 - fy * iz2 * dj11
        + two * fy * t[1] * iz3 * dj12
        - sg.mean[0] * fx * t[0] * iz2
        - sg.mean[1] * fy * t[1] * iz2;
    let g_mu = mat_t_vec3(r, dt);

    // Slicing.
    let p = &parts.precision;
    let pd = &pre.pd;
    let (delta, u) = (parts.delta, parts.u);
    let gs_sym: Mat3<T> = std::array::from_fn(|i| std::array::from_fn(|j| g_sigma[i][j] + g_sigma[j][i]));
    let mut d_pd = outer3(g_mu, u);
    let tmp = mat_mul3(&mat_mul3(&gs_sym, pd), p);
    for i in 0..3 {
        for j in 0..3 {
            d_pd[i][j] -= tmp[i][j];
        }
    }
    let du = mat_t_vec3(pd, g_mu);
    let dq = -half * sliced.w * dw;
    let mut d_p = outer3(du, delta);
    let pgp = mat_mul3(&mat_mul3(&transpose3(pd), &g_sigma), pd);
    let dd_outer = outer3(delta, delta);
    for i in 0..3 {
        for j in 0..3 {
            d_p[i][j] += dq * dd_outer[i][j] - pgp[i][j];
        }
    }
    let pt_du = mat_t_vec3(p, du);
    let pt_delta = mat_t_vec3(p, delta);
    let mut d_delta = [T::zero(); 3];
    for i in 0..3 {
        // q = δᵀPδ ⇒ ∂q/∂δ = (P + Pᵀ)δ
        d_delta[i] = pt_du[i] + dq * (u[i] + pt_delta[i]);
    }
    let pt = transpose3(p);
    let mut d_dd = mat_mul3(&mat_mul3(&pt, &d_p), &pt);
    for row in d_dd.iter_mut() {
        for x in row.iter_mut() {
            *x = -*x;
        }
    }
    if modulation == Modulation::Density {
        for i in 0..3 {
            for j in 0..3 {
                d_dd[i][j] -= half * dw * sliced.w * pt[i][j];
            }
        }
    }
    for i in 0..3 {
        dv[i] += d_delta[i];
        out[param::MU_D.start + i] = -d_delta[i];
    }

    // Σ = L·Lᵀ; gradient placed on the (pp, pd, dd) blocks actually read.
    let mut g6 = [[T::zero(); 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            g6[i][j] = g_sigma[i][j];
            g6[i][3 + j] = d_pd[i][j];
            g6[3 + i][3 + j] = d_dd[i][j];
        }
    }
    let l = &cov.chol;
    let mut dl = [[T::zero(); 6]; 6];
    for i in 0..6 {
        for j in 0..=i {
            let mut s = T::zero();
            for k in 0..6 {
                s += (g6[i][k] + g6[k][i]) * l[k][j];
            }
            dl[i][j] = s;
        }
    }
    for i in 0..6 {
        out[param::COV.start + i] = dl[i][i] * l[i][i];
    }
    for (k, &(row, col)) in OFFDIAG_INDEX.iter().enumerate() {
        let x = l[row][col];
        out[param::COV.start + 6 + k] = dl[row][col] * (T::one() - x * x);
    }

    // v = (μ_p − o)/‖μ_p − o‖
    let d = sub3(g.mu_p, cam.position);
    let inv_n = T::one() / norm3(d);
    let vdv = dot3(v, dv);
    for i in 0..3 {
        out[param::MU_P.start + i] = g_mu[i] + (dv[i] - v[i] * vdv) * inv_n;
    }
    out
}
