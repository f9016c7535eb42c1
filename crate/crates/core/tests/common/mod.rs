#![allow(dead_code, clippy::field_reassign_with_default, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod suites;
pub mod tables;

use ctsplat_core::agp::{GroupMask, Scene};
use ctsplat_core::diff::{grad_through_background, loss, render_backward, GradientBuffer, LossConfig};
use ctsplat_core::gauss6d::{CovScale, Gaussian6D, PARAM_COUNT};
use ctsplat_core::image::{RenderedImage, RgbImage};
use ctsplat_core::raster::{
    depth_order, render, Camera, RenderConfig, Splat2D, ALPHA_MAX, ALPHA_MIN, T_MIN,
};
use ctsplat_core::volume::VolumeGeometry;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn unit_geometry() -> VolumeGeometry {
    VolumeGeometry::new([1, 1, 1], [1.0; 3])
}

pub fn random_unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.2 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

/// Primitives clustered around the origin with moderate correlations.
pub fn random_gaussian<R: Rng>(rng: &mut R, spread: f64) -> Gaussian6D<f64> {
    let mut g = Gaussian6D::<f64>::default();
    g.mu_p = std::array::from_fn(|_| rng.gen_range(-spread..spread));
    g.mu_d = random_unit(rng);
    for (i, c) in g.cov_raw.iter_mut().enumerate() {
        *c = if i < 6 {
            rng.gen_range(-0.4..0.4)
        } else {
            rng.gen_range(-0.5..0.5)
        };
    }
    for s in g.sh.iter_mut() {
        *s = rng.gen_range(-0.6..0.6);
    }
    g.opacity_raw = rng.gen_range(-1.0..2.0);
    g.label = rng.gen_range(1..12);
    g
}

pub fn random_scene<R: Rng>(rng: &mut R, n: usize, spread: f64, spatial_scale: f64) -> Scene<f64> {
    let gaussians = (0..n).map(|_| random_gaussian(rng, spread)).collect();
    Scene::new(
        gaussians,
        unit_geometry(),
        CovScale {
            spatial: spatial_scale,
            directional: 1.0,
        },
    )
}

/// Camera on a sphere of radius `dist` around the origin.
pub fn orbit_camera<R: Rng>(rng: &mut R, dist: f64, fov: f64, w: usize, h: usize) -> Camera<f64> {
    loop {
        let d = random_unit(rng);
        let pos = d.map(|x| x * dist);
        let up = random_unit(rng);
        if let Ok(cam) = Camera::look_at(pos, [0.0; 3], up, fov, w, h) {
            return cam;
        }
    }
}

pub fn random_image<R: Rng>(rng: &mut R, w: usize, h: usize) -> RgbImage<f64> {
    RgbImage::new(w, h, (0..3 * w * h).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
}

/// Per-pixel compositing over all splats in global depth order, with no
/// tiling and no footprint bounds.
pub fn brute_force_composite(splats: &[Splat2D<f64>], width: usize, height: usize) -> RenderedImage<f64> {
    let mut order: Vec<&Splat2D<f64>> = splats.iter().collect();
    order.sort_by(|a, b| depth_order(a, b));
    let mut img = RenderedImage::transparent(width, height);
    for py in 0..height {
        for px in 0..width {
            let mut c = [0.0f64; 3];
            let mut a = 0.0f64;
            let mut t = 1.0f64;
            for s in &order {
                let dy = py as f64 + 0.5 - s.mean2d[1];
                let dx = px as f64 + 0.5 - s.mean2d[0];
                let power = -0.5 * (s.conic[0] * dx * dx + s.conic[2] * dy * dy) - s.conic[1] * dx * dy;
                let alpha = (s.alpha * power.exp()).min(ALPHA_MAX);
                if alpha < ALPHA_MIN {
                    continue;
                }
                let w = alpha * t;
                for k in 0..3 {
                    c[k] += s.color[k] * w;
                }
                a += w;
                t *= 1.0 - alpha;
                if t < T_MIN {
                    break;
                }
            }
            let i = 4 * (py * width + px);
            img.data[i..i + 3].copy_from_slice(&c);
            img.data[i + 3] = a;
        }
    }
    img
}

pub struct GradProblem {
    pub scene: Scene<f64>,
    pub cam: Camera<f64>,
    pub gt: RgbImage<f64>,
    pub bg: [f64; 3],
    pub loss: LossConfig,
    pub render: RenderConfig,
}

impl GradProblem {
    pub fn value(&self, scene: &Scene<f64>) -> f64 {
        let img = render(scene, &self.cam, GroupMask::all(), &self.render).unwrap();
        loss(&img.over(self.bg), &self.gt, &self.loss).unwrap().0.total
    }

    pub fn analytic(&self) -> GradientBuffer<f64> {
        let img = render(&self.scene, &self.cam, GroupMask::all(), &self.render).unwrap();
        let (_, d) = loss(&img.over(self.bg), &self.gt, &self.loss).unwrap();
        let d_img = grad_through_background(&d, self.bg);
        render_backward(&self.scene, &self.cam, &self.render, GroupMask::all(), &d_img).unwrap()
    }

    pub fn central_difference(&self, gi: usize, pi: usize, eps: f64) -> f64 {
        let mut s = self.scene.clone();
        let mut p = s.gaussians[gi].params();
        let x = p[pi];
        p[pi] = x + eps;
        s.gaussians[gi].set_params(&p);
        let fp = self.value(&s);
        p[pi] = x - eps;
        s.gaussians[gi].set_params(&p);
        let fm = self.value(&s);
        (fp - fm) / (2.0 * eps)
    }
}

#[derive(Default, Debug, Clone, Copy)]
pub struct GradTally {
    pub checked: usize,
    pub passed: usize,
    pub nonzero: usize,
}

/// Relative error below `rel`, or absolute error below `abs`.
pub fn grad_matches(analytic: f64, numeric: f64, rel: f64, abs: f64) -> bool {
    let err = (analytic - numeric).abs();
    err < abs || err / analytic.abs().max(numeric.abs()) < rel
}

pub fn check_all_params(p: &GradProblem, eps: f64, rel: f64, abs: f64) -> (GradTally, Vec<String>) {
    let g = p.analytic();
    let mut tally = GradTally::default();
    let mut failures = Vec::new();
    for gi in 0..p.scene.len() {
        for pi in 0..PARAM_COUNT {
            let a = g.grads[gi][pi];
            let n = p.central_difference(gi, pi, eps);
            tally.checked += 1;
            if a.abs() > abs {
                tally.nonzero += 1;
            }
            if grad_matches(a, n, rel, abs) {
                tally.passed += 1;
            } else {
                failures.push(format!("gaussian {gi} param {pi}: analytic {a:e} numeric {n:e}"));
            }
        }
    }
    (tally, failures)
}

/// Conditional of a joint Gaussian on its last three coordinates, by
/// dense linear algebra: Σ_pp − Σ_pd Σ_dd⁻¹ Σ_dp and μ_p + Σ_pd Σ_dd⁻¹ (v − μ_d).
pub fn dense_conditional(sigma: &[[f64; 6]; 6], mu: &[f64; 6], v: [f64; 3]) -> (DVector<f64>, DMatrix<f64>, f64) {
    let s = DMatrix::from_fn(6, 6, |i, j| sigma[i][j]);
    let spp = s.view((0, 0), (3, 3)).into_owned();
    let spd = s.view((0, 3), (3, 3)).into_owned();
    let sdd = s.view((3, 3), (3, 3)).into_owned();
    let chol = sdd.clone().cholesky().expect("Σ_dd positive definite");
    let delta = DVector::from_fn(3, |i, _| v[i] - mu[3 + i]);
    let solved = chol.solve(&delta);
    let mean = DVector::from_fn(3, |i, _| mu[i]) + &spd * &solved;
    let cov = spp - &spd * chol.solve(&spd.transpose());
    let maha = delta.dot(&solved);
    (mean, cov, (-0.5 * maha).exp())
}
