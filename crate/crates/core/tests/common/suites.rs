//! Larger checks shared by the integration tests and the acceptance run.

use super::*;
use ctsplat_core::agp::{agp_initialize, AgpConfig, GroupMask, Scene};
use ctsplat_core::diff::{loss, LossConfig};
use ctsplat_core::gauss6d::{
    apply_slice, build_covariance, eval_sh_color, precompute_slice, view_direction, CovScale, Gaussian6D,
    Modulation,
};
use ctsplat_core::image::RenderedImage;
use ctsplat_core::metrics::View;
use ctsplat_core::phantom::{ct_phantom, PhantomConfig};
use ctsplat_core::raster::{
    composite, prepare_gaussian, Camera, PixelRect, RenderConfig, Renderer, Splat2D, ALPHA_MAX, ALPHA_MIN,
};
use ctsplat_core::volume::{preprocess, TfSet};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- slicing

#[derive(Debug, Default)]
pub struct SlicingReport {
    pub samples: usize,
    pub max_rel_mean: f64,
    pub max_rel_cov: f64,
    pub max_rel_w: f64,
    pub sigma_not_psd: usize,
    pub sigma_not_symmetric: usize,
    pub schur_not_psd: usize,
    pub w_out_of_range: usize,
    pub errors: usize,
}

impl SlicingReport {
    pub fn passes(&self, rel: f64) -> bool {
        self.max_rel_mean < rel
            && self.max_rel_cov < rel
            && self.max_rel_w < rel
            && self.sigma_not_psd == 0
            && self.sigma_not_symmetric == 0
            && self.schur_not_psd == 0
            && self.w_out_of_range == 0
            && self.errors == 0
    }
}

fn min_eigen_ratio(m: nalgebra::DMatrix<f64>) -> f64 {
    let e = SymmetricEigen::new(m).eigenvalues;
    let max = e.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    e.iter().cloned().fold(f64::INFINITY, f64::min) / max
}

pub fn random_slicing_input<R: Rng>(rng: &mut R) -> (Gaussian6D<f64>, CovScale<f64>, [f64; 3]) {
    let mut g = Gaussian6D::<f64>::default();
    g.mu_p = std::array::from_fn(|_| rng.gen_range(-50.0..50.0));
    g.mu_d = random_unit(rng);
    for (i, c) in g.cov_raw.iter_mut().enumerate() {
        *c = if i < 6 { rng.gen_range(-1.5..1.5) } else { rng.gen_range(-2.5..2.5) };
    }
    let scale = CovScale {
        spatial: rng.gen_range(0.2..4.0),
        directional: rng.gen_range(0.2..2.0),
    };
    (g, scale, random_unit(rng))
}

pub fn slicing_suite(samples: usize, seed: u64) -> SlicingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SlicingReport { samples, ..Default::default() };
    for _ in 0..samples {
        let (g, scale, v) = random_slicing_input(&mut rng);
        let cov = match build_covariance(&g.cov_raw, scale) {
            Ok(c) => c,
            Err(_) => {
                rep.errors += 1;
                continue;
            }
        };
        let s = &cov.sigma;
        if (0..6).any(|i| (0..6).any(|j| s[i][j] != s[j][i])) {
            rep.sigma_not_symmetric += 1;
        }
        let dense = nalgebra::DMatrix::from_fn(6, 6, |i, j| s[i][j]);
        if min_eigen_ratio(dense) < -1e-12 {
            rep.sigma_not_psd += 1;
        }
        let pre = match precompute_slice(&cov, Modulation::PeakNormalized) {
            Ok(p) => p,
            Err(_) => {
                rep.errors += 1;
                continue;
            }
        };
        let (sliced, _) = apply_slice(g.mu_p, g.mu_d, &pre, v);

        let mu: [f64; 6] = std::array::from_fn(|i| if i < 3 { g.mu_p[i] } else { g.mu_d[i - 3] });
        let (mean, cov_o, w_o) = dense_conditional(s, &mu, v);

        let schur = nalgebra::DMatrix::from_fn(3, 3, |i, j| sliced.sigma_pp[i][j]);
        if min_eigen_ratio(schur) < -1e-12 {
            rep.schur_not_psd += 1;
        }
        if !(sliced.w > 0.0 && sliced.w <= 1.0) {
            rep.w_out_of_range += 1;
        }

        let mscale = mean.amax().max(1e-300);
        let dm = (0..3).map(|i| (sliced.mu_p[i] - mean[i]).abs()).fold(0.0, f64::max);
        rep.max_rel_mean = rep.max_rel_mean.max(dm / mscale);
        let cscale = cov_o.amax().max(1e-300);
        let dc = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (sliced.sigma_pp[i][j] - cov_o[(i, j)]).abs())
            .fold(0.0, f64::max);
        rep.max_rel_cov = rep.max_rel_cov.max(dc / cscale);
        rep.max_rel_w = rep.max_rel_w.max((sliced.w - w_o).abs() / w_o.max(1e-300));
    }
    rep
}

// -------------------------------------------------------- rasteriser oracle

/// Every primitive that passes the depth, opacity and determinant tests,
/// with no screen-space culling at all. Arithmetic mirrors the library's
/// per-primitive projection so that results can be compared bit for bit.
pub fn oracle_splats(scene: &Scene<f64>, cam: &Camera<f64>, cfg: &RenderConfig, mask: GroupMask) -> Vec<Splat2D<f64>> {
    let (fx, fy) = cam.focal();
    let (cx, cy) = cam.principal();
    let r = cam.rotation;
    let mut out = Vec::new();
    for (id, g) in scene.gaussians.iter().enumerate() {
        if !mask.contains(g.label) {
            continue;
        }
        let Ok(p) = prepare_gaussian(g, scene.cov_scale, cfg.modulation) else {
            continue;
        };
        let Ok(v) = view_direction(p.mu_p, cam.position) else {
            continue;
        };
        let (sl, _) = apply_slice(p.mu_p, p.mu_d, &p.slice, v);
        let color = eval_sh_color(&p.sh, v);
        let t = cam.to_camera(sl.mu_p);
        if !(t[2] >= cam.near && t[2] <= cam.far) {
            continue;
        }
        let alpha = (p.opacity * sl.w).min(ALPHA_MAX);
        if !(alpha >= ALPHA_MIN) {
            continue;
        }
        let iz = 1.0 / t[2];
        let j00 = fx * iz;
        let j02 = -fx * t[0] * iz * iz;
        let j11 = fy * iz;
        let j12 = -fy * t[1] * iz * iz;
        let m0: [f64; 3] = std::array::from_fn(|k| j00 * r[0][k] + j02 * r[2][k]);
        let m1: [f64; 3] = std::array::from_fn(|k| j11 * r[1][k] + j12 * r[2][k]);
        let sv = |m: [f64; 3]| -> [f64; 3] {
            let s = &sl.sigma_pp;
            std::array::from_fn(|i| s[i][0] * m[0] + s[i][1] * m[1] + s[i][2] * m[2])
        };
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let (s0, s1) = (sv(m0), sv(m1));
        let a = dot(m0, s0) + cfg.low_pass;
        let b = dot(m0, s1);
        let c = dot(m1, s1) + cfg.low_pass;
        let det = a * c - b * b;
        if !(det > 0.0) || !det.is_finite() {
            continue;
        }
        let inv = 1.0 / det;
        out.push(Splat2D {
            mean2d: [fx * t[0] / t[2] + cx, fy * t[1] / t[2] + cy],
            cov2d: [a, b, c],
            conic: [c * inv, -b * inv, a * inv],
            depth: t[2],
            color,
            alpha,
            gaussian_id: id as u32,
            rect: PixelRect { x0: 0, y0: 0, x1: cam.width - 1, y1: cam.height - 1 },
        });
    }
    out
}

pub struct OracleCase {
    pub name: String,
    pub scene: Scene<f64>,
    pub cam: Camera<f64>,
    pub mask: GroupMask,
    pub config: RenderConfig,
}

fn with_tile(tile_size: usize) -> RenderConfig {
    RenderConfig { tile_size, ..Default::default() }
}

/// Random scenes plus hand-built overlap, culling and depth-tie cases.
pub fn oracle_cases() -> Vec<OracleCase> {
    let mut cases = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..48 {
        let n = rng.gen_range(1..=100);
        let w = rng.gen_range(8..=64);
        let h = rng.gen_range(8..=64);
        let scale = [0.3, 1.0, 2.5][i % 3];
        let spread = rng.gen_range(1.0..6.0);
        let scene = random_scene(&mut rng, n, spread, scale);
        let (dist, fov) = (rng.gen_range(15.0..60.0), rng.gen_range(0.3..1.2));
        let cam = orbit_camera(&mut rng, dist, fov, w, h);
        let mask = if i % 4 == 3 {
            GroupMask::from_bits(rng.gen_range(0..=GroupMask::ALL_BITS)).unwrap()
        } else {
            GroupMask::all()
        };
        let tile = [16, 8, 5, 64][i % 4];
        cases.push(OracleCase { name: format!("random-{i} n={n} {w}x{h}"), scene, cam, mask, config: with_tile(tile) });
    }

    // Heavy overlap: everything stacked near the image centre, opaque
    // enough that most pixels terminate early.
    let mut scene = random_scene(&mut rng, 100, 0.3, 1.5);
    for g in &mut scene.gaussians {
        g.opacity_raw = rng.gen_range(1.0..6.0);
    }
    let cam = Camera::look_at([0.0, 0.0, -25.0], [0.0; 3], [0.0, -1.0, 0.0], 0.6, 64, 64).unwrap();
    cases.push(OracleCase { name: "overlap".into(), scene, cam, mask: GroupMask::all(), config: with_tile(16) });

    // Depth ties: identical geometry, different colours, so order is
    // decided by primitive index alone.
    let mut base = random_gaussian(&mut rng, 1.0);
    base.mu_p = [0.0; 3];
    base.opacity_raw = 0.5;
    let gaussians: Vec<_> = (0..40)
        .map(|i| {
            let mut g = base;
            g.sh = std::array::from_fn(|k| ((i * 7 + k * 3) % 11) as f64 * 0.1 - 0.5);
            g
        })
        .collect();
    let scene = Scene::new(gaussians, unit_geometry(), CovScale { spatial: 1.5, directional: 1.0 });
    let cam = Camera::look_at([3.0, -2.0, -20.0], [0.0; 3], [0.0, -1.0, 0.0], 0.5, 40, 36).unwrap();
    cases.push(OracleCase { name: "depth-ties".into(), scene, cam, mask: GroupMask::all(), config: with_tile(16) });

    // Partial culling: primitives behind the camera, past the far plane,
    // straddling the near plane, centred just off screen and too faint.
    let cam = Camera::look_at([0.0, 0.0, -30.0], [0.0; 3], [0.0, -1.0, 0.0], 0.7, 48, 40)
        .unwrap()
        .with_clip(2.0, 55.0)
        .unwrap();
    let mut gaussians = Vec::new();
    for i in 0..100 {
        let mut g = random_gaussian(&mut rng, 3.0);
        g.cov_raw[..3].fill(rng.gen_range(0.0..1.0));
        match i % 6 {
            0 => g.mu_p[2] = rng.gen_range(-45.0..-30.5),
            1 => g.mu_p[2] = rng.gen_range(24.0..40.0),
            2 => g.mu_p[2] = rng.gen_range(-28.5..-27.5),
            3 => {
                let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                g.mu_p[rng.gen_range(0..2)] = side * rng.gen_range(9.0..16.0);
            }
            4 => g.opacity_raw = rng.gen_range(-9.0..-4.0),
            _ => {}
        }
        gaussians.push(g);
    }
    let scene = Scene::new(gaussians, unit_geometry(), CovScale { spatial: 1.5, directional: 1.0 });
    for tile in [16, 7] {
        cases.push(OracleCase {
            name: format!("partial-culling tile={tile}"),
            scene: scene.clone(),
            cam,
            mask: GroupMask::all(),
            config: with_tile(tile),
        });
    }
    cases
}

/// Tile renderer against the brute-force oracle; `Err` describes the first
/// differing pixel.
pub fn run_oracle_case(case: &OracleCase) -> Result<RenderedImage<f64>, String> {
    let renderer = Renderer::new(&case.scene, case.config);
    let proj = renderer.project(&case.cam, case.mask).map_err(|e| e.to_string())?;
    let (img, _) = composite(&proj);
    let splats = oracle_splats(&case.scene, &case.cam, &case.config, case.mask);
    let want = brute_force_composite(&splats, case.cam.width, case.cam.height);
    for (i, (a, b)) in img.data.iter().zip(&want.data).enumerate() {
        if a.to_bits() != b.to_bits() {
            let px = i / 4;
            return Err(format!(
                "{}: pixel ({}, {}) channel {}: tiled {a:e} oracle {b:e}",
                case.name,
                px % case.cam.width,
                px / case.cam.width,
                i % 4
            ));
        }
    }
    Ok(img)
}

// --------------------------------------------------------------- gradients

/// The random-scene family used for the gradient acceptance check.
pub fn gradient_problem(seed: u64) -> GradProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=10);
    let size = rng.gen_range(24..=32);
    let scene = random_scene(&mut rng, n, 3.0, 1.0);
    let cam = orbit_camera(&mut rng, 30.0, 0.5, size, size);
    let gt = random_image(&mut rng, size, size);
    GradProblem {
        scene,
        cam,
        gt,
        bg: [0.2, 0.1, 0.4],
        loss: LossConfig::default(),
        render: RenderConfig::default(),
    }
}

// ------------------------------------------------------- phantom fine-tune

pub struct PhantomExperiment {
    pub scene: Scene<f32>,
    pub truth: Scene<f32>,
    pub train: Vec<View<f32>>,
    pub held_out: Vec<View<f32>>,
    pub background: [f32; 3],
}

/// Per-group shifts of colour and opacity plus a smooth spatial wave, the
/// kind of systematic appearance error a prior makes.
pub fn perturb_appearance(scene: &Scene<f32>, amp: f32, seed: u64) -> Scene<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<[f32; 4]> = (0..12).map(|_| std::array::from_fn(|_| rng.gen_range(-amp..amp))).collect();
    let mut out = scene.clone();
    for g in &mut out.gaussians {
        let s = shift[g.label as usize];
        let wave = (g.mu_p[0] * 0.05).sin() * (g.mu_p[2] * 0.04).cos();
        for c in 0..3 {
            g.sh[c] += s[c] + 0.5 * amp * wave;
        }
        g.opacity_raw += s[3] + amp * wave;
    }
    out
}

/// Camera `i` of `n` on a tilted ring around the origin.
pub fn ring_camera(i: usize, n: usize, offset: f64, dist: f64, res: usize) -> Camera<f32> {
    let a = std::f64::consts::TAU * (i as f64 + offset) / n as f64;
    let e = 0.35 * (a * 1.7).sin();
    let pos = [dist * e.cos() * a.sin(), dist * e.sin(), dist * e.cos() * a.cos()].map(|x| x as f32);
    Camera::look_at(pos, [0.0; 3], [0.0, 1.0, 0.0], 0.5, res, res).unwrap()
}

pub fn phantom_experiment(size: usize, res: usize, amp: f32, seed: u64) -> PhantomExperiment {
    let cfg = PhantomConfig { size, spacing: 128.0 / size as f64 };
    let (hu, raw) = ct_phantom::<f32>(&cfg).unwrap();
    let pre = preprocess(&hu, &raw, &TfSet::seen(), None).unwrap();
    let scene = agp_initialize(&pre.input, &pre.labels, &AgpConfig::default()).unwrap();
    let truth = perturb_appearance(&scene, amp, seed);
    let renderer = Renderer::new(&truth, RenderConfig::default());
    let background = [0.0f32; 3];
    let view = |camera: Camera<f32>| View {
        image: renderer.render(&camera, GroupMask::all()).unwrap().over(background),
        camera,
    };
    let train = (0..8).map(|i| view(ring_camera(i, 8, 0.0, 320.0, res))).collect();
    let held_out = (0..4).map(|i| view(ring_camera(i, 4, 0.37, 320.0, res))).collect();
    PhantomExperiment { scene, truth, train, held_out, background }
}

/// Mean combined loss of `scene` over `views`.
pub fn mean_view_loss(scene: &Scene<f32>, views: &[View<f32>], bg: [f32; 3]) -> f64 {
    let r = Renderer::new(scene, RenderConfig::default());
    let total: f64 = views
        .iter()
        .map(|v| {
            let img = r.render(&v.camera, GroupMask::all()).unwrap().over(bg);
            loss(&img, &v.image, &LossConfig::default()).unwrap().0.total
        })
        .sum();
    total / views.len() as f64
}
