use super::GradientBuffer;
use crate::agp::Scene;
use crate::error::{Error, Result};
use crate::gauss6d::{param, PARAM_COUNT};
use crate::scalar::Real;
use std::io::{Read, Write};
use std::path::Path;

/// PolyLR exponent.
pub const POLY_POWER: f64 = 0.9;

/// `base_lr · (1 − step/total)^0.9`
pub fn polylr(step: u64, total: u64, base_lr: f64) -> Result<f64> {
    if total == 0 {
        return Err(Error::InvalidParameter("PolyLR needs total_steps > 0".into()));
    }
    let frac = (step.min(total) as f64) / total as f64;
    Ok(base_lr * (1.0 - frac).powf(POLY_POWER))
}

/// Learning-rate multipliers per parameter group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrMultipliers {
    pub mu_p: f64,
    pub mu_d: f64,
    pub cov: f64,
    pub sh: f64,
    pub opacity: f64,
}

impl Default for LrMultipliers {
    fn default() -> Self {
        Self {
            mu_p: 0.1,
            mu_d: 1.0,
            cov: 1.0,
            sh: 1.0,
            opacity: 1.0,
        }
    }
}

impl LrMultipliers {
    pub fn uniform() -> Self {
        Self {
            mu_p: 1.0,
            ..Default::default()
        }
    }

    pub fn per_param(&self) -> [f64; PARAM_COUNT] {
        std::array::from_fn(|i| {
            if param::MU_P.contains(&i) {
                self.mu_p
            } else if param::MU_D.contains(&i) {
                self.mu_d
            } else if param::COV.contains(&i) {
                self.cov
            } else if param::SH.contains(&i) {
                self.sh
            } else {
                self.opacity
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub lr_multipliers: LrMultipliers,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-15,
            lr_multipliers: LrMultipliers::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<T> {
    pub m: Vec<[T; PARAM_COUNT]>,
    pub v: Vec<[T; PARAM_COUNT]>,
    /// Updates applied so far.
    pub step: u64,
    pub base_lr: f64,
    pub total_steps: u64,
    /// Steps dropped because of non-finite gradients.
    pub skipped: u64,
    pub config: AdamConfig,
}

impl<T: Real> OptimizerState<T> {
    pub fn new(n: usize, base_lr: f64, total_steps: u64, config: AdamConfig) -> Self {
        Self {
            m: vec![[T::zero(); PARAM_COUNT]; n],
            v: vec![[T::zero(); PARAM_COUNT]; n],
            step: 0,
            base_lr,
            total_steps,
            skipped: 0,
            config,
        }
    }

    pub fn current_lr(&self) -> Result<f64> {
        polylr(self.step, self.total_steps, self.base_lr)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().chain(&self.v).flatten().all(|x| x.is_finite())
    }
}

/// One bias-corrected Adam update at the PolyLR rate of the current step.
/// A non-finite gradient skips the update (and the step counter) and
/// returns `Ok(false)`.
pub fn adam_step<T: Real>(state: &mut OptimizerState<T>, grads: &GradientBuffer<T>, scene: &mut Scene<T>) -> Result<bool> {
    if grads.len() != scene.len() || state.m.len() != scene.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} gradients, {} moment rows, {} primitives",
            grads.len(),
            state.m.len(),
            scene.len()
        )));
    }
    if !grads.is_finite() {
        state.skipped += 1;
        log::warn!("non-finite gradient at step {}; update skipped ({} so far)", state.step, state.skipped);
        return Ok(false);
    }
    let lr = state.current_lr()?;
    let cfg = state.config;
    let t = (state.step + 1) as i32;
    let (b1, b2) = (T::lit(cfg.beta1), T::lit(cfg.beta2));
    let bc1 = T::one() - T::lit(cfg.beta1.powi(t));
    let bc2 = T::one() - T::lit(cfg.beta2.powi(t));
    let eps = T::lit(cfg.eps);
    let rates = cfg.lr_multipliers.per_param().map(|k| T::lit(k * lr));
    for ((g, p), (m, v)) in grads
        .grads
        .iter()
        .zip(scene.gaussians.iter_mut())
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        let mut x = p.params();
        for i in 0..PARAM_COUNT {
            m[i] = b1 * m[i] + (T::one() - b1) * g[i];
            v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
            let mhat = m[i] / bc1;
            let vhat = v[i] / bc2;
            x[i] -= rates[i] * mhat / (vhat.sqrt() + eps);
        }
        p.set_params(&x);
    }
    state.step += 1;
    Ok(true)
}

const STATE_MAGIC: &[u8; 4] = b"G6DO";
const STATE_VERSION: u32 = 1;

/// Writes the optimizer sidecar of a fine-tuning checkpoint (little-endian
/// header, then `m` and `v` as `f64` rows).
pub fn save_optimizer_state<T: Real>(path: impl AsRef<Path>, s: &OptimizerState<T>) -> Result<()> {
    let path = path.as_ref();
    let mut b = Vec::new();
    b.extend_from_slice(STATE_MAGIC);
    b.extend_from_slice(&STATE_VERSION.to_le_bytes());
    b.extend_from_slice(&(s.m.len() as u64).to_le_bytes());
    for x in [s.step, s.total_steps, s.skipped] {
        b.extend_from_slice(&x.to_le_bytes());
    }
    let c = &s.config;
    let l = &c.lr_multipliers;
    for x in [s.base_lr, c.beta1, c.beta2, c.eps, l.mu_p, l.mu_d, l.cov, l.sh, l.opacity] {
        b.extend_from_slice(&x.to_le_bytes());
    }
    for row in s.m.iter().chain(&s.v) {
        for x in row {
            b.extend_from_slice(&x.as_f64().to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    f.write_all(&b).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load_optimizer_state<T: Real>(path: impl AsRef<Path>) -> Result<OptimizerState<T>> {
    let path = path.as_ref();
    let mut b = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut b))
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let bad = |m: &str| Error::Malformed {
        what: "optimizer state",
        path: path.to_path_buf(),
        msg: m.to_string(),
    };
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = b.get(pos..pos + n).ok_or_else(|| bad("truncated"))?;
        pos += n;
        Ok(s)
    };
    if take(4)? != STATE_MAGIC {
        return Err(bad("bad magic"));
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap());
    let u64_at = |s: &[u8]| u64::from_le_bytes(s.try_into().unwrap());
    let f64_at = |s: &[u8]| f64::from_le_bytes(s.try_into().unwrap());
    if u32_at(take(4)?) != STATE_VERSION {
        return Err(bad("unsupported version"));
    }
    let n = u64_at(take(8)?) as usize;
    let step = u64_at(take(8)?);
    let total_steps = u64_at(take(8)?);
    let skipped = u64_at(take(8)?);
    let mut r = [0.0; 9];
    for x in &mut r {
        *x = f64_at(take(8)?);
    }
    let need = n.checked_mul(2 * PARAM_COUNT * 8).ok_or_else(|| bad("row count overflow"))?;
    let payload = take(need)?;
    let mut rows = payload.chunks_exact(8 * PARAM_COUNT).map(|row| {
        let mut out = [T::zero(); PARAM_COUNT];
        for (o, c) in out.iter_mut().zip(row.chunks_exact(8)) {
            *o = T::lit(f64_at(c));
        }
        out
    });
    let m: Vec<_> = rows.by_ref().take(n).collect();
    let v: Vec<_> = rows.collect();
    if pos != b.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(OptimizerState {
        m,
        v,
        step,
        base_lr: r[0],
        total_steps,
        skipped,
        config: AdamConfig {
            beta1: r[1],
            beta2: r[2],
            eps: r[3],
            lr_multipliers: LrMultipliers {
                mu_p: r[4],
                mu_d: r[5],
                cov: r[6],
                sh: r[7],
                opacity: r[8],
            },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss6d::{CovScale, Gaussian6D};
    use crate::volume::VolumeGeometry;

    fn scene(n: usize) -> Scene<f64> {
        Scene::new(
            vec![Gaussian6D::default(); n],
            VolumeGeometry::new([1, 1, 1], [1.0; 3]),
            CovScale::unit(),
        )
    }

    #[test]
    fn polylr_values() {
        assert_eq!(polylr(0, 300, 1e-3).unwrap(), 1e-3);
        assert_eq!(polylr(300, 300, 1e-3).unwrap(), 0.0);
        assert!((polylr(150, 300, 1e-3).unwrap() - 5.358867e-4).abs() < 1e-9);
        assert!(polylr(0, 0, 1e-3).is_err());
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut s = scene(2);
        let before = s.clone();
        let mut st = OptimizerState::new(2, 1e-3, 10, AdamConfig::default());
        st.m[0][5] = 1.0;
        st.v[0][5] = 1.0;
        assert!(adam_step(&mut st, &GradientBuffer::zeros(2), &mut s).unwrap());
        assert_eq!(st.m[0][5], 0.9);
        assert!((st.v[0][5] - 0.999).abs() < 1e-15);
        // non-zero moments still move the parameter
        assert_ne!(s.gaussians[0].mu_d[2], before.gaussians[0].mu_d[2]);
        assert_eq!(s.gaussians[1], before.gaussians[1]);
    }

    #[test]
    fn first_step_opposes_gradient_sign() {
        let mut s = scene(1);
        let mut st = OptimizerState::new(1, 1e-2, 100, AdamConfig::default());
        let mut g = GradientBuffer::zeros(1);
        g.grads[0][param::OPACITY] = 3.0;
        g.grads[0][param::SH.start] = -0.25;
        adam_step(&mut st, &g, &mut s).unwrap();
        assert!((s.gaussians[0].opacity_raw + 1e-2).abs() < 1e-12);
        assert!((s.gaussians[0].sh[0] - 1e-2).abs() < 1e-12);
    }

    #[test]
    fn non_finite_gradient_is_skipped() {
        let mut s = scene(1);
        let before = s.clone();
        let mut st = OptimizerState::new(1, 1e-2, 100, AdamConfig::default());
        let mut g = GradientBuffer::zeros(1);
        g.grads[0][0] = f64::NAN;
        assert!(!adam_step(&mut st, &g, &mut s).unwrap());
        assert_eq!(s, before);
        assert_eq!((st.step, st.skipped), (0, 1));
    }

    #[test]
    fn state_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut st = OptimizerState::<f64>::new(3, 1e-3, 300, AdamConfig::default());
        st.m[1][7] = 0.5;
        st.v[2][39] = 1e-9;
        st.step = 12;
        let p = dir.path().join("opt.bin");
        save_optimizer_state(&p, &st).unwrap();
        assert_eq!(load_optimizer_state::<f64>(&p).unwrap(), st);
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
        assert!(load_optimizer_state::<f64>(&p).is_err());
    }
}
