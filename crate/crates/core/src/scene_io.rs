//! Binary scene files.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "G6DS" | version u32 | count u64
//! dims 3×u32 | spacing 3×f64 | origin 3×f64 | direction 9×f64 (row-major)
//! cov scale spatial f64 | directional f64 | param layout version u32 | reserved u32
//! count × 168-byte records: 40×f32 parameters, label u8, 7 zero bytes
//! ```
//!
//! Parameters are stored in `f32`, so `f32` scenes round-trip bit-exactly.

use crate::agp::Scene;
use crate::error::{Error, Result};
use crate::gauss6d::{CovScale, Gaussian6D, NUM_GROUPS, PARAM_COUNT};
use crate::scalar::Real;
use crate::volume::VolumeGeometry;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"G6DS";
pub const FORMAT_VERSION: u32 = 1;
pub const RECORD_SIZE: usize = 168;
pub const HEADER_SIZE: usize = 16;
pub const META_SIZE: usize = 12 + 24 + 24 + 72 + 16 + 8;

pub fn encode_scene<T: Real>(scene: &Scene<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_SIZE + META_SIZE + scene.len() * RECORD_SIZE);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(scene.len() as u64).to_le_bytes());

    let g = &scene.geometry;
    for d in g.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for x in g.spacing.iter().chain(&g.origin).chain(g.direction.iter().flatten()) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&scene.cov_scale.spatial.as_f64().to_le_bytes());
    out.extend_from_slice(&scene.cov_scale.directional.as_f64().to_le_bytes());
    out.extend_from_slice(&scene.layout_version.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());

    for gauss in &scene.gaussians {
        for p in gauss.params() {
            out.extend_from_slice(&(p.as_f64() as f32).to_le_bytes());
        }
        out.push(gauss.label);
        out.extend_from_slice(&[0u8; RECORD_SIZE - 4 * PARAM_COUNT - 1]);
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::BadSceneFile(format!("truncated header at byte {}", self.pos)))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length"))
    }

    fn u32(&mut self) -> Result<u32> {
        self.take().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64> {
        self.take().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64> {
        self.take().map(f64::from_le_bytes)
    }
}

pub fn decode_scene<T: Real>(buf: &[u8]) -> Result<Scene<T>> {
    let mut c = Cursor { buf, pos: 0 };
    let magic: [u8; 4] = c.take()?;
    if magic != MAGIC {
        return Err(Error::BadSceneFile(format!("bad magic {magic:?}")));
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::BadSceneFile(format!(
            "format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let count = c.u64()?;

    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = c.u32()? as usize;
    }
    let mut spacing = [0.0; 3];
    let mut origin = [0.0; 3];
    let mut direction = [[0.0; 3]; 3];
    for x in spacing.iter_mut().chain(&mut origin).chain(direction.iter_mut().flatten()) {
        *x = c.f64()?;
    }
    let cov_scale = CovScale {
        spatial: T::lit(c.f64()?),
        directional: T::lit(c.f64()?),
    };
    let layout_version = c.u32()?;
    let _reserved = c.u32()?;

    let payload = &buf[c.pos..];
    let expected = count
        .checked_mul(RECORD_SIZE as u64)
        .ok_or_else(|| Error::BadSceneFile(format!("gaussian count {count} overflows")))?;
    if payload.len() as u64 != expected {
        return Err(Error::BadSceneFile(format!(
            "payload is {} bytes, header declares {count} records ({expected} bytes)",
            payload.len()
        )));
    }

    let mut gaussians = Vec::with_capacity(count as usize);
    for rec in payload.chunks_exact(RECORD_SIZE) {
        let mut p = [T::zero(); PARAM_COUNT];
        for (i, v) in p.iter_mut().enumerate() {
            let b: [u8; 4] = rec[4 * i..4 * i + 4].try_into().expect("4 bytes");
            *v = T::lit(f32::from_le_bytes(b) as f64);
        }
        let label = rec[4 * PARAM_COUNT];
        if label as usize >= NUM_GROUPS {
            return Err(Error::BadSceneFile(format!("label {label} outside 0..=11")));
        }
        let mut g = Gaussian6D {
            label,
            ..Default::default()
        };
        g.set_params(&p);
        gaussians.push(g);
    }

    Ok(Scene {
        gaussians,
        geometry: VolumeGeometry {
            dims,
            spacing,
            origin,
            direction,
        },
        cov_scale,
        layout_version,
    })
}

pub fn save_scene<T: Real>(path: impl AsRef<Path>, scene: &Scene<T>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    f.write_all(&encode_scene(scene))
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load_scene<T: Real>(path: impl AsRef<Path>) -> Result<Scene<T>> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode_scene(&buf)
}
