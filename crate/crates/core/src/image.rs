//! Framebuffers and PNG encoding.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::io::BufWriter;
use std::path::Path;

/// Rendered RGBA, premultiplied by coverage, row-major, 4 values per
/// pixel. The background is transparent black.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderedImage<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Real> RenderedImage<T> {
    pub fn transparent(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::zero(); 4 * width * height],
        }
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [T; 4] {
        let i = 4 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2], self.data[i + 3]]
    }

    /// `C + (1 − A)·bg` per pixel.
    pub fn over(&self, bg: [T; 3]) -> RgbImage<T> {
        let mut data = Vec::with_capacity(3 * self.width * self.height);
        for px in self.data.chunks_exact(4) {
            let t = T::one() - px[3];
            data.extend((0..3).map(|c| px[c] + t * bg[c]));
        }
        RgbImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// 8-bit RGBA. With a background the result is opaque; without one the
    /// colour is un-premultiplied so that viewers composite it correctly.
    pub fn to_rgba8(&self, bg: Option<[T; 3]>) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len());
        for px in self.data.chunks_exact(4) {
            let a = px[3];
            match bg {
                Some(bg) => {
                    let t = T::one() - a;
                    out.extend((0..3).map(|c| quantize(px[c] + t * bg[c])));
                    out.push(255);
                }
                None if a > T::zero() => {
                    out.extend((0..3).map(|c| quantize(px[c] / a)));
                    out.push(quantize(a));
                }
                None => out.extend([0, 0, 0, 0]),
            }
        }
        out
    }

    pub fn cast<U: Real>(&self) -> RenderedImage<U> {
        RenderedImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|x| U::lit(x.as_f64())).collect(),
        }
    }
}

/// `round(clamp(x, 0, 1) · 255)`
#[inline]
pub fn quantize<T: Real>(x: T) -> u8 {
    (x.as_f64().clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Opaque RGB image, row-major, 3 values per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Real> RgbImage<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != 3 * width * height {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height} RGB image needs {} values, got {}",
                3 * width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [T; 3]) -> Self {
        Self {
            width,
            height,
            data: (0..width * height).flat_map(|_| rgb).collect(),
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, c: usize) -> T {
        self.data[3 * (y * self.width + x) + c]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn cast<U: Real>(&self) -> RgbImage<U> {
        RgbImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|x| U::lit(x.as_f64())).collect(),
        }
    }

    pub fn to_rgba8(&self) -> Vec<u8> {
        self.data
            .chunks_exact(3)
            .flat_map(|p| [quantize(p[0]), quantize(p[1]), quantize(p[2]), 255])
            .collect()
    }
}

pub fn encode_png(width: usize, height: usize, rgba8: &[u8]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, width as u32, height as u32);
        enc.set_color(png::ColorType::Rgba);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(|e| Error::Png(e.to_string()))?;
        w.write_image_data(rgba8).map_err(|e| Error::Png(e.to_string()))?;
    }
    Ok(buf)
}

pub fn write_png(path: impl AsRef<Path>, width: usize, height: usize, rgba8: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(width, height, rgba8)?;
    let f = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(f);
    std::io::Write::write_all(&mut w, &bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Decodes an 8-bit PNG and composites any alpha over `bg`.
pub fn read_png_rgb<T: Real>(path: impl AsRef<Path>, bg: [T; 3]) -> Result<RgbImage<T>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut dec = png::Decoder::new(std::io::BufReader::new(f));
    dec.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = dec.read_info().map_err(|e| Error::Png(format!("{}: {e}", path.display())))?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Png(format!("{}: {e}", path.display())))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let channels = info.color_type.samples();
    let to = |b: u8| T::lit(b as f64 / 255.0);
    let mut data = Vec::with_capacity(3 * w * h);
    for px in buf[..info.buffer_size()].chunks_exact(channels) {
        let (rgb, a) = match channels {
            1 => ([px[0]; 3], 255),
            2 => ([px[0]; 3], px[1]),
            3 => ([px[0], px[1], px[2]], 255),
            _ => ([px[0], px[1], px[2]], px[3]),
        };
        let a = to(a);
        data.extend((0..3).map(|c| to(rgb[c]) * a + (T::one() - a) * bg[c]));
    }
    RgbImage::new(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_alpha_and_background() {
        let img = RenderedImage {
            width: 2,
            height: 1,
            data: vec![0.45, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0],
        };
        assert_eq!(img.to_rgba8(None), vec![230, 0, 0, 128, 0, 0, 0, 0]);
        assert_eq!(img.to_rgba8(Some([0.0, 0.0, 1.0])), vec![115, 0, 128, 255, 0, 0, 255, 255]);
        let rgb = img.over([1.0, 1.0, 1.0]);
        assert_eq!(rgb.data, vec![0.95, 0.5, 0.5, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let px = vec![10, 20, 30, 255, 255, 0, 0, 0];
        write_png(&path, 2, 1, &px).unwrap();
        let img: RgbImage<f64> = read_png_rgb(&path, [0.0, 1.0, 0.0]).unwrap();
        assert_eq!(img.width, 2);
        assert!((img.at(0, 0, 2) - 30.0 / 255.0).abs() < 1e-12);
        assert_eq!([img.at(1, 0, 0), img.at(1, 0, 1)], [0.0, 1.0]);
    }
}
