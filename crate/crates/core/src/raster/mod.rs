//! Planar floating-point rasters, forward-difference gradients and their
//! adjoint, range normalization, and PNG/PFM file I/O.

mod gradient;
mod io;
mod norm;

pub(crate) use gradient::check_field;
pub use gradient::{divergence_adjoint, forward_gradient, GradientField};
pub use io::{load_image, save_image, ImageKind};
pub use norm::{denormalize, normalize_observed, normalize_unit, normalize_with, NormState};

use crate::error::{Error, Result};

/// Nominal value interval of an image's contents. `lo < hi` always.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueRange {
    pub lo: f64,
    pub hi: f64,
}

impl ValueRange {
    pub const UNIT: ValueRange = ValueRange { lo: 0.0, hi: 1.0 };
    pub const SIGNED_UNIT: ValueRange = ValueRange { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidBuffer(format!(
                "declared range ({lo}, {hi}) must satisfy lo < hi"
            )));
        }
        Ok(ValueRange { lo, hi })
    }

    /// Builds a range from observed extrema, widening a collapsed interval
    /// so that `lo < hi` still holds.
    pub fn widened(lo: f64, hi: f64) -> Self {
        if hi > lo {
            return ValueRange { lo, hi };
        }
        let eps = 1e-6 * lo.abs().max(1.0);
        ValueRange { lo, hi: lo + eps }
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Planar raster of `f64` samples: channel `c` occupies
/// `data[c*w*h .. (c+1)*w*h]`, each plane row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
    range: ValueRange,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>, range: ValueRange) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidBuffer(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidBuffer(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidBuffer(format!(
                "data length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidBuffer(format!("non-finite sample at index {i}")));
        }
        ValueRange::new(range.lo, range.hi)?;
        Ok(ImageBuffer {
            width,
            height,
            channels,
            data,
            range,
        })
    }

    /// Single-channel image with the unit declared range.
    pub fn from_gray(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(width, height, 1, data, ValueRange::UNIT)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
            ValueRange::UNIT,
        )
        .expect("filled buffer parameters must be valid")
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data, ValueRange::UNIT).expect("from_fn produced an invalid buffer")
    }

    /// Stacks single-channel planes into one image (1 or 3 planes).
    pub fn from_planes(width: usize, height: usize, planes: Vec<Vec<f64>>, range: ValueRange) -> Result<Self> {
        let channels = planes.len();
        let data = planes.into_iter().flatten().collect();
        Self::new(width, height, channels, data, range)
    }

    pub fn zeros_like(&self) -> Self {
        ImageBuffer {
            data: vec![0.0; self.data.len()],
            ..self.clone()
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn plane_len(&self) -> usize {
        self.width * self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn declared_range(&self) -> ValueRange {
        self.range
    }

    pub fn with_range(mut self, range: ValueRange) -> Result<Self> {
        self.range = ValueRange::new(range.lo, range.hi)?;
        Ok(self)
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.plane_len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn planes(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.plane_len())
    }

    pub fn planes_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        let n = self.plane_len();
        self.data.chunks_exact_mut(n)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    /// Copy of channel `c` as a single-channel image.
    pub fn channel(&self, c: usize) -> ImageBuffer {
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.plane(c).to_vec(),
            range: self.range,
        }
    }

    pub fn same_dims(&self, other: &ImageBuffer) -> bool {
        self.dims() == other.dims()
    }

    pub fn ensure_same_dims(&self, other: &ImageBuffer) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            })
        }
    }

    /// Like [`ensure_same_dims`](Self::ensure_same_dims) but ignores channel count.
    pub fn ensure_same_size(&self, other: &ImageBuffer) -> Result<()> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            })
        }
    }

    /// Observed (min, max) over all samples.
    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImageBuffer {
        ImageBuffer {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Elementwise combination of two same-shaped images.
    pub fn zip_map(&self, other: &ImageBuffer, f: impl Fn(f64, f64) -> f64) -> Result<ImageBuffer> {
        self.ensure_same_dims(other)?;
        Ok(ImageBuffer {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            ..self.clone()
        })
    }

    /// Sub-rectangle `[x0, x0+w) x [y0, y0+h)` of every channel.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<ImageBuffer> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::InvalidBuffer(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h * self.channels);
        for plane in self.planes() {
            for y in y0..y0 + h {
                let row = &plane[y * self.width..(y + 1) * self.width];
                data.extend_from_slice(&row[x0..x0 + w]);
            }
        }
        ImageBuffer::new(w, h, self.channels, data, self.range)
    }

    /// Writes `src` into this image with its top-left corner at `(x0, y0)`.
    pub fn paste(&mut self, src: &ImageBuffer, x0: usize, y0: usize) -> Result<()> {
        if src.channels != self.channels || x0 + src.width > self.width || y0 + src.height > self.height {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: src.dims(),
            });
        }
        let (w, h) = (self.width, self.height);
        for c in 0..self.channels {
            let dst = &mut self.data[c * w * h..(c + 1) * w * h];
            let s = src.plane(c);
            for y in 0..src.height {
                let d0 = (y0 + y) * w + x0;
                dst[d0..d0 + src.width].copy_from_slice(&s[y * src.width..(y + 1) * src.width]);
            }
        }
        Ok(())
    }

    /// Sum of squared samples.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute elementwise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &ImageBuffer) -> f64 {
        assert_eq!(self.dims(), other.dims(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Replicates each row `rows` times (used to lift 1-D signals to strips).
    pub fn replicate_rows(&self, rows: usize) -> ImageBuffer {
        assert!(self.height == 1 && rows >= 1);
        let mut data = Vec::with_capacity(self.width * rows * self.channels);
        for plane in self.planes() {
            for _ in 0..rows {
                data.extend_from_slice(plane);
            }
        }
        ImageBuffer {
            width: self.width,
            height: rows,
            channels: self.channels,
            data,
            range: self.range,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(ImageBuffer::new(2, 2, 1, vec![0.0; 3], ValueRange::UNIT).is_err());
        assert!(ImageBuffer::new(0, 2, 1, vec![], ValueRange::UNIT).is_err());
        assert!(ImageBuffer::new(1, 1, 2, vec![0.0; 2], ValueRange::UNIT).is_err());
        assert!(ImageBuffer::new(1, 1, 1, vec![f64::NAN], ValueRange::UNIT).is_err());
        assert!(ImageBuffer::new(1, 1, 1, vec![0.0], ValueRange { lo: 1.0, hi: 1.0 }).is_err());
    }

    #[test]
    fn planar_indexing() {
        let img = ImageBuffer::from_fn(3, 2, 3, |x, y, c| (100 * c + 10 * y + x) as f64);
        assert_eq!(img.get(2, 1, 2), 212.0);
        assert_eq!(img.plane(1)[4], 111.0);
        assert_eq!(img.channel(2).get(0, 1, 0), 210.0);
    }

    #[test]
    fn crop_and_paste_invert() {
        let img = ImageBuffer::from_fn(5, 4, 1, |x, y, _| (x * 7 + y) as f64);
        let sub = img.crop(1, 1, 3, 2).unwrap();
        assert_eq!(sub.get(0, 0, 0), img.get(1, 1, 0));
        let mut blank = img.zeros_like();
        blank.paste(&sub, 1, 1).unwrap();
        assert_eq!(blank.get(3, 2, 0), img.get(3, 2, 0));
        assert_eq!(blank.get(0, 0, 0), 0.0);
    }

    #[test]
    fn widened_range_never_collapses() {
        let r = ValueRange::widened(3.5, 3.5);
        assert_eq!(r.lo, 3.5);
        assert!(r.hi > r.lo);
    }
}
