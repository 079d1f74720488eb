use super::{ImageBuffer, ValueRange};
use crate::error::{Error, Result};

/// Affine map `x -> (x - offset) / scale` together with its inverse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormState {
    pub scale: f64,
    pub offset: f64,
}

impl NormState {
    /// Fixed map `[-1, 1] -> [0, 1]`, `g -> (g + 1) / 2`, used for every
    /// gradient field regardless of content.
    pub const GRADIENT: NormState = NormState {
        scale: 2.0,
        offset: -1.0,
    };

    pub fn for_range(range: ValueRange) -> Result<Self> {
        let span = range.hi - range.lo;
        if span.is_nan() || span < 1e-12 {
            return Err(Error::DegenerateRange {
                lo: range.lo,
                hi: range.hi,
            });
        }
        Ok(NormState {
            scale: span,
            offset: range.lo,
        })
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        (x - self.offset) / self.scale
    }

    #[inline]
    pub fn inverse(&self, x: f64) -> f64 {
        x * self.scale + self.offset
    }

    fn source_range(&self) -> ValueRange {
        ValueRange::widened(self.offset, self.offset + self.scale)
    }
}

/// Maps the image's declared range onto `[0, 1]`.
pub fn normalize_unit(img: &ImageBuffer) -> Result<(ImageBuffer, NormState)> {
    let st = NormState::for_range(img.declared_range())?;
    Ok((normalize_with(img, st), st))
}

/// Maps the image's observed `[min, max]` onto `[0, 1]`.
pub fn normalize_observed(img: &ImageBuffer) -> Result<(ImageBuffer, NormState)> {
    let (lo, hi) = img.min_max();
    let st = NormState::for_range(ValueRange { lo, hi })?;
    Ok((normalize_with(img, st), st))
}

pub fn normalize_with(img: &ImageBuffer, st: NormState) -> ImageBuffer {
    img.map(|v| st.forward(v))
        .with_range(ValueRange::UNIT)
        .expect("unit range is valid")
}

/// Exact inverse of [`normalize_with`]; no clamping.
pub fn denormalize(img: &ImageBuffer, st: NormState) -> ImageBuffer {
    img.map(|v| st.inverse(v))
        .with_range(st.source_range())
        .expect("source range is valid")
}
