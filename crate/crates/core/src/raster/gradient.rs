use super::{ImageBuffer, ValueRange};
use crate::error::{Error, Result};

/// Forward-difference gradients of an image with replicate boundary.
///
/// The last column of `gx` and the last row of `gy` are identically zero.
/// Downstream code treats those samples as structurally absent.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub gx: ImageBuffer,
    pub gy: ImageBuffer,
}

impl GradientField {
    pub fn new(gx: ImageBuffer, gy: ImageBuffer) -> Result<Self> {
        gx.ensure_same_dims(&gy)?;
        Ok(GradientField { gx, gy })
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        let z = ImageBuffer::filled(width, height, channels, 0.0)
            .with_range(ValueRange::SIGNED_UNIT)
            .expect("signed unit range is valid");
        GradientField { gx: z.clone(), gy: z }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.gx.dims()
    }

    /// Zeroes the structurally absent samples (last column of `gx`, last row
    /// of `gy`).
    pub fn enforce_boundary(&mut self) {
        let (w, h, _) = self.gx.dims();
        for plane in self.gx.planes_mut() {
            for y in 0..h {
                plane[y * w + w - 1] = 0.0;
            }
        }
        for plane in self.gy.planes_mut() {
            plane[(h - 1) * w..].fill(0.0);
        }
    }

    pub fn scale(&self, s: f64) -> GradientField {
        GradientField {
            gx: self.gx.map(|v| v * s),
            gy: self.gy.map(|v| v * s),
        }
    }

    pub fn inner(&self, other: &GradientField) -> f64 {
        dot(self.gx.data(), other.gx.data()) + dot(self.gy.data(), other.gy.data())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn forward_gradient(img: &ImageBuffer) -> GradientField {
    let (w, h, _) = img.dims();
    let mut gx = img.zeros_like();
    let mut gy = img.zeros_like();
    for (c, src) in img.planes().enumerate() {
        let px = gx.plane_mut(c);
        for y in 0..h {
            let row = &src[y * w..(y + 1) * w];
            let out = &mut px[y * w..(y + 1) * w];
            for x in 0..w - 1 {
                out[x] = row[x + 1] - row[x];
            }
        }
        let py = gy.plane_mut(c);
        for y in 0..h - 1 {
            for x in 0..w {
                py[y * w + x] = src[(y + 1) * w + x] - src[y * w + x];
            }
        }
    }
    let range = ValueRange::SIGNED_UNIT;
    GradientField {
        gx: gx.with_range(range).expect("valid"),
        gy: gy.with_range(range).expect("valid"),
    }
}

/// Transpose of [`forward_gradient`]: `<∇u, g> == <u, divergence_adjoint(g)>`.
///
/// Equals minus the backward-difference divergence. Samples of `g` that the
/// forward operator never produces (last column of `gx`, last row of `gy`)
/// are ignored.
pub fn divergence_adjoint(g: &GradientField) -> ImageBuffer {
    let (w, h, _) = g.dims();
    let mut out = g.gx.zeros_like();
    for c in 0..g.gx.channels() {
        let gx = g.gx.plane(c);
        let gy = g.gy.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..h {
            let base = y * w;
            for x in 0..w - 1 {
                let v = gx[base + x];
                dst[base + x] -= v;
                dst[base + x + 1] += v;
            }
        }
        for y in 0..h - 1 {
            for x in 0..w {
                let v = gy[y * w + x];
                dst[y * w + x] -= v;
                dst[(y + 1) * w + x] += v;
            }
        }
    }
    out
}

pub(crate) fn check_field(g: &GradientField, img: &ImageBuffer) -> Result<()> {
    if g.gx.dims() != img.dims() || g.gy.dims() != img.dims() {
        return Err(Error::DimensionMismatch {
            expected: img.dims(),
            found: g.gx.dims(),
        });
    }
    Ok(())
}
