use crate::error::Result;
use crate::raster::{forward_gradient, ImageBuffer};

pub const DEFAULT_TAU: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct ReversalReport {
    pub reversal_count: usize,
    /// Flat sample indices (`c * w * h + y * w + x`) of reversed
    /// differences, x-axis positions first, then y-axis.
    pub reversal_positions: Vec<usize>,
    pub tau: f64,
}

/// Forward differences where the input changes by more than `tau` and the
/// enhanced image changes in the opposite direction, counted per axis.
pub fn gradient_reversal_count(input: &ImageBuffer, enhanced: &ImageBuffer, tau: f64) -> Result<ReversalReport> {
    input.ensure_same_dims(enhanced)?;
    let (a, b) = (forward_gradient(input), forward_gradient(enhanced));
    let mut positions = Vec::new();
    for (ga, gb) in [(&a.gx, &b.gx), (&a.gy, &b.gy)] {
        for (i, (&u, &v)) in ga.data().iter().zip(gb.data()).enumerate() {
            if u.abs() > tau && v != 0.0 && v.signum() == -u.signum() {
                positions.push(i);
            }
        }
    }
    Ok(ReversalReport {
        reversal_count: positions.len(),
        reversal_positions: positions,
        tau,
    })
}

/// Peak signal-to-noise ratio for unit peak; infinite for identical images.
pub fn psnr(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    reference.ensure_same_dims(test)?;
    let mse = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { -10.0 * mse.log10() })
}
