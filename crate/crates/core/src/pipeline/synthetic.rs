//! Deterministic synthetic inputs for the studies and benchmarks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::raster::{ImageBuffer, ValueRange};

pub const FIG2_LEN: usize = 512;

/// 1 x 512 scan line: a flat region, a ramp (slope 0.021) carrying an
/// oscillation of amplitude 0.02 and period 16, a 0.4 step down, and a
/// steep second ramp rising 0.3 over 8 pixels.
pub fn fig2_signal() -> ImageBuffer {
    let data = (0..FIG2_LEN).map(fig2_sample).collect();
    ImageBuffer::from_gray(FIG2_LEN, 1, data).expect("fixed-size signal")
}

fn fig2_sample(x: usize) -> f64 {
    const RAMP: f64 = 0.021;
    let t = x as f64;
    match x {
        0..=63 => 0.15,
        64..=95 => 0.15 + RAMP * (t - 64.0) + 0.02 * (2.0 * PI * (t - 64.0) / 16.0).sin(),
        96..=159 => 0.15 + 32.0 * RAMP,
        160..=239 => 0.15 + 32.0 * RAMP - 0.4,
        240..=247 => 0.15 + 32.0 * RAMP - 0.4 + 0.3 * (t - 240.0) / 8.0,
        _ => 0.15 + 32.0 * RAMP - 0.1,
    }
}

/// High-dynamic-range radiance: an exponential ramp spanning three decades
/// left to right, modulated by seeded smooth texture.
pub fn hdr_ramp_texture(w: usize, h: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(0.05..0.3),
                rng.random_range(0.05..0.3),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.05..0.15),
            )
        })
        .collect();
    let img = ImageBuffer::from_fn(w, h, 1, |x, y, _| {
        let ramp = 3.0 * x as f64 / (w.max(2) - 1) as f64;
        let tex: f64 = waves
            .iter()
            .map(|&(fx, fy, ph, a)| a * (fx * x as f64 + ph).sin() * (fy * y as f64).cos())
            .sum();
        10f64.powf(ramp + tex)
    });
    let (lo, hi) = img.min_max();
    img.with_range(ValueRange::widened(lo, hi)).expect("finite samples")
}

/// Clean RGB scene of flat shaded regions with hard and soft edges, and a
/// copy corrupted by Gaussian noise (σ = 0.05), clamped to `[0, 1]`.
pub fn flash_scene(w: usize, h: usize, seed: u64) -> (ImageBuffer, ImageBuffer) {
    let (fw, fh) = (w as f64, h as f64);
    let colors = [[0.25, 0.3, 0.35], [0.7, 0.55, 0.3], [0.35, 0.65, 0.5], [0.6, 0.35, 0.6]];
    let clean = ImageBuffer::from_fn(w, h, 3, |x, y, c| {
        let (u, v) = (x as f64 / fw, y as f64 / fh);
        let region = if ((u - 0.65).powi(2) + (v - 0.6).powi(2)).sqrt() < 0.22 {
            3
        } else if u < 0.4 && v < 0.5 {
            1
        } else if v > 0.75 {
            2
        } else {
            0
        };
        let shade = 0.08 * (u - 0.5) + 0.05 * (v - 0.5);
        // soft vertical edge inside the background
        let soft = 0.1 / (1.0 + (-(u - 0.85) * 60.0).exp());
        (colors[region][c] + shade + if region == 0 { soft } else { 0.0 }).clamp(0.0, 1.0)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05).expect("valid sigma");
    let mut noisy = clean.clone();
    for v in noisy.data_mut() {
        *v = (*v + noise.sample(&mut rng)).clamp(0.0, 1.0);
    }
    (clean, noisy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::forward_gradient;

    #[test]
    fn fig2_structure() {
        let s = fig2_signal();
        assert_eq!(s.dims(), (FIG2_LEN, 1, 1));
        let (lo, hi) = s.min_max();
        assert!(lo >= 0.0 && hi <= 1.0);
        assert!(forward_gradient(&s).gx.max_abs() >= 0.4);
        assert_eq!(fig2_signal(), s);
    }

    #[test]
    fn generators_deterministic() {
        assert_eq!(hdr_ramp_texture(32, 16, 4), hdr_ramp_texture(32, 16, 4));
        assert_ne!(hdr_ramp_texture(32, 16, 4), hdr_ramp_texture(32, 16, 5));
        let (a, b) = flash_scene(24, 24, 1);
        let (c, d) = flash_scene(24, 24, 1);
        assert_eq!((a, b), (c, d));
        let (lo, hi) = hdr_ramp_texture(64, 32, 1).min_max();
        assert!(lo > 0.0 && hi / lo > 100.0);
    }
}
