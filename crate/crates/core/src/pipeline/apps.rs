use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::raster::{normalize_observed, ImageBuffer};

use super::{smooth_arm, Arm, PipelineConfig};

const REC709: [f64; 3] = [0.2126, 0.7152, 0.0722];

/// Rec. 709 luminance; a gray image is its own luminance.
pub fn luminance(img: &ImageBuffer) -> ImageBuffer {
    if img.channels() == 1 {
        return img.clone();
    }
    let n = img.plane_len();
    let data = (0..n)
        .map(|p| (0..3).map(|c| REC709[c] * img.plane(c)[p]).sum())
        .collect();
    ImageBuffer::from_gray(img.width(), img.height(), data).expect("plane-sized buffer")
}

/// Intermediate layers of the tone mapper, all in log10 units.
#[derive(Clone, Debug)]
pub struct ToneMapLayers {
    pub log_lum: ImageBuffer,
    pub base: ImageBuffer,
    pub detail: ImageBuffer,
    /// Compressed log luminance `cf·base + detail − cf·max(base)`.
    pub compressed: ImageBuffer,
    pub compression: f64,
}

/// Base/detail decomposition of log luminance with the base layer smoothed
/// by the chosen arm.
pub fn tone_map_layers(hdr: &ImageBuffer, cfg: &PipelineConfig, arm: Arm) -> Result<ToneMapLayers> {
    cfg.tone_map.validate()?;
    let lum = luminance(hdr);
    let (_, lmax) = lum.min_max();
    if lmax.is_nan() || lmax <= 0.0 || !lmax.is_finite() {
        return Err(Error::NonPositiveLuminance);
    }
    let floor = 1e-6 * lmax;
    let log_lum = lum.map(|v| v.max(floor).log10());
    let (lo, hi) = log_lum.min_max();
    let base = if hi - lo < 1e-12 {
        log_lum.clone()
    } else {
        let (norm, st) = normalize_observed(&log_lum)?;
        smooth_arm(&norm, cfg, arm)?.map(|v| st.inverse(v))
    };
    let detail = log_lum.zip_map(&base, |l, b| l - b)?;
    let (bmin, bmax) = base.min_max();
    let compression = if bmax - bmin < 1e-12 {
        1.0
    } else {
        cfg.tone_map.target_base_contrast / (bmax - bmin)
    };
    let compressed = base.zip_map(&detail, |b, d| compression * (b - bmax) + d)?;
    Ok(ToneMapLayers {
        log_lum,
        base,
        detail,
        compressed,
        compression,
    })
}

/// Tone maps a positive HDR image to `[0, 1]` with piecewise-linear base
/// smoothing.
pub fn tone_map(hdr: &ImageBuffer, cfg: &PipelineConfig) -> Result<ImageBuffer> {
    tone_map_arm(hdr, cfg, Arm::Pl)
}

pub fn tone_map_arm(hdr: &ImageBuffer, cfg: &PipelineConfig, arm: Arm) -> Result<ImageBuffer> {
    let layers = tone_map_layers(hdr, cfg, arm)?;
    let lum = luminance(hdr);
    let (_, lmax) = lum.min_max();
    let floor = 1e-6 * lmax;
    let s = cfg.tone_map.saturation;
    let mut out = hdr.zeros_like();
    for c in 0..hdr.channels() {
        let src = hdr.plane(c);
        let dst = out.plane_mut(c);
        for p in 0..dst.len() {
            let l = lum.data()[p].max(floor);
            let ratio = (src[p].max(0.0) / l).powf(s);
            dst[p] = ratio * 10f64.powf(layers.compressed.data()[p]);
        }
    }
    let (lo, hi) = out.min_max();
    let out = if hi - lo < 1e-12 {
        out.map(|_| 1.0)
    } else {
        out.map(|v| (v - lo) / (hi - lo))
    };
    out.with_range(crate::raster::ValueRange::UNIT)
}

/// Denoises `noflash` by piecewise-linear smoothing whose gradient filters
/// are guided by the gradients of `flash`.
pub fn flash_noflash(
    noflash: &ImageBuffer,
    flash: &ImageBuffer,
    filter: &FilterSpec,
    beta: f64,
) -> Result<ImageBuffer> {
    noflash.ensure_same_size(flash)?;
    let cfg = PipelineConfig::new(filter.clone(), beta).with_guide(flash.clone());
    super::pl_smooth(noflash, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::test_support::random_image;
    use crate::filters::FilterKind;
    use crate::pipeline::{app_params, psnr, Application};

    fn tm_cfg() -> PipelineConfig {
        let p = app_params(FilterKind::Bilateral, Application::ToneMap);
        PipelineConfig::new(p.pl, p.beta)
    }

    #[test]
    fn constant_luminance_is_constant() {
        let hdr = ImageBuffer::filled(16, 12, 3, 40.0);
        let out = tone_map(&hdr, &tm_cfg()).unwrap();
        let (lo, hi) = out.min_max();
        assert_eq!(lo, hi);
    }

    #[test]
    fn output_in_unit_range() {
        for seed in 0..3 {
            let hdr = random_image(20, 16, 3, seed).map(|v| 10f64.powf(4.0 * v - 1.0));
            let out = tone_map(&hdr, &tm_cfg()).unwrap();
            let (lo, hi) = out.min_max();
            assert!(lo >= 0.0 && hi <= 1.0);
        }
    }

    #[test]
    fn black_image_rejected() {
        let hdr = ImageBuffer::filled(4, 4, 3, 0.0);
        assert!(matches!(tone_map(&hdr, &tm_cfg()), Err(Error::NonPositiveLuminance)));
    }

    #[test]
    fn two_region_detail_amplitude_preserved() {
        // luminance 1 on the left, 1000 on the right, same multiplicative texture
        let (w, h) = (128, 48);
        let tex = |x: usize, y: usize| 0.05 * ((x as f64) * 0.8).sin() * ((y as f64) * 0.8).cos();
        let hdr = ImageBuffer::from_fn(w, h, 1, |x, y, _| {
            let base: f64 = if x < w / 2 { 0.0 } else { 3.0 };
            10f64.powf(base + tex(x, y))
        });
        let layers = tone_map_layers(&hdr, &tm_cfg(), Arm::Pl).unwrap();
        let amplitude = |x0: usize, x1: usize| {
            let mut m: f64 = 0.0;
            for y in 8..h - 8 {
                for x in x0..x1 {
                    let mean: f64 = (x - 2..=x + 2).map(|q| layers.compressed.get(q, y, 0)).sum::<f64>() / 5.0;
                    m = m.max((layers.compressed.get(x, y, 0) - mean).abs());
                }
            }
            m
        };
        let (left, right) = (amplitude(16, 48), amplitude(80, 112));
        assert!((left - right).abs() <= 0.1 * left.max(right), "{left} vs {right}");
    }

    #[test]
    fn flash_denoising_improves_psnr() {
        let (clean, noisy) = crate::pipeline::flash_scene(64, 64, 3);
        let p = app_params(FilterKind::Bilateral, Application::Flash);
        let out = flash_noflash(&noisy, &clean, &p.pl, p.beta).unwrap();
        let gain = psnr(&clean, &out).unwrap() - psnr(&clean, &noisy).unwrap();
        assert!(gain >= 6.0, "gain {gain}");
    }

    #[test]
    fn constant_noflash_stays_constant() {
        let noflash = ImageBuffer::filled(20, 20, 1, 0.4);
        let flash = random_image(20, 20, 1, 9);
        let out = flash_noflash(&noflash, &flash, &FilterSpec::bilateral(4.0, 0.01), 128.0).unwrap();
        assert!(out.max_abs_diff(&noflash) < 1e-12);
    }
}
