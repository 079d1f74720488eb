//! Two-step piecewise-linear smoothing: filter the normalized gradient
//! fields with a piecewise-constant filter, then reconstruct the image whose
//! gradients best match them while staying close to the input.

mod apps;
mod defaults;
mod metrics;
mod study;
mod synthetic;

pub use apps::{flash_noflash, luminance, tone_map, tone_map_arm, tone_map_layers, ToneMapLayers};
pub use defaults::{app_params, AppParams, Application};
pub use metrics::{gradient_reversal_count, psnr, ReversalReport, DEFAULT_TAU};
pub use study::{
    beta_study, param_label, quantization_study, reversal_study, write_csv, QuantRow, StudyRow, REFERENCE_BINS,
};
pub use synthetic::{fig2_signal, flash_scene, hdr_ramp_texture, FIG2_LEN};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::raster::{denormalize, forward_gradient, normalize_with, GradientField, ImageBuffer, NormState};
use crate::reconstruct::{reconstruct, ReconstructionConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct ToneMapConfig {
    /// Allowed base-layer range after compression, in log10 units.
    pub target_base_contrast: f64,
    /// Color saturation exponent in (0, 1].
    pub saturation: f64,
}

impl Default for ToneMapConfig {
    fn default() -> Self {
        ToneMapConfig {
            target_base_contrast: 5f64.log10(),
            saturation: 0.6,
        }
    }
}

impl ToneMapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_base_contrast.is_finite() && self.target_base_contrast > 0.0) {
            return Err(Error::invalid(
                "target_base_contrast",
                format!("must be > 0, got {}", self.target_base_contrast),
            ));
        }
        if !(self.saturation > 0.0 && self.saturation <= 1.0) {
            return Err(Error::invalid(
                "saturation",
                format!("must be in (0, 1], got {}", self.saturation),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub filter: FilterSpec,
    pub beta: f64,
    /// Joint mode: gradients of this image guide the gradient filters.
    pub guide: Option<ImageBuffer>,
    pub k: f64,
    pub tone_map: ToneMapConfig,
}

impl PipelineConfig {
    pub fn new(filter: FilterSpec, beta: f64) -> Self {
        PipelineConfig {
            filter,
            beta,
            guide: None,
            k: 5.0,
            tone_map: ToneMapConfig::default(),
        }
    }

    pub fn with_guide(mut self, guide: ImageBuffer) -> Self {
        self.guide = Some(guide);
        self
    }

    pub fn validate(&self, input: &ImageBuffer) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::invalid("beta", format!("must be >= 0, got {}", self.beta)));
        }
        if !self.k.is_finite() {
            return Err(Error::invalid("k", "must be finite"));
        }
        self.filter.validate()?;
        self.tone_map.validate()?;
        if let Some(g) = &self.guide {
            input.ensure_same_size(g)?;
        }
        Ok(())
    }
}

/// Classical smoothing of intensities.
pub fn pc_smooth(i0: &ImageBuffer, filter: &FilterSpec, guide: Option<&ImageBuffer>) -> Result<ImageBuffer> {
    filter.apply(i0, guide)
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// Filters one gradient channel on the part of the grid where the forward
/// difference is defined (the last column of `gx` / last row of `gy` are
/// boundary zeros, not data) and pads the result back with zeros.
fn filter_gradient(
    g: &ImageBuffer,
    guide: Option<&ImageBuffer>,
    axis: Axis,
    filter: &FilterSpec,
) -> Result<ImageBuffer> {
    let (w, h, _) = g.dims();
    let (vw, vh) = match axis {
        Axis::X => (w.saturating_sub(1), h),
        Axis::Y => (w, h.saturating_sub(1)),
    };
    let mut out = g.zeros_like();
    if vw == 0 || vh == 0 {
        return Ok(out);
    }
    let src = normalize_with(&g.crop(0, 0, vw, vh)?, NormState::GRADIENT);
    let guide = guide
        .map(|gd| gd.crop(0, 0, vw, vh).map(|c| normalize_with(&c, NormState::GRADIENT)))
        .transpose()?;
    let filtered = filter.apply(&src, guide.as_ref())?;
    out.paste(&denormalize(&filtered, NormState::GRADIENT), 0, 0)?;
    Ok(out)
}

/// Filtered gradient field of step 1. Each color channel of each axis is
/// filtered independently; in joint mode the guide for a channel is the
/// matching gradient channel of `guide` (its only channel if gray).
pub fn filter_gradients(i0: &ImageBuffer, filter: &FilterSpec, guide: Option<&ImageBuffer>) -> Result<GradientField> {
    filter.validate()?;
    if let Some(gd) = guide {
        i0.ensure_same_size(gd)?;
    }
    let g = forward_gradient(i0);
    let gg = guide.map(forward_gradient);
    let nc = i0.channels();
    let jobs: Vec<(Axis, usize)> = (0..nc).flat_map(|c| [(Axis::X, c), (Axis::Y, c)]).collect();
    let planes: Vec<Result<ImageBuffer>> = jobs
        .par_iter()
        .map(|&(axis, c)| {
            let (field, guide_field) = match axis {
                Axis::X => (&g.gx, gg.as_ref().map(|f| &f.gx)),
                Axis::Y => (&g.gy, gg.as_ref().map(|f| &f.gy)),
            };
            let guide_plane = guide_field.map(|f| f.channel(c.min(f.channels() - 1)));
            filter_gradient(&field.channel(c), guide_plane.as_ref(), axis, filter)
        })
        .collect();
    let mut gx = Vec::with_capacity(nc);
    let mut gy = Vec::with_capacity(nc);
    for (i, p) in planes.into_iter().enumerate() {
        if i % 2 == 0 {
            gx.push(p?);
        } else {
            gy.push(p?);
        }
    }
    let (w, h) = (i0.width(), i0.height());
    let merge = |planes: Vec<ImageBuffer>| -> Result<ImageBuffer> {
        let data: Vec<f64> = planes.into_iter().flat_map(|p| p.into_data()).collect();
        ImageBuffer::new(w, h, nc, data, g.gx.declared_range())
    };
    GradientField::new(merge(gx)?, merge(gy)?)
}

/// Piecewise-linear smoothing: filtered gradients, then reconstruction.
pub fn pl_smooth(i0: &ImageBuffer, cfg: &PipelineConfig) -> Result<ImageBuffer> {
    cfg.validate(i0)?;
    let g = filter_gradients(i0, &cfg.filter, cfg.guide.as_ref())?;
    reconstruct(i0, &g, &ReconstructionConfig::with_beta(cfg.beta))
}

/// Control arm: smooth intensities with the classical filter, then
/// reconstruct from the smoothed image's gradients.
pub fn pc_smooth_then_reconstruct(i0: &ImageBuffer, filter: &FilterSpec, beta: f64) -> Result<ImageBuffer> {
    let smoothed = pc_smooth(i0, filter, None)?;
    let g = forward_gradient(&smoothed);
    reconstruct(i0, &g, &ReconstructionConfig::with_beta(beta))
}

/// Which smoothing a pipeline run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arm {
    /// Classical filter on intensities.
    Pc,
    /// Filtered gradients plus reconstruction.
    Pl,
    /// Classical filter, then reconstruction from its gradients.
    Control,
}

impl Arm {
    pub const ALL: [Arm; 3] = [Arm::Pc, Arm::Pl, Arm::Control];

    pub fn name(self) -> &'static str {
        match self {
            Arm::Pc => "pc",
            Arm::Pl => "pl",
            Arm::Control => "control",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Arm::ALL.into_iter().find(|a| a.name() == s)
    }
}

/// Smooths `i0` with `cfg.filter` in the given arm. The guide is used by the
/// classical and piecewise-linear arms.
pub fn smooth_arm(i0: &ImageBuffer, cfg: &PipelineConfig, arm: Arm) -> Result<ImageBuffer> {
    match arm {
        Arm::Pc => pc_smooth(i0, &cfg.filter, cfg.guide.as_ref()),
        Arm::Pl => pl_smooth(i0, cfg),
        Arm::Control => pc_smooth_then_reconstruct(i0, &cfg.filter, cfg.beta),
    }
}

/// `i0 + k (i0 − smoothed)`, unclamped.
pub fn detail_enhance(i0: &ImageBuffer, smoothed: &ImageBuffer, k: f64) -> Result<ImageBuffer> {
    i0.zip_map(smoothed, |a, s| a + k * (a - s))
}
