//! Reproducibility studies emitting `filter,arm,param_set,beta,metric,value`
//! rows.

use std::io::Write;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::filters::{FilterKind, FilterSpec};
use crate::raster::ImageBuffer;
use crate::reconstruct::data_term;

use super::{
    app_params, detail_enhance, fig2_signal, gradient_reversal_count, psnr, smooth_arm, Application, Arm,
    PipelineConfig,
};

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub filter: String,
    pub arm: String,
    pub param_set: String,
    pub beta: Option<f64>,
    pub metric: String,
    pub value: f64,
}

/// Compact `key=value;...` description of a filter's parameters.
pub fn param_label(spec: &FilterSpec) -> String {
    match *spec {
        FilterSpec::Bilateral { sigma_s, sigma_r, fast } => {
            format!("sigma_s={sigma_s};sigma_r={sigma_r}{}", if fast { ";fast" } else { "" })
        }
        FilterSpec::DomainTransformNC {
            sigma_s,
            sigma_r,
            iterations,
        } => {
            format!("sigma_s={sigma_s};sigma_r={sigma_r};iterations={iterations}")
        }
        FilterSpec::WeightedMedian { radius, sigma_r, bins } => {
            format!("radius={radius};sigma_r={sigma_r};bins={bins}")
        }
        FilterSpec::L0 {
            lambda,
            kappa,
            beta_max,
        } => {
            format!("lambda={lambda};kappa={kappa};beta_max={beta_max}")
        }
        FilterSpec::Guided { radius, epsilon } => format!("radius={radius};epsilon={epsilon}"),
    }
}

pub fn write_csv<W: Write>(rows: &[StudyRow], out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Format(format!("csv: {e}"));
    wr.write_record(["filter", "arm", "param_set", "beta", "metric", "value"])
        .map_err(csv_err)?;
    for r in rows {
        let beta = r.beta.map(|b| b.to_string()).unwrap_or_default();
        let value = r.value.to_string();
        wr.write_record([&r.filter, &r.arm, &r.param_set, &beta, &r.metric, &value])
            .map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<csv output>", e))
}

/// Reversal counts of `k`-times detail enhancement on the synthetic scan
/// line, one row per (filter, arm). Classical and control arms use the
/// classical parameters, the piecewise-linear arm its own.
pub fn reversal_study(kinds: &[FilterKind], k: f64, tau: f64) -> Result<Vec<StudyRow>> {
    let signal = fig2_signal();
    let mut rows = Vec::new();
    for &kind in kinds {
        let params = app_params(kind, Application::Enhance);
        for arm in [Arm::Pc, Arm::Pl, Arm::Control] {
            let spec = if arm == Arm::Pl { &params.pl } else { &params.pc };
            let cfg = PipelineConfig::new(spec.clone(), params.beta);
            let smoothed = smooth_arm(&signal, &cfg, arm)?;
            let enhanced = detail_enhance(&signal, &smoothed, k)?;
            let report = gradient_reversal_count(&signal, &enhanced, tau)?;
            rows.push(StudyRow {
                filter: kind.name().to_string(),
                arm: arm.name().to_string(),
                param_set: param_label(spec),
                beta: (arm != Arm::Pc).then_some(params.beta),
                metric: "reversal_count".to_string(),
                value: report.reversal_count as f64,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantRow {
    pub arm: Arm,
    pub bins: usize,
    /// Against the same arm run with the reference bin count.
    pub psnr: f64,
    pub seconds: f64,
}

pub const REFERENCE_BINS: usize = 4096;

/// Weighted-median smoothing at several bin counts in the classical arm
/// (intensities) and the piecewise-linear arm (gradients, then
/// reconstruction), each scored against its own 2¹²-bin result.
pub fn quantization_study(
    input: &ImageBuffer,
    radius: usize,
    sigma_r: f64,
    bin_counts: &[usize],
    beta: f64,
) -> Result<Vec<QuantRow>> {
    let mut rows = Vec::new();
    for arm in [Arm::Pc, Arm::Pl] {
        let run = |bins: usize| -> Result<(ImageBuffer, f64)> {
            let spec = FilterSpec::WeightedMedian { radius, sigma_r, bins };
            let cfg = PipelineConfig::new(spec, beta);
            let t = Instant::now();
            let out = smooth_arm(input, &cfg, arm)?;
            Ok((out, t.elapsed().as_secs_f64()))
        };
        let (reference, ref_secs) = run(REFERENCE_BINS)?;
        for &bins in bin_counts {
            let (out, seconds) = if bins == REFERENCE_BINS {
                (reference.clone(), ref_secs)
            } else {
                run(bins)?
            };
            rows.push(QuantRow {
                arm,
                bins,
                psnr: psnr(&reference, &out)?,
                seconds,
            });
        }
    }
    Ok(rows)
}

impl QuantRow {
    pub fn to_study_rows(&self, radius: usize, sigma_r: f64, beta: f64) -> [StudyRow; 2] {
        let param_set = format!("radius={radius};sigma_r={sigma_r};bins={}", self.bins);
        let row = |metric: &str, value: f64| StudyRow {
            filter: FilterKind::WeightedMedian.name().to_string(),
            arm: self.arm.name().to_string(),
            param_set: param_set.clone(),
            beta: (self.arm != Arm::Pc).then_some(beta),
            metric: metric.to_string(),
            value,
        };
        [row("psnr_vs_4096", self.psnr), row("seconds", self.seconds)]
    }
}

/// Data term `|Î − I₀|²` of piecewise-linear smoothing for each β.
pub fn beta_study(input: &ImageBuffer, filter: &FilterSpec, betas: &[f64]) -> Result<Vec<StudyRow>> {
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        let out = smooth_arm(input, &PipelineConfig::new(filter.clone(), beta), Arm::Pl)?;
        rows.push(StudyRow {
            filter: filter.name().to_string(),
            arm: Arm::Pl.name().to_string(),
            param_set: param_label(filter),
            beta: Some(beta),
            metric: "data_term".to_string(),
            value: data_term(&out, input)?,
        });
    }
    Ok(rows)
}
