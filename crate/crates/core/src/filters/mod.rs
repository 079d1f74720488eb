//! Piecewise-constant smoothing filters and the guided-filter baseline.
//!
//! Every filter takes a source image and a guidance image of the same
//! width/height. Range distances are Euclidean over the guide's channels;
//! each source channel is filtered with the same weights.

mod bilateral;
mod domain_transform;
mod guided;
mod l0;
mod oracle;
mod weighted_median;

pub use bilateral::{bilateral, bilateral_bruteforce, bilateral_grid, window_radius};
pub use domain_transform::{domain_transform_nc, iteration_sigmas};
pub use guided::guided_filter;
pub use l0::{l0_smooth, nonzero_gradient_count, L0Params};
pub use oracle::{domain_transform_nc_bruteforce, guided_filter_bruteforce, weighted_median_bruteforce};
pub use weighted_median::{quantize_levels, weighted_median, GuideFeatures, MAX_FEATURES, WEIGHT_ONE};

use crate::error::{Error, Result};
use crate::raster::ImageBuffer;

/// Selection of one filter together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum FilterSpec {
    /// `fast` selects the bilateral-grid approximation.
    Bilateral {
        sigma_s: f64,
        sigma_r: f64,
        fast: bool,
    },
    DomainTransformNC {
        sigma_s: f64,
        sigma_r: f64,
        iterations: usize,
    },
    WeightedMedian {
        radius: usize,
        sigma_r: f64,
        bins: usize,
    },
    L0 {
        lambda: f64,
        kappa: f64,
        beta_max: f64,
    },
    Guided {
        radius: usize,
        epsilon: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Bilateral,
    DomainTransform,
    WeightedMedian,
    L0,
    Guided,
}

impl FilterKind {
    pub const ALL: [FilterKind; 5] = [
        FilterKind::Bilateral,
        FilterKind::DomainTransform,
        FilterKind::WeightedMedian,
        FilterKind::L0,
        FilterKind::Guided,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Bilateral => "bilateral",
            FilterKind::DomainTransform => "dt",
            FilterKind::WeightedMedian => "wmf",
            FilterKind::L0 => "l0",
            FilterKind::Guided => "guided",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bilateral" | "bf" => Some(FilterKind::Bilateral),
            "dt" | "domain-transform" | "domain_transform" | "dtnc" => Some(FilterKind::DomainTransform),
            "wmf" | "weighted-median" | "weighted_median" | "median" => Some(FilterKind::WeightedMedian),
            "l0" => Some(FilterKind::L0),
            "guided" | "gf" => Some(FilterKind::Guided),
            _ => None,
        }
    }
}

pub const DEFAULT_DT_ITERATIONS: usize = 3;
pub const DEFAULT_WMF_BINS: usize = 256;
pub const DEFAULT_L0_KAPPA: f64 = 2.0;
pub const DEFAULT_L0_BETA_MAX: f64 = 1e5;

impl FilterSpec {
    pub fn bilateral(sigma_s: f64, sigma_r: f64) -> Self {
        FilterSpec::Bilateral {
            sigma_s,
            sigma_r,
            fast: false,
        }
    }

    pub fn domain_transform(sigma_s: f64, sigma_r: f64) -> Self {
        FilterSpec::DomainTransformNC {
            sigma_s,
            sigma_r,
            iterations: DEFAULT_DT_ITERATIONS,
        }
    }

    pub fn weighted_median(radius: usize, sigma_r: f64) -> Self {
        FilterSpec::WeightedMedian {
            radius,
            sigma_r,
            bins: DEFAULT_WMF_BINS,
        }
    }

    pub fn l0(lambda: f64) -> Self {
        FilterSpec::L0 {
            lambda,
            kappa: DEFAULT_L0_KAPPA,
            beta_max: DEFAULT_L0_BETA_MAX,
        }
    }

    pub fn guided(radius: usize, epsilon: f64) -> Self {
        FilterSpec::Guided { radius, epsilon }
    }

    pub fn kind(&self) -> FilterKind {
        match self {
            FilterSpec::Bilateral { .. } => FilterKind::Bilateral,
            FilterSpec::DomainTransformNC { .. } => FilterKind::DomainTransform,
            FilterSpec::WeightedMedian { .. } => FilterKind::WeightedMedian,
            FilterSpec::L0 { .. } => FilterKind::L0,
            FilterSpec::Guided { .. } => FilterKind::Guided,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind().name()
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be > 0, got {v}")))
            }
        }
        match *self {
            FilterSpec::Bilateral { sigma_s, sigma_r, .. } => {
                positive("sigma_s", sigma_s)?;
                positive("sigma_r", sigma_r)
            }
            FilterSpec::DomainTransformNC {
                sigma_s,
                sigma_r,
                iterations,
            } => {
                positive("sigma_s", sigma_s)?;
                positive("sigma_r", sigma_r)?;
                if iterations == 0 {
                    return Err(Error::invalid("iterations", "must be >= 1"));
                }
                Ok(())
            }
            FilterSpec::WeightedMedian { radius, sigma_r, bins } => {
                if radius == 0 {
                    return Err(Error::invalid("radius", "must be >= 1"));
                }
                if bins < 2 {
                    return Err(Error::invalid("bins", format!("must be >= 2, got {bins}")));
                }
                positive("sigma_r", sigma_r)
            }
            FilterSpec::L0 {
                lambda,
                kappa,
                beta_max,
            } => {
                if !(lambda.is_finite() && lambda >= 0.0) {
                    return Err(Error::invalid("lambda", format!("must be >= 0, got {lambda}")));
                }
                if !(kappa.is_finite() && kappa > 1.0) {
                    return Err(Error::invalid("kappa", format!("must be > 1, got {kappa}")));
                }
                positive("beta_max", beta_max)
            }
            FilterSpec::Guided { radius, epsilon } => {
                if radius == 0 {
                    return Err(Error::invalid("radius", "must be >= 1"));
                }
                if !(epsilon.is_finite() && epsilon >= 0.0) {
                    return Err(Error::invalid("epsilon", format!("must be >= 0, got {epsilon}")));
                }
                Ok(())
            }
        }
    }

    /// Applies the filter to `src` with the given guidance (`None` means
    /// self-guided). L0 smoothing ignores the guide.
    pub fn apply(&self, src: &ImageBuffer, guide: Option<&ImageBuffer>) -> Result<ImageBuffer> {
        self.validate()?;
        let guide = guide.unwrap_or(src);
        // L0 ignores the guide, but a mismatched one is still a caller error
        check_pair(src, guide)?;
        match *self {
            FilterSpec::Bilateral {
                sigma_s,
                sigma_r,
                fast: false,
            } => bilateral(src, guide, sigma_s, sigma_r),
            FilterSpec::Bilateral {
                sigma_s,
                sigma_r,
                fast: true,
            } => bilateral_grid(src, guide, sigma_s, sigma_r),
            FilterSpec::DomainTransformNC {
                sigma_s,
                sigma_r,
                iterations,
            } => domain_transform_nc(src, guide, sigma_s, sigma_r, iterations),
            FilterSpec::WeightedMedian { radius, sigma_r, bins } => weighted_median(src, guide, radius, sigma_r, bins),
            FilterSpec::L0 {
                lambda,
                kappa,
                beta_max,
            } => l0_smooth(
                src,
                L0Params {
                    lambda,
                    kappa,
                    beta_max,
                },
            ),
            FilterSpec::Guided { radius, epsilon } => guided_filter(src, guide, radius, epsilon),
        }
    }
}

/// Source and guide must share width and height; the guide has 1 or 3
/// channels independent of the source.
pub(crate) fn check_pair(src: &ImageBuffer, guide: &ImageBuffer) -> Result<()> {
    src.ensure_same_size(guide)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(FilterSpec::bilateral(16.0, -1.0).validate().is_err());
        assert!(FilterSpec::bilateral(0.0, 0.1).validate().is_err());
        assert!(FilterSpec::DomainTransformNC {
            sigma_s: 1.0,
            sigma_r: 0.1,
            iterations: 0
        }
        .validate()
        .is_err());
        assert!(FilterSpec::WeightedMedian {
            radius: 2,
            sigma_r: 0.1,
            bins: 1
        }
        .validate()
        .is_err());
        assert!(FilterSpec::WeightedMedian {
            radius: 0,
            sigma_r: 0.1,
            bins: 8
        }
        .validate()
        .is_err());
        assert!(FilterSpec::L0 {
            lambda: 0.01,
            kappa: 1.0,
            beta_max: 1e5
        }
        .validate()
        .is_err());
        assert!(FilterSpec::L0 {
            lambda: -0.1,
            kappa: 2.0,
            beta_max: 1e5
        }
        .validate()
        .is_err());
        assert!(FilterSpec::guided(0, 0.01).validate().is_err());
        assert!(FilterSpec::guided(2, 0.0).validate().is_ok());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in FilterKind::ALL {
            assert_eq!(FilterKind::parse(k.name()), Some(k));
        }
        assert_eq!(FilterKind::parse("nope"), None);
    }
}
