//! Per-application parameter pairs: the classical setting and the
//! corresponding piecewise-linear setting, whose range scale is a quarter of
//! the classical one because it applies to gradients.

use crate::filters::{FilterKind, FilterSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Application {
    Enhance,
    ToneMap,
    Flash,
}

impl Application {
    pub fn default_beta(self) -> f64 {
        match self {
            Application::Enhance => 16.0,
            Application::ToneMap => 64.0,
            Application::Flash => 128.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppParams {
    pub pc: FilterSpec,
    pub pl: FilterSpec,
    pub beta: f64,
}

pub fn app_params(kind: FilterKind, app: Application) -> AppParams {
    let sigma_s = 16.0;
    let radius = 16;
    // classical range scale; the gradient-domain one is a quarter of it
    let sr = match app {
        Application::Enhance => 0.1,
        Application::ToneMap => 0.12,
        Application::Flash => 0.02,
    };
    let lambda = match app {
        Application::Enhance | Application::Flash => 0.007,
        Application::ToneMap => 0.07,
    };
    // guided ε is the squared range scale, written out to keep labels exact
    let eps = match app {
        Application::Enhance => (0.01, 0.000625),
        Application::ToneMap => (0.0144, 0.0009),
        Application::Flash => (0.0004, 0.000025),
    };
    let pair = |f: &dyn Fn(f64) -> FilterSpec| (f(sr), f(sr / 4.0));
    let (pc, pl) = match kind {
        FilterKind::Bilateral => pair(&|r| FilterSpec::bilateral(sigma_s, r)),
        FilterKind::DomainTransform => pair(&|r| FilterSpec::domain_transform(sigma_s, r)),
        FilterKind::WeightedMedian => pair(&|r| FilterSpec::weighted_median(radius, r)),
        FilterKind::Guided => (FilterSpec::guided(radius, eps.0), FilterSpec::guided(radius, eps.1)),
        FilterKind::L0 => (FilterSpec::l0(lambda), FilterSpec::l0(lambda / 4.0)),
    };
    AppParams {
        pc,
        pl,
        beta: app.default_beta(),
    }
}
