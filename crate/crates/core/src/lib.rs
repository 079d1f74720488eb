pub mod error;
pub mod filters;
pub mod pipeline;
pub mod raster;
pub mod reconstruct;

pub use error::{Error, Result};
pub use filters::{FilterKind, FilterSpec};
pub use pipeline::{Arm, PipelineConfig, ToneMapConfig};
pub use raster::{GradientField, ImageBuffer, NormState, ValueRange};
