pub mod config;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod labeling;
pub mod patterns;
pub mod pipeline;
pub mod support;
pub mod synth;

pub use config::PipelineConfig;
pub use error::{Error, Result};
