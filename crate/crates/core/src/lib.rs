//! Sparsity-likelihood change-point detection for panels of sequences.
//!
//! Per-sequence p-values for a mean change at a candidate location are
//! transformed by the sparsity likelihood and summed across sequences. A
//! screen-then-refine search over multiscale windows, driven by binary
//! segmentation, returns the change-point set. Normal (Z-test) and Poisson
//! (conditional binomial) observation models are supported.

pub mod calibrate;
pub mod config;
pub mod dist;
pub mod error;
pub mod models;
pub mod rng;
pub mod score;
pub mod segment;
pub mod simulate;
pub mod theory;
pub mod windows;

pub use config::{Model, ScheduleSpec, SlConfig};
pub use error::{Error, Result};
pub use models::{DataPanel, SegmentTriple};
pub use score::{PValueVector, ScoreParams};
pub use segment::{ChangePoint, SegmentationResult};
pub use windows::WindowSchedule;
