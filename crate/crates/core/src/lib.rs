//! Adaptive two-pass text detection.
//!
//! A coarse pass over a downscaled image finds text regions and predicts
//! their scale; the regions are cropped, resized to a canonical word height,
//! packed into compact "knapsack" images and run through the detector again.
//! The segmentation network itself is pluggable ([`oracle`]); a deterministic
//! synthetic oracle makes the whole pipeline testable without a trained
//! model.

pub mod cli;
pub mod error;
pub mod eval;
pub mod formats;
pub mod geometry;
pub mod losses;
pub mod maps;
pub mod oracle;
pub mod packing;
pub mod pipeline;
pub mod render;
pub mod scene;
pub mod synth;

pub use error::{Error, Result};
