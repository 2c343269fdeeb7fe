//! Stand-ins for the single-scale segmentation network.
//!
//! [`SynthOracle`] renders the exact labels of a scene at the requested input
//! resolution and then degrades them the way a detector run on a downscaled
//! image would: words below a minimum height disappear, confidences are
//! blurred with a width proportional to the downscale factor (so neighbouring
//! words run together), and seeded noise is added to every channel.
//! [`file_infer`] wraps maps produced elsewhere.

mod blur;
mod noise;

pub use blur::gaussian_blur;
pub use noise::symmetric_unit;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{binarize, input_geometry, pfm, rasterize_labels, LabelMaps, RasterOptions};
use crate::scene::SceneSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Blur sigma per unit of downscale factor, in input pixels.
    pub blur_coeff: f64,
    /// Words shorter than this (input pixels) are not detected.
    pub min_detectable_height: f64,
    pub noise_amp: f64,
    pub scale_noise_amp: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            blur_coeff: 0.5,
            min_detectable_height: 4.0,
            noise_amp: 0.05,
            scale_noise_amp: 0.05,
            seed: 0,
        }
    }
}

impl OracleConfig {
    /// Exact labels, no degradation.
    pub fn ideal() -> Self {
        Self {
            blur_coeff: 0.0,
            min_detectable_height: 0.0,
            noise_amp: 0.0,
            scale_noise_amp: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.blur_coeff,
            self.min_detectable_height,
            self.noise_amp,
            self.scale_noise_amp,
        ];
        if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config(format!(
                "oracle amplitudes must be non-negative: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub maps: LabelMaps,
    pub input_width: usize,
    pub input_height: usize,
    /// Original-image pixels per map pixel (input downscale times stride).
    pub downscale_factor: f64,
}

/// Anything that turns a scene at a given input resolution into
/// segmentation/scale predictions.
pub trait SegmentationOracle: Sync {
    fn infer(&self, scene: &SceneSpec, long_side: u32) -> Result<OracleOutput>;
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SynthOracle {
    pub config: OracleConfig,
    pub raster: RasterOptions,
}

impl SynthOracle {
    pub fn new(config: OracleConfig, raster: RasterOptions) -> Self {
        Self { config, raster }
    }

    /// Ids of the words tall enough to be seen at `long_side`.
    pub fn detectable_words(&self, scene: &SceneSpec, long_side: u32) -> Result<Vec<u64>> {
        let scale = long_side as f64 / scene.long_side() as f64;
        let mut ids = Vec::new();
        for w in &scene.words {
            if w.rect()?.height * scale >= self.config.min_detectable_height {
                ids.push(w.id);
            }
        }
        Ok(ids)
    }
}

impl SegmentationOracle for SynthOracle {
    fn infer(&self, scene: &SceneSpec, long_side: u32) -> Result<OracleOutput> {
        let cfg = &self.config;
        cfg.validate()?;
        let keep = self.detectable_words(scene, long_side)?;
        let visible = SceneSpec {
            words: scene
                .words
                .iter()
                .filter(|w| keep.contains(&w.id))
                .cloned()
                .collect(),
            ..scene.clone()
        };
        let mut maps = rasterize_labels(&visible, long_side, &self.raster)?;
        let (in_w, in_h, _) = input_geometry(scene, long_side);
        let downscale = scene.long_side() as f64 / long_side as f64;
        let stride = self.raster.stride as f64;
        let sigma = cfg.blur_coeff * downscale / stride;
        maps.seg = gaussian_blur(&maps.seg, sigma);
        maps.shrunk = gaussian_blur(&maps.shrunk, sigma);

        let (w, h) = maps.dims();
        let seed = cfg.seed;
        for (channel, m) in [(0u64, &mut maps.seg), (1u64, &mut maps.shrunk)] {
            let amp = cfg.noise_amp;
            let data = m.data_mut();
            for y in 0..h {
                for x in 0..w {
                    let i = y * w + x;
                    let n = amp * symmetric_unit(seed, channel, x as u64, y as u64);
                    data[i] = (data[i] + n).clamp(0.0, 1.0);
                }
            }
        }
        if cfg.scale_noise_amp > 0.0 {
            let mask = maps.text_mask.data().to_vec();
            let data = maps.scale.data_mut();
            for y in 0..h {
                for x in 0..w {
                    let i = y * w + x;
                    if mask[i] >= 0.5 {
                        data[i] += cfg.scale_noise_amp * symmetric_unit(seed, 2, x as u64, y as u64);
                    }
                }
            }
        }
        Ok(OracleOutput {
            maps,
            input_width: in_w,
            input_height: in_h,
            downscale_factor: downscale * stride,
        })
    }
}

/// Runs the synthetic oracle with default shrink ratio and scale reference.
pub fn synth_infer(scene: &SceneSpec, long_side: u32, cfg: &OracleConfig) -> Result<OracleOutput> {
    SynthOracle::new(*cfg, RasterOptions::default()).infer(scene, long_side)
}

/// Wraps externally produced seg / shrunk / scale PFM maps. The text mask is
/// the seg map thresholded at 0.5.
pub fn file_infer(
    seg_path: impl AsRef<Path>,
    shrunk_path: impl AsRef<Path>,
    scale_path: impl AsRef<Path>,
    downscale_factor: f64,
) -> Result<OracleOutput> {
    if !(downscale_factor > 0.0 && downscale_factor.is_finite()) {
        return Err(Error::Config(format!(
            "downscale factor must be positive, got {downscale_factor}"
        )));
    }
    let seg = pfm::read(seg_path)?;
    let shrunk = pfm::read(shrunk_path)?;
    let scale = pfm::read(scale_path)?;
    seg.check_same_dims(&shrunk)?;
    seg.check_same_dims(&scale)?;
    let text_mask = binarize(&seg, 0.5);
    let (w, h) = seg.dims();
    Ok(OracleOutput {
        maps: LabelMaps {
            seg,
            shrunk,
            scale,
            text_mask,
        },
        input_width: w,
        input_height: h,
        downscale_factor,
    })
}
