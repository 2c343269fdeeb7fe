//! Two-pass adaptive-scale detection.
//!
//! A coarse pass finds text regions and estimates their word height; the
//! regions are cropped, resized to a canonical height, packed into
//! knapsacks and detected again at native resolution. Only second-pass
//! boxes are returned, mapped back to original-image coordinates.

mod knapsack;
mod regions;

pub use knapsack::{backmap, build_knapsacks, KnapsackBuild, RegionTransform, MIN_CLIP_RETENTION};
pub use regions::{
    estimate_blob_scales, plan_regions, resize_factor, weighted_log_scale, AxisRect, RegionPlan, MAX_RESIZE,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{expand_shrunk_rect, min_area_rect, RotatedRect, ShrinkParams};
use crate::maps::{binarize, connected_components, input_geometry};
use crate::oracle::{OracleOutput, SegmentationOracle};
use crate::scene::SceneSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub first_pass_long_side: u32,
    /// Long side of the fixed-scale run the pixel budget is compared to.
    pub reference_long_side: u32,
    pub kappa: f64,
    pub s_ref: f64,
    pub seg_threshold: f64,
    pub blob_pad_factor: f64,
    pub min_blob_area: u32,
    pub min_det_area: u32,
    pub gutter: u32,
    pub max_bin_side: u32,
    pub shrink_r: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            first_pass_long_side: 720,
            reference_long_side: 1440,
            kappa: 1.5,
            s_ref: 25.0,
            seg_threshold: 0.5,
            blob_pad_factor: 0.25,
            min_blob_area: 4,
            min_det_area: 10,
            gutter: 8,
            max_bin_side: 4096,
            shrink_r: 0.4,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if !(self.s_ref > 0.0 && self.s_ref.is_finite()) {
            return bad(format!("s_ref must be positive, got {}", self.s_ref));
        }
        if !(self.seg_threshold > 0.0 && self.seg_threshold < 1.0) {
            return bad(format!("seg_threshold must lie in (0,1), got {}", self.seg_threshold));
        }
        if !(self.shrink_r > 0.0 && self.shrink_r < 1.0) {
            return bad(format!("shrink_r must lie in (0,1), got {}", self.shrink_r));
        }
        if !(self.blob_pad_factor >= 0.0 && self.blob_pad_factor.is_finite()) {
            return bad(format!("blob_pad_factor must be non-negative, got {}", self.blob_pad_factor));
        }
        if self.first_pass_long_side < 32 || self.reference_long_side < 32 {
            return bad("long sides must be at least 32".into());
        }
        if self.max_bin_side < 32 {
            return bad(format!("max_bin_side must be at least 32, got {}", self.max_bin_side));
        }
        Ok(())
    }

    fn shrink(&self) -> Result<ShrinkParams> {
        ShrinkParams::new(self.shrink_r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub rect: RotatedRect,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineStats {
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub pixels_pass1: u64,
    pub pixels_pass2: u64,
    /// Input pixels of a single pass at the reference long side.
    pub pixels_reference: u64,
    pub reduction_ratio: f64,
    pub blob_count: usize,
    pub knapsack_count: usize,
}

impl PipelineStats {
    fn new(scene: &SceneSpec, cfg: &PipelineConfig, pixels_pass1: u64, pixels_pass2: u64) -> Self {
        let (rw, rh, _) = input_geometry(scene, cfg.reference_long_side);
        let pixels_reference = (rw * rh) as u64;
        let used = pixels_pass1 + pixels_pass2;
        Self {
            canvas_width: scene.canvas_width,
            canvas_height: scene.canvas_height,
            pixels_pass1,
            pixels_pass2,
            pixels_reference,
            reduction_ratio: if used == 0 { 0.0 } else { pixels_reference as f64 / used as f64 },
            blob_count: 0,
            knapsack_count: 0,
        }
    }
}

/// Boxes from the shrunk channel: components of the thresholded map, their
/// minimum-area rectangles expanded back to full word size, in original
/// image coordinates (map pixels times the downscale factor).
pub fn extract_detections(output: &OracleOutput, cfg: &PipelineConfig) -> Result<Vec<Detection>> {
    let shrink = cfg.shrink()?;
    let shrunk = &output.maps.shrunk;
    let d = output.downscale_factor;
    let mut dets = Vec::new();
    for blob in connected_components(&binarize(shrunk, cfg.seg_threshold)) {
        let r = min_area_rect(&blob.outline_points())?;
        let full = expand_shrunk_rect(&r, shrink)?;
        let rect = RotatedRect::new(full.cx * d, full.cy * d, full.width * d, full.height * d, full.angle)?;
        dets.push(Detection {
            rect,
            confidence: blob.mean_of(shrunk).clamp(0.0, 1.0),
        });
    }
    Ok(dets)
}

fn keep_large(dets: Vec<Detection>, cfg: &PipelineConfig) -> Vec<Detection> {
    dets.into_iter()
        .filter(|d| d.rect.area() >= cfg.min_det_area as f64)
        .collect()
}

/// Fixed-scale baseline: one oracle pass at `long_side`.
pub fn single_scale_run(
    scene: &SceneSpec,
    long_side: u32,
    cfg: &PipelineConfig,
    oracle: &dyn SegmentationOracle,
) -> Result<(Vec<Detection>, PipelineStats)> {
    cfg.validate()?;
    let out = oracle.infer(scene, long_side)?;
    let dets = keep_large(extract_detections(&out, cfg)?, cfg);
    let stats = PipelineStats::new(scene, cfg, (out.input_width * out.input_height) as u64, 0);
    Ok((dets, stats))
}

/// Coarse pass, region planning, knapsack pass and back-mapping.
pub fn run_pipeline(
    scene: &SceneSpec,
    cfg: &PipelineConfig,
    oracle: &dyn SegmentationOracle,
) -> Result<(Vec<Detection>, PipelineStats)> {
    cfg.validate()?;
    let first = oracle.infer(scene, cfg.first_pass_long_side)?;
    let pixels_pass1 = (first.input_width * first.input_height) as u64;
    let blobs = estimate_blob_scales(&first, cfg)?;
    let plans = plan_regions(&blobs, &first, cfg);
    let build = build_knapsacks(scene, &plans, cfg)?;

    let per_bin: Vec<Result<(Vec<Detection>, u64)>> = build
        .scenes
        .par_iter()
        .enumerate()
        .map(|(bin, kscene)| {
            // Knapsacks are processed at native resolution.
            let out = oracle.infer(kscene, kscene.long_side())?;
            let dets = backmap(&extract_detections(&out, cfg)?, &build.transforms_for(bin));
            Ok((keep_large(dets, cfg), (out.input_width * out.input_height) as u64))
        })
        .collect();

    let mut dets = Vec::new();
    let mut pixels_pass2 = 0;
    for r in per_bin {
        let (d, px) = r?;
        dets.extend(d);
        pixels_pass2 += px;
    }
    let mut stats = PipelineStats::new(scene, cfg, pixels_pass1, pixels_pass2);
    stats.blob_count = blobs.len();
    stats.knapsack_count = build.scenes.len();
    Ok((dets, stats))
}
