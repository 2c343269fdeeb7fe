use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::maps::{average_map, binarize, connected_components, denormalize_scale, Blob, ScaleParams};
use crate::oracle::OracleOutput;
use crate::pipeline::PipelineConfig;

/// Resize factors are clamped to `[1 / MAX_RESIZE, MAX_RESIZE]`.
pub const MAX_RESIZE: f64 = 8.0;

/// Axis-aligned rectangle in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl AxisRect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn overlaps(&self, o: &AxisRect) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }

    pub fn union(&self, o: &AxisRect) -> AxisRect {
        AxisRect {
            x0: self.x0.min(o.x0),
            y0: self.y0.min(o.y0),
            x1: self.x1.max(o.x1),
            y1: self.y1.max(o.y1),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPlan {
    pub blob_id: u64,
    /// Crop in original-image pixels.
    pub source_rect: AxisRect,
    /// Estimated word height in original-image pixels.
    pub scale_estimate: f64,
    pub resize_factor: f64,
    pub target_width: u32,
    pub target_height: u32,
}

/// Confidence-weighted mean of `values`; `None` when the weights sum to 0.
pub fn weighted_log_scale(weights: &[f64], values: &[f64]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (&w, &v) in weights.iter().zip(values) {
        num += w * v;
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

/// Extracts text regions from the averaged segmentation map and estimates
/// each one's word height in original-image pixels.
///
/// The scale channel is averaged in log space, weighted by the averaged
/// confidence, then mapped back through `s_ref` and multiplied by the
/// downscale factor.
pub fn estimate_blob_scales(output: &OracleOutput, cfg: &PipelineConfig) -> Result<Vec<Blob>> {
    let maps = &output.maps;
    let avg = average_map(&maps.seg, &maps.shrunk)?;
    let params = ScaleParams::new(cfg.s_ref)?;
    let mut blobs = Vec::new();
    for mut blob in connected_components(&binarize(&avg, cfg.seg_threshold)) {
        if blob.area() < cfg.min_blob_area as usize {
            continue;
        }
        let weights: Vec<f64> = blob
            .pixels
            .iter()
            .map(|&(x, y)| avg.get(x as usize, y as usize))
            .collect();
        let values: Vec<f64> = blob
            .pixels
            .iter()
            .map(|&(x, y)| maps.scale.get(x as usize, y as usize))
            .collect();
        let Some(s_hat) = weighted_log_scale(&weights, &values) else {
            continue;
        };
        blob.mean_confidence = Some(weights.iter().sum::<f64>() / weights.len() as f64);
        blob.scale_estimate = Some(denormalize_scale(s_hat, params) * output.downscale_factor);
        blobs.push(blob);
    }
    Ok(blobs)
}

/// `kappa * s_ref / scale`, clamped.
pub fn resize_factor(scale_estimate: f64, cfg: &PipelineConfig) -> f64 {
    (cfg.kappa * cfg.s_ref / scale_estimate).clamp(1.0 / MAX_RESIZE, MAX_RESIZE)
}

struct Region {
    id: u64,
    rect: AxisRect,
    scale: f64,
}

/// Turns blobs into padded crops of the original image and their resize
/// factors. Overlapping crops are merged (union box, area-weighted scale)
/// until none overlap.
pub fn plan_regions(blobs: &[Blob], output: &OracleOutput, cfg: &PipelineConfig) -> Vec<RegionPlan> {
    let d = output.downscale_factor;
    let (map_w, map_h) = output.maps.dims();
    let img_w = map_w as f64 * d;
    let img_h = map_h as f64 * d;
    let mut regions: Vec<Region> = blobs
        .iter()
        .enumerate()
        .filter_map(|(i, b)| {
            let scale = b.scale_estimate?;
            let pad = cfg.blob_pad_factor * scale;
            Some(Region {
                id: i as u64,
                rect: AxisRect {
                    x0: (b.bbox.left as f64 * d - pad).max(0.0),
                    y0: (b.bbox.top as f64 * d - pad).max(0.0),
                    x1: (b.bbox.right as f64 * d + pad).min(img_w),
                    y1: (b.bbox.bottom as f64 * d + pad).min(img_h),
                },
                scale,
            })
        })
        .collect();

    'merge: loop {
        for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                if regions[i].rect.overlaps(&regions[j].rect) {
                    let b = regions.remove(j);
                    let a = &mut regions[i];
                    let (wa, wb) = (a.rect.area(), b.rect.area());
                    a.scale = (a.scale * wa + b.scale * wb) / (wa + wb);
                    a.rect = a.rect.union(&b.rect);
                    a.id = a.id.min(b.id);
                    continue 'merge;
                }
            }
        }
        break;
    }

    let mut plans: Vec<RegionPlan> = regions
        .into_iter()
        .filter(|r| r.rect.area() > 0.0)
        .map(|r| {
            let f = resize_factor(r.scale, cfg);
            RegionPlan {
                blob_id: r.id,
                source_rect: r.rect,
                scale_estimate: r.scale,
                resize_factor: f,
                target_width: ((r.rect.width() * f).round() as u32).max(1),
                target_height: ((r.rect.height() * f).round() as u32).max(1),
            }
        })
        .collect();
    plans.sort_by_key(|p| p.blob_id);
    plans
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{FloatMap, LabelMaps, PixelBox};

    fn output_with(maps: LabelMaps, d: f64) -> OracleOutput {
        let (w, h) = maps.dims();
        OracleOutput {
            maps,
            input_width: w,
            input_height: h,
            downscale_factor: d,
        }
    }

    fn blob(left: u32, top: u32, right: u32, bottom: u32, scale: f64) -> Blob {
        Blob {
            pixels: vec![(left, top)],
            bbox: PixelBox { left, top, right, bottom },
            mean_confidence: Some(1.0),
            scale_estimate: Some(scale),
        }
    }

    #[test]
    fn uniform_blob_scale() {
        let mut maps = LabelMaps::zeros(10, 10);
        for y in 2..6 {
            for x in 2..8 {
                maps.seg.set(x, y, 1.0);
                maps.shrunk.set(x, y, 1.0);
            }
        }
        let out = output_with(maps, 2.0);
        let blobs = estimate_blob_scales(&out, &PipelineConfig::default()).unwrap();
        assert_eq!(blobs.len(), 1);
        assert!((blobs[0].scale_estimate.unwrap() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_is_ignored() {
        assert_eq!(weighted_log_scale(&[1.0, 0.0], &[0.7, -5.0]), Some(0.7));
        assert_eq!(weighted_log_scale(&[0.0, 0.0], &[0.7, -5.0]), None);
    }

    #[test]
    fn small_blobs_dropped() {
        let mut maps = LabelMaps::zeros(10, 10);
        maps.seg.set(3, 3, 1.0);
        maps.shrunk.set(3, 3, 1.0);
        maps.seg.set(4, 3, 1.0);
        maps.shrunk.set(4, 3, 1.0);
        let out = output_with(maps, 1.0);
        assert!(estimate_blob_scales(&out, &PipelineConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn resize_factor_examples() {
        let cfg = PipelineConfig::default();
        assert!((resize_factor(15.0, &cfg) - 2.5).abs() < 1e-12);
        assert_eq!(resize_factor(37.5, &cfg), 1.0);
        assert_eq!(resize_factor(1.0, &cfg), 8.0);
        assert_eq!(resize_factor(1e6, &cfg), 1.0 / 8.0);
    }

    #[test]
    fn plans_pad_clamp_and_merge() {
        let out = output_with(LabelMaps::zeros(100, 50), 2.0);
        let cfg = PipelineConfig::default();
        let plans = plan_regions(&[blob(10, 10, 20, 15, 20.0)], &out, &cfg);
        assert_eq!(plans.len(), 1);
        let r = plans[0].source_rect;
        assert_eq!((r.x0, r.y0, r.x1, r.y1), (15.0, 15.0, 45.0, 35.0));
        assert!((plans[0].resize_factor - 37.5 / 20.0).abs() < 1e-12);
        assert_eq!(plans[0].target_width, (30.0f64 * 1.875).round() as u32);

        let edge = plan_regions(&[blob(0, 0, 5, 5, 40.0)], &out, &cfg);
        assert_eq!((edge[0].source_rect.x0, edge[0].source_rect.y0), (0.0, 0.0));

        let merged = plan_regions(
            &[blob(10, 10, 20, 15, 20.0), blob(22, 10, 30, 15, 20.0), blob(80, 40, 90, 45, 20.0)],
            &out,
            &cfg,
        );
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].blob_id, 0);
        assert_eq!(merged[0].source_rect.x1, 65.0);
        assert!((merged[0].scale_estimate - 20.0).abs() < 1e-12);
        assert!(!merged[0].source_rect.overlaps(&merged[1].source_rect));
    }

    #[test]
    fn planning_is_deterministic() {
        let out = output_with(LabelMaps::zeros(100, 50), 2.0);
        let cfg = PipelineConfig::default();
        let blobs = vec![blob(10, 10, 20, 15, 20.0), blob(60, 30, 80, 35, 12.0)];
        assert_eq!(plan_regions(&blobs, &out, &cfg), plan_regions(&blobs, &out, &cfg));
        let _ = FloatMap::zeros(1, 1);
    }
}
