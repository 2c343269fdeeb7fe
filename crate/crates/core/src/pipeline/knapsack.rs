use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clip_to_box, Point2, RotatedRect};
use crate::packing::{pack_all, KnapsackLayout, PackItem};
use crate::pipeline::regions::{AxisRect, RegionPlan};
use crate::pipeline::{Detection, PipelineConfig};
use crate::scene::{SceneSpec, Word};

/// Words keep their place in a knapsack when at least this fraction of their
/// area lies inside the region.
pub const MIN_CLIP_RETENTION: f64 = 0.2;

/// Original-to-knapsack mapping of one region: `k = scale * o + translate`.
///
/// A knapsack pixel spans `1 / scale` original pixels, so for anything
/// measured in a knapsack (box sizes, scale-map heights) the region's
/// effective downscale factor is `1 / resize_factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionTransform {
    pub blob_id: u64,
    pub bin_index: usize,
    pub scale: f64,
    pub translate_x: f64,
    pub translate_y: f64,
    /// Resized region inside the bin, gutter excluded.
    pub region: AxisRect,
}

impl RegionTransform {
    pub fn downscale_factor(&self) -> f64 {
        1.0 / self.scale
    }

    pub fn to_knapsack(&self, p: Point2) -> Point2 {
        Point2::new(
            self.scale * p.x + self.translate_x,
            self.scale * p.y + self.translate_y,
        )
    }

    pub fn to_original(&self, p: Point2) -> Point2 {
        Point2::new(
            (p.x - self.translate_x) / self.scale,
            (p.y - self.translate_y) / self.scale,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnapsackBuild {
    /// One scene per bin, canvas = bin size.
    pub scenes: Vec<SceneSpec>,
    /// Sorted by `(bin_index, blob_id)`.
    pub transforms: Vec<RegionTransform>,
    pub layouts: Vec<KnapsackLayout>,
}

impl KnapsackBuild {
    pub fn transforms_for(&self, bin_index: usize) -> Vec<RegionTransform> {
        self.transforms
            .iter()
            .filter(|t| t.bin_index == bin_index)
            .copied()
            .collect()
    }
}

/// Packs the planned regions into bins and renders, for each bin, a scene
/// holding the clipped and rescaled words of every region placed in it.
/// Word ids inside a knapsack scene are sequential.
pub fn build_knapsacks(scene: &SceneSpec, plans: &[RegionPlan], cfg: &PipelineConfig) -> Result<KnapsackBuild> {
    if plans.is_empty() {
        return Ok(KnapsackBuild::default());
    }
    let items: Vec<PackItem> = plans
        .iter()
        .map(|p| PackItem {
            id: p.blob_id,
            width: p.target_width,
            height: p.target_height,
        })
        .collect();
    let layouts = pack_all(&items, cfg.gutter, cfg.max_bin_side)?;

    let polys = scene
        .words
        .iter()
        .map(|w| Ok((w, w.polygon()?)))
        .collect::<Result<Vec<_>>>()?;
    let g = cfg.gutter as f64;
    let mut scenes = Vec::with_capacity(layouts.len());
    let mut transforms = Vec::with_capacity(plans.len());
    for (bin_index, layout) in layouts.iter().enumerate() {
        let mut kscene = SceneSpec {
            canvas_width: layout.bin_width,
            canvas_height: layout.bin_height,
            words: Vec::new(),
            seed: scene.seed,
        };
        let mut placements = layout.placements.clone();
        placements.sort_by_key(|p| p.id);
        for pl in &placements {
            let plan = plans
                .iter()
                .find(|p| p.blob_id == pl.id)
                .ok_or_else(|| Error::Invariant(format!("placement {} has no plan", pl.id)))?;
            let src = plan.source_rect;
            let (ox, oy) = (pl.x as f64 + g, pl.y as f64 + g);
            let t = RegionTransform {
                blob_id: plan.blob_id,
                bin_index,
                scale: plan.resize_factor,
                translate_x: ox - plan.resize_factor * src.x0,
                translate_y: oy - plan.resize_factor * src.y0,
                region: AxisRect {
                    x0: ox,
                    y0: oy,
                    x1: ox + plan.target_width as f64,
                    y1: oy + plan.target_height as f64,
                },
            };
            for (word, poly) in &polys {
                let Some(clipped) = clip_to_box(poly, src.x0, src.y0, src.x1, src.y1) else {
                    continue;
                };
                if clipped.area() < MIN_CLIP_RETENTION * poly.area() {
                    continue;
                }
                let quad: Vec<Point2> = clipped
                    .vertices()
                    .iter()
                    .map(|&p| clamp_to(t.to_knapsack(p), &t.region))
                    .collect();
                kscene.words.push(Word {
                    id: kscene.words.len() as u64,
                    quad,
                    ink: word.ink,
                });
            }
            transforms.push(t);
        }
        scenes.push(kscene);
    }
    Ok(KnapsackBuild {
        scenes,
        transforms,
        layouts,
    })
}

// Rounded target dims can differ from the scaled crop by under half a pixel.
fn clamp_to(p: Point2, r: &AxisRect) -> Point2 {
    Point2::new(p.x.clamp(r.x0, r.x1), p.y.clamp(r.y0, r.y1))
}

/// Maps knapsack detections back to original-image coordinates through the
/// transform of the region containing each center. Detections centered in
/// gutter space are dropped.
pub fn backmap(dets: &[Detection], transforms: &[RegionTransform]) -> Vec<Detection> {
    dets.iter()
        .filter_map(|d| {
            let t = transforms
                .iter()
                .find(|t| t.region.contains(d.rect.cx, d.rect.cy))?;
            let c = t.to_original(d.rect.center());
            let k = t.downscale_factor();
            let rect = RotatedRect::new(c.x, c.y, d.rect.width * k, d.rect.height * k, d.rect.angle).ok()?;
            Some(Detection {
                rect,
                confidence: d.confidence,
            })
        })
        .collect()
}
