//! Detection scoring at an IoU threshold and pixel-budget summaries.

use serde::{Deserialize, Serialize};

use crate::geometry::{polygon_iou, Polygon, RotatedRect};
use crate::maps::input_geometry;
use crate::pipeline::{Detection, PipelineStats};
use crate::scene::SceneSpec;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub det_id: u64,
    pub gt_id: u64,
    pub iou: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Score {
    pub recall: f64,
    pub precision: f64,
    pub f_score: f64,
}

/// One-to-one greedy matching. Ids are positions in `dets` and `gts`.
///
/// Pairs are accepted in decreasing IoU order, ties broken by `(gt, det)`,
/// while the IoU stays at or above `iou_thresh`.
pub fn match_detections(dets: &[Detection], gts: &[RotatedRect], iou_thresh: f64) -> Vec<Match> {
    let gt_polys: Vec<Polygon> = gts.iter().map(RotatedRect::to_polygon).collect();
    let mut pairs = Vec::new();
    for (di, d) in dets.iter().enumerate() {
        let dp = d.rect.to_polygon();
        for (gi, gp) in gt_polys.iter().enumerate() {
            let iou = polygon_iou(&dp, gp);
            if iou >= iou_thresh && iou > 0.0 {
                pairs.push(Match {
                    det_id: di as u64,
                    gt_id: gi as u64,
                    iou,
                });
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.gt_id.cmp(&b.gt_id))
            .then(a.det_id.cmp(&b.det_id))
    });
    let mut det_used = vec![false; dets.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut out = Vec::new();
    for m in pairs {
        let (d, g) = (m.det_id as usize, m.gt_id as usize);
        if !det_used[d] && !gt_used[g] {
            det_used[d] = true;
            gt_used[g] = true;
            out.push(m);
        }
    }
    out
}

/// Recall, precision and their harmonic mean; empty denominators give 0.
pub fn score(n_matches: usize, n_dets: usize, n_gts: usize) -> Score {
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let recall = ratio(n_matches, n_gts);
    let precision = ratio(n_matches, n_dets);
    let f_score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Score {
        recall,
        precision,
        f_score,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PixelSummary {
    pub scenes: usize,
    pub reference_long_side: u32,
    pub total_pass1: u64,
    pub total_pass2: u64,
    pub total_used: u64,
    pub total_reference: u64,
    pub mean_used: f64,
    pub mean_reference: f64,
    /// Reference pixels over used pixels; 0 when nothing was used.
    pub reduction_ratio: f64,
}

/// Totals and means of the pixels fed through the detector, against running
/// every scene once at `reference_long_side`.
pub fn pixel_report(stats: &[PipelineStats], reference_long_side: u32) -> PixelSummary {
    let mut s = PixelSummary {
        scenes: stats.len(),
        reference_long_side,
        ..Default::default()
    };
    for st in stats {
        s.total_pass1 += st.pixels_pass1;
        s.total_pass2 += st.pixels_pass2;
        let canvas = SceneSpec::empty(st.canvas_width.max(1), st.canvas_height.max(1));
        let (w, h, _) = input_geometry(&canvas, reference_long_side);
        s.total_reference += (w * h) as u64;
    }
    s.total_used = s.total_pass1 + s.total_pass2;
    if s.scenes > 0 {
        s.mean_used = s.total_used as f64 / s.scenes as f64;
        s.mean_reference = s.total_reference as f64 / s.scenes as f64;
    }
    if s.total_used > 0 {
        s.reduction_ratio = s.total_reference as f64 / s.total_used as f64;
    }
    s
}

/// Detections and ground truth of one scene, with their external ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneInput {
    pub name: String,
    pub det_ids: Vec<u64>,
    pub dets: Vec<Detection>,
    pub gt_ids: Vec<u64>,
    pub gts: Vec<RotatedRect>,
    pub stats: Option<PipelineStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEval {
    pub name: String,
    pub n_dets: usize,
    pub n_gts: usize,
    pub n_matches: usize,
    #[serde(flatten)]
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: String,
    pub iou_threshold: f64,
    #[serde(flatten)]
    pub score: Score,
    /// Ids are the external detection and word ids.
    pub matches: Vec<Match>,
    pub pixels: PixelSummary,
    pub per_scene: Vec<SceneEval>,
}

impl EvalReport {
    /// Per-scene rows followed by the overall row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scene,recall,precision,f_score,dets,gts,matches\n");
        let row = |name: &str, s: &Score, d: usize, g: usize, m: usize| {
            format!(
                "{name},{:.4},{:.4},{:.4},{d},{g},{m}\n",
                s.recall, s.precision, s.f_score
            )
        };
        for e in &self.per_scene {
            out += &row(&e.name, &e.score, e.n_dets, e.n_gts, e.n_matches);
        }
        let (d, g): (usize, usize) = self
            .per_scene
            .iter()
            .fold((0, 0), |(d, g), e| (d + e.n_dets, g + e.n_gts));
        out += &row("all", &self.score, d, g, self.matches.len());
        out
    }
}

/// Scores every scene and pools the counts into one report. Scenes keep
/// their input order.
pub fn evaluate(scenes: &[SceneInput], iou_thresh: f64, reference_long_side: u32) -> EvalReport {
    let mut matches = Vec::new();
    let mut per_scene = Vec::with_capacity(scenes.len());
    let (mut nd, mut ng) = (0, 0);
    let mut stats = Vec::new();
    for sc in scenes {
        let ms = match_detections(&sc.dets, &sc.gts, iou_thresh);
        per_scene.push(SceneEval {
            name: sc.name.clone(),
            n_dets: sc.dets.len(),
            n_gts: sc.gts.len(),
            n_matches: ms.len(),
            score: score(ms.len(), sc.dets.len(), sc.gts.len()),
        });
        nd += sc.dets.len();
        ng += sc.gts.len();
        matches.extend(ms.into_iter().map(|m| Match {
            det_id: sc.det_ids[m.det_id as usize],
            gt_id: sc.gt_ids[m.gt_id as usize],
            iou: m.iou,
        }));
        stats.extend(sc.stats);
    }
    EvalReport {
        schema_version: crate::formats::SCHEMA_VERSION.to_string(),
        iou_threshold: iou_thresh,
        score: score(matches.len(), nd, ng),
        matches,
        pixels: pixel_report(&stats, reference_long_side),
        per_scene,
    }
}
