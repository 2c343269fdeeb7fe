//! Segmentation and scale objectives, evaluated on concrete maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{FloatMap, LabelMaps};

/// Negatives kept by hard-negative mining when a map has no positives.
pub const OHNM_EMPTY_KEEP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub w_c: f64,
    pub w_s: f64,
    pub w_scale: f64,
    pub ohnm_ratio: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            w_c: 0.5,
            w_s: 0.5,
            w_scale: 0.1,
            ohnm_ratio: 3.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_c, self.w_s, self.w_scale, self.ohnm_ratio];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config(format!("loss weights must be non-negative: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub segment: f64,
    pub scale: f64,
    pub total: f64,
}

/// `1 - 2 sum(S G) / (sum(S^2) + sum(G^2))` over pixels where `mask >= 0.5`.
/// Two empty maps agree perfectly and score 0.
pub fn dice_loss(s: &FloatMap, g: &FloatMap, mask: Option<&FloatMap>) -> Result<f64> {
    s.check_same_dims(g)?;
    if let Some(m) = mask {
        s.check_same_dims(m)?;
    }
    let (mut inter, mut ss, mut gg) = (0.0, 0.0, 0.0);
    for i in 0..s.len() {
        if mask.is_some_and(|m| m.data()[i] < 0.5) {
            continue;
        }
        let (a, b) = (s.data()[i], g.data()[i]);
        inter += a * b;
        ss += a * a;
        gg += b * b;
    }
    let den = ss + gg;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - 2.0 * inter / den)
}

/// Keeps every positive plus the `ceil(ratio * positives)` negatives with
/// the highest predicted confidence; ties go to the lower row-major index.
pub fn ohnm_mask(s: &FloatMap, g: &FloatMap, ratio: f64) -> Result<FloatMap> {
    s.check_same_dims(g)?;
    let mut mask = FloatMap::zeros(s.width(), s.height());
    let mut negatives: Vec<usize> = Vec::new();
    let mut positives = 0usize;
    for (i, &gv) in g.data().iter().enumerate() {
        if gv >= 0.5 {
            mask.data_mut()[i] = 1.0;
            positives += 1;
        } else {
            negatives.push(i);
        }
    }
    let keep = if positives == 0 {
        OHNM_EMPTY_KEEP
    } else {
        let k = (ratio * positives as f64).ceil();
        if k >= negatives.len() as f64 {
            negatives.len()
        } else {
            k as usize
        }
    }
    .min(negatives.len());
    let sd = s.data();
    negatives.sort_by(|&a, &b| sd[b].total_cmp(&sd[a]).then(a.cmp(&b)));
    for &i in &negatives[..keep] {
        mask.data_mut()[i] = 1.0;
    }
    Ok(mask)
}

/// `w_c * dice(seg, OHNM) + w_s * dice(shrunk, inside gt text)`.
pub fn segment_loss(pred: &LabelMaps, gt: &LabelMaps, w: &LossWeights) -> Result<f64> {
    pred.check_consistent()?;
    gt.check_consistent()?;
    pred.seg.check_same_dims(&gt.seg)?;
    let hard = ohnm_mask(&pred.seg, &gt.seg, w.ohnm_ratio)?;
    let l_c = dice_loss(&pred.seg, &gt.seg, Some(&hard))?;
    let l_s = dice_loss(&pred.shrunk, &gt.shrunk, Some(&gt.seg))?;
    Ok(w.w_c * l_c + w.w_s * l_s)
}

pub fn smooth_l1(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        0.5 * x * x
    } else {
        a - 0.5
    }
}

/// Mean smooth-L1 of `pred - gt` over text pixels; 0 when there are none.
pub fn scale_loss(pred: &FloatMap, gt: &FloatMap, text_mask: &FloatMap) -> Result<f64> {
    pred.check_same_dims(gt)?;
    pred.check_same_dims(text_mask)?;
    let (mut acc, mut n) = (0.0, 0usize);
    for i in 0..pred.len() {
        if text_mask.data()[i] >= 0.5 {
            acc += smooth_l1(pred.data()[i] - gt.data()[i]);
            n += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { acc / n as f64 })
}

pub fn total_loss(pred: &LabelMaps, gt: &LabelMaps, w: &LossWeights) -> Result<LossBreakdown> {
    w.validate()?;
    let segment = segment_loss(pred, gt, w)?;
    let scale = scale_loss(&pred.scale, &gt.scale, &gt.text_mask)?;
    Ok(LossBreakdown {
        segment,
        scale,
        total: segment + w.w_scale * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: usize, h: usize, v: &[f64]) -> FloatMap {
        FloatMap::from_vec(w, h, v.to_vec()).unwrap()
    }

    fn labels(seg: FloatMap, shrunk: FloatMap) -> LabelMaps {
        let (w, h) = seg.dims();
        LabelMaps {
            text_mask: seg.clone(),
            seg,
            shrunk,
            scale: FloatMap::zeros(w, h),
        }
    }

    #[test]
    fn dice_examples() {
        let g = map(4, 1, &[1.0, 0.0, 1.0, 1.0]);
        assert_eq!(dice_loss(&g, &g, None).unwrap(), 0.0);
        assert_eq!(dice_loss(&FloatMap::zeros(4, 1), &g, None).unwrap(), 1.0);
        let s = map(2, 1, &[0.5, 0.5]);
        let g = map(2, 1, &[1.0, 0.0]);
        assert!((dice_loss(&s, &g, None).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let z = FloatMap::zeros(3, 3);
        assert_eq!(dice_loss(&z, &z, None).unwrap(), 0.0);
        assert!(matches!(
            dice_loss(&z, &FloatMap::zeros(2, 2), None),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn dice_mask_restricts_sums() {
        let s = map(2, 1, &[1.0, 1.0]);
        let g = map(2, 1, &[1.0, 0.0]);
        let m = map(2, 1, &[1.0, 0.0]);
        assert_eq!(dice_loss(&s, &g, Some(&m)).unwrap(), 0.0);
    }

    #[test]
    fn ohnm_counts() {
        let mut g = vec![0.0; 104];
        for v in g.iter_mut().take(4) {
            *v = 1.0;
        }
        let s: Vec<f64> = (0..104).map(|i| (i as f64) / 104.0).collect();
        let m = ohnm_mask(&map(104, 1, &s), &map(104, 1, &g), 3.0).unwrap();
        assert_eq!(m.sum(), 16.0);
        // Kept negatives are the 12 most confident ones.
        assert!(m.data()[92..].iter().all(|&v| v == 1.0));

        let all = FloatMap::filled(5, 5, 1.0);
        assert_eq!(ohnm_mask(&all, &all, 3.0).unwrap().sum(), 25.0);

        let m = ohnm_mask(&map(104, 1, &s), &map(104, 1, &g), 1e9).unwrap();
        assert_eq!(m.sum(), 104.0);
    }

    #[test]
    fn ohnm_without_positives_keeps_top_negatives() {
        let s: Vec<f64> = (0..1500).map(|i| ((i * 7919) % 1500) as f64).collect();
        let m = ohnm_mask(&map(1500, 1, &s), &FloatMap::zeros(1500, 1), 3.0).unwrap();
        assert_eq!(m.sum(), OHNM_EMPTY_KEEP as f64);
        let small = ohnm_mask(&FloatMap::zeros(10, 1), &FloatMap::zeros(10, 1), 3.0).unwrap();
        assert_eq!(small.sum(), 10.0);
    }

    #[test]
    fn ohnm_ties_prefer_low_index() {
        let g = map(5, 1, &[1.0, 0.0, 0.0, 0.0, 0.0]);
        let s = FloatMap::zeros(5, 1);
        let m = ohnm_mask(&s, &g, 2.0).unwrap();
        assert_eq!(m.data(), &[1.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn segment_loss_examples() {
        let w = LossWeights::default();
        let seg = map(4, 1, &[1.0, 1.0, 1.0, 0.0]);
        let shrunk = map(4, 1, &[0.0, 1.0, 0.0, 0.0]);
        let gt = labels(seg.clone(), shrunk.clone());
        assert_eq!(segment_loss(&gt, &gt, &w).unwrap(), 0.0);

        let half = labels(seg.clone(), FloatMap::zeros(4, 1));
        assert!((segment_loss(&half, &gt, &w).unwrap() - 0.5).abs() < 1e-15);

        let worst = labels(FloatMap::zeros(4, 1), FloatMap::zeros(4, 1));
        assert!((segment_loss(&worst, &gt, &w).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_l1_examples() {
        assert_eq!(smooth_l1(0.0), 0.0);
        assert_eq!(smooth_l1(0.5), 0.125);
        assert_eq!(smooth_l1(2.0), 1.5);
        assert_eq!(smooth_l1(-2.0), 1.5);
    }

    #[test]
    fn scale_loss_examples() {
        let gt = map(3, 1, &[0.1, -0.2, 0.0]);
        let mask = map(3, 1, &[1.0, 1.0, 0.0]);
        assert_eq!(scale_loss(&gt, &gt, &mask).unwrap(), 0.0);
        let pred = gt.map(|v| v + 0.5);
        assert!((scale_loss(&pred, &gt, &mask).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(scale_loss(&pred, &gt, &FloatMap::zeros(3, 1)).unwrap(), 0.0);
    }

    #[test]
    fn total_loss_examples() {
        let seg = map(4, 1, &[1.0, 1.0, 1.0, 0.0]);
        let shrunk = map(4, 1, &[0.0, 1.0, 0.0, 0.0]);
        let gt = labels(seg.clone(), shrunk);
        let w = LossWeights::default();
        let b = total_loss(&gt, &gt, &w).unwrap();
        assert_eq!((b.segment, b.scale, b.total), (0.0, 0.0, 0.0));

        let mut pred = labels(seg, FloatMap::zeros(4, 1));
        pred.scale = gt.scale.map(|v| v + 0.5);
        let b = total_loss(&pred, &gt, &w).unwrap();
        assert!((b.segment - 0.5).abs() < 1e-15);
        assert!((b.scale - 0.125).abs() < 1e-15);
        assert!((b.total - 0.5125).abs() < 1e-15);

        let zero = LossWeights { w_c: 0.0, w_s: 0.0, w_scale: 0.0, ohnm_ratio: 3.0 };
        assert_eq!(total_loss(&pred, &gt, &zero).unwrap().total, 0.0);
        let neg = LossWeights { w_c: -1.0, ..w };
        assert!(total_loss(&pred, &gt, &neg).is_err());
    }
}
