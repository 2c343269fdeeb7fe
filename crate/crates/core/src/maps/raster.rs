use crate::error::{Error, Result};
use crate::geometry::{shrink_polygon, Point2, Polygon, ShrinkParams};
use crate::maps::{normalize_scale, FloatMap, ScaleParams};
use crate::scene::SceneSpec;

/// Segmentation, shrunk, scale and text-mask channels at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMaps {
    pub seg: FloatMap,
    pub shrunk: FloatMap,
    pub scale: FloatMap,
    pub text_mask: FloatMap,
}

impl LabelMaps {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            seg: FloatMap::zeros(width, height),
            shrunk: FloatMap::zeros(width, height),
            scale: FloatMap::zeros(width, height),
            text_mask: FloatMap::zeros(width, height),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.seg.dims()
    }

    pub fn check_consistent(&self) -> Result<()> {
        self.seg.check_same_dims(&self.shrunk)?;
        self.seg.check_same_dims(&self.scale)?;
        self.seg.check_same_dims(&self.text_mask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterOptions {
    pub shrink: ShrinkParams,
    pub scale: ScaleParams,
    /// Output stride relative to the input resolution.
    pub stride: u32,
}

impl Default for RasterOptions {
    fn default() -> Self {
        Self {
            shrink: ShrinkParams::default(),
            scale: ScaleParams::default(),
            stride: 1,
        }
    }
}

/// Input resolution for rendering `scene` with the given long side:
/// `(width, height, scale)` where `scale` maps canvas to input pixels.
pub fn input_geometry(scene: &SceneSpec, long_side: u32) -> (usize, usize, f64) {
    let scale = long_side as f64 / scene.long_side() as f64;
    let w = ((scene.canvas_width as f64 * scale).round() as usize).max(1);
    let h = ((scene.canvas_height as f64 * scale).round() as usize).max(1);
    (w, h, scale)
}

/// Calls `f(x, y)` for every pixel of a `width x height` grid whose center
/// lies inside `poly`. Half-open on the right so adjacent polygons never
/// share a pixel.
pub fn fill_polygon(poly: &Polygon, width: usize, height: usize, mut f: impl FnMut(usize, usize)) {
    let (_, y0, _, y1) = poly.bounds();
    let row_lo = ((y0 - 0.5).ceil().max(0.0)) as usize;
    let row_hi = ((y1 - 0.5).ceil().max(0.0) as usize).min(height);
    let mut xs: Vec<f64> = Vec::new();
    for y in row_lo..row_hi {
        let yc = y as f64 + 0.5;
        xs.clear();
        for (a, b) in poly.edges() {
            if (a.y > yc) != (b.y > yc) {
                xs.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let lo = ((pair[0] - 0.5).ceil().max(0.0)) as usize;
            let hi = ((pair[1] - 0.5).ceil().max(0.0) as usize).min(width);
            for x in lo..hi {
                f(x, y);
            }
        }
    }
}

/// Renders seg / shrunk / scale / text-mask labels for `scene` resized so its
/// long side equals `long_side`.
///
/// Each word's scale is the height of its oriented bounding rectangle in the
/// resized image, stored as `ln(h / s_ref)`. Later words overwrite earlier
/// ones where they overlap. Words whose shrink collapses are absent from the
/// shrunk channel only.
pub fn rasterize_labels(scene: &SceneSpec, long_side: u32, opts: &RasterOptions) -> Result<LabelMaps> {
    if long_side < 32 {
        return Err(Error::Input(format!("long side must be at least 32, got {long_side}")));
    }
    if opts.stride == 0 {
        return Err(Error::Config("stride must be positive".into()));
    }
    let (in_w, in_h, scale) = input_geometry(scene, long_side);
    let stride = opts.stride as usize;
    let (w, h) = (in_w.div_ceil(stride), in_h.div_ceil(stride));
    let to_map = scale / opts.stride as f64;
    let mut maps = LabelMaps::zeros(w, h);

    for word in &scene.words {
        let poly = word.polygon()?;
        let height_in = word.rect()?.height * scale;
        let s_hat = normalize_scale(height_in, opts.scale)?;
        let Some(on_map) = poly.map_points(|p| Point2::new(p.x * to_map, p.y * to_map)) else {
            continue;
        };
        fill_polygon(&on_map, w, h, |x, y| {
            maps.seg.set(x, y, 1.0);
            maps.text_mask.set(x, y, 1.0);
            maps.scale.set(x, y, s_hat);
        });
        if let Some(shrunk) = shrink_polygon(&on_map, opts.shrink)? {
            fill_polygon(&shrunk, w, h, |x, y| maps.shrunk.set(x, y, 1.0));
        }
    }
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Word;

    fn scene_with(words: Vec<(f64, f64, f64, f64)>, w: u32, h: u32) -> SceneSpec {
        let mut s = SceneSpec::empty(w, h);
        for (i, (x, y, ww, hh)) in words.into_iter().enumerate() {
            s.words.push(Word {
                id: i as u64,
                quad: vec![
                    Point2::new(x, y),
                    Point2::new(x + ww, y),
                    Point2::new(x + ww, y + hh),
                    Point2::new(x, y + hh),
                ],
                ink: 1.0,
            });
        }
        s
    }

    #[test]
    fn scale_at_reference_height_is_zero() {
        let s = scene_with(vec![(50.0, 50.0, 100.0, 25.0)], 400, 200);
        let m = rasterize_labels(&s, 400, &RasterOptions::default()).unwrap();
        assert_eq!(m.seg.sum(), 2500.0);
        for (i, &t) in m.text_mask.data().iter().enumerate() {
            if t == 1.0 {
                assert_eq!(m.scale.data()[i], 0.0);
            }
        }
    }

    #[test]
    fn half_resolution_scale() {
        let s = scene_with(vec![(50.0, 50.0, 100.0, 25.0)], 400, 200);
        let m = rasterize_labels(&s, 200, &RasterOptions::default()).unwrap();
        assert_eq!(m.dims(), (200, 100));
        let expected = (12.5f64 / 25.0).ln();
        let (mut seen, mut all_match) = (0, true);
        for (i, &t) in m.text_mask.data().iter().enumerate() {
            if t == 1.0 {
                seen += 1;
                all_match &= (m.scale.data()[i] - expected).abs() < 1e-12;
            }
        }
        assert!(seen > 0 && all_match);
        assert!((expected + std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn empty_scene_gives_zero_maps() {
        let s = SceneSpec::empty(300, 100);
        let m = rasterize_labels(&s, 300, &RasterOptions::default()).unwrap();
        assert_eq!(m.seg.sum() + m.shrunk.sum() + m.scale.sum() + m.text_mask.sum(), 0.0);
    }

    #[test]
    fn shrunk_is_inside_seg_and_small_words_vanish() {
        let s = scene_with(vec![(10.0, 10.0, 100.0, 100.0), (200.0, 10.0, 3.0, 2.0)], 400, 200);
        let m = rasterize_labels(&s, 400, &RasterOptions::default()).unwrap();
        assert_eq!(m.shrunk.sum(), 58.0 * 58.0);
        for i in 0..m.seg.len() {
            assert!(m.shrunk.data()[i] <= m.seg.data()[i]);
        }
        // The tiny word is in seg but not in shrunk.
        assert_eq!(m.seg.get(201, 11), 1.0);
        assert_eq!(m.shrunk.get(201, 11), 0.0);
    }

    #[test]
    fn stride_downsamples() {
        let s = scene_with(vec![(0.0, 0.0, 64.0, 32.0)], 128, 64);
        let opts = RasterOptions { stride: 4, ..Default::default() };
        let m = rasterize_labels(&s, 128, &opts).unwrap();
        assert_eq!(m.dims(), (32, 16));
        assert_eq!(m.seg.sum(), 16.0 * 8.0);
        // Scale stays in input pixels: ln(32/25).
        assert!((m.scale.get(0, 0) - (32.0f64 / 25.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_long_side() {
        let s = SceneSpec::empty(300, 100);
        assert!(rasterize_labels(&s, 16, &RasterOptions::default()).is_err());
    }
}
