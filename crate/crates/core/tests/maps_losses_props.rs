use adascale_core::geometry::{Point2, RotatedRect};
use adascale_core::losses::{dice_loss, ohnm_mask, scale_loss, segment_loss, smooth_l1, total_loss, LossWeights};
use adascale_core::maps::{
    average_map, connected_components, denormalize_scale, normalize_scale, pfm, rasterize_labels, FloatMap, LabelMaps,
    RasterOptions, ScaleParams,
};
use adascale_core::scene::{SceneSpec, Word};
use proptest::prelude::*;

fn binary_map(w: usize, h: usize) -> impl Strategy<Value = FloatMap> {
    prop::collection::vec(prop::bool::ANY, w * h).prop_map(move |bits| {
        FloatMap::from_vec(w, h, bits.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect()).unwrap()
    })
}

fn unit_map(w: usize, h: usize) -> impl Strategy<Value = FloatMap> {
    prop::collection::vec(0.0..=1.0f64, w * h).prop_map(move |v| FloatMap::from_vec(w, h, v).unwrap())
}

fn word_strategy() -> impl Strategy<Value = RotatedRect> {
    (60.0..540.0f64, 60.0..340.0f64, 10.0..120.0f64, 4.0..40.0f64, -1.5..1.5f64)
        .prop_map(|(cx, cy, w, h, a)| RotatedRect::new(cx, cy, w, h, a).unwrap())
}

fn scene_of(rects: &[RotatedRect]) -> SceneSpec {
    let mut s = SceneSpec::empty(600, 400);
    for (i, r) in rects.iter().enumerate() {
        s.words.push(Word {
            id: i as u64,
            quad: r.corners().to_vec(),
            ink: 1.0,
        });
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shrunk_labels_inside_seg(rects in prop::collection::vec(word_strategy(), 0..6), ls in 100u32..700) {
        let maps = rasterize_labels(&scene_of(&rects), ls, &RasterOptions::default()).unwrap();
        for (s, g) in maps.shrunk.data().iter().zip(maps.seg.data()) {
            prop_assert!(*s <= *g);
        }
    }

    #[test]
    fn raster_area_within_boundary_band(r in word_strategy()) {
        let scene = scene_of(&[r]);
        let maps = rasterize_labels(&scene, 600, &RasterOptions::default()).unwrap();
        let poly = r.to_polygon();
        let diff = (maps.seg.sum() - poly.area()).abs();
        prop_assert!(diff <= poly.perimeter(), "{} vs {}", maps.seg.sum(), poly.area());
    }

    #[test]
    fn normalization_inverts(s in 1.0..1e4f64) {
        let p = ScaleParams::default();
        let back = denormalize_scale(normalize_scale(s, p).unwrap(), p);
        prop_assert!((back - s).abs() <= 1e-12 * s);
    }

    #[test]
    fn components_partition_foreground(m in binary_map(17, 13)) {
        let blobs = connected_components(&m);
        let mut seen = vec![false; m.len()];
        for b in &blobs {
            for &(x, y) in &b.pixels {
                let i = y as usize * 17 + x as usize;
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        for (i, &v) in m.data().iter().enumerate() {
            prop_assert_eq!(seen[i], v >= 0.5);
        }
    }

    #[test]
    fn average_is_between(a in unit_map(6, 5), b in unit_map(6, 5)) {
        let avg = average_map(&a, &b).unwrap();
        for ((&m, &x), &y) in avg.data().iter().zip(a.data()).zip(b.data()) {
            prop_assert!(m >= x.min(y) && m <= x.max(y));
        }
    }

    #[test]
    fn dice_bounded_and_symmetric(s in binary_map(8, 8), g in binary_map(8, 8), soft in unit_map(8, 8)) {
        let d = dice_loss(&s, &g, None).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - dice_loss(&g, &s, None).unwrap()).abs() <= 1e-15);
        let ds = dice_loss(&soft, &g, None).unwrap();
        prop_assert!((0.0..=1.0).contains(&ds));
        prop_assert_eq!(d == 0.0, s == g);
    }

    #[test]
    fn dice_zero_iff_equal_on_mask(s in binary_map(8, 8), g in binary_map(8, 8), mask in binary_map(8, 8)) {
        let d = dice_loss(&s, &g, Some(&mask)).unwrap();
        let equal_on_mask = s
            .data()
            .iter()
            .zip(g.data())
            .zip(mask.data())
            .all(|((a, b), m)| *m == 0.0 || a == b);
        prop_assert_eq!(d == 0.0, equal_on_mask);
    }

    #[test]
    fn smooth_l1_is_c1_at_the_knee(eps in 1e-9..1e-4f64) {
        prop_assert!((smooth_l1(1.0 - eps) - smooth_l1(1.0 + eps)).abs() <= 2.0 * eps + 1e-15);
        let h = 1e-3;
        let left = (3.0 * smooth_l1(1.0) - 4.0 * smooth_l1(1.0 - h) + smooth_l1(1.0 - 2.0 * h)) / (2.0 * h);
        let right = (smooth_l1(1.0 + h) - smooth_l1(1.0)) / h;
        prop_assert!((left - right).abs() <= 1e-9);
    }

    #[test]
    fn total_monotone_in_scale_error(
        seg in binary_map(6, 6),
        err_a in 0.0..3.0f64,
        extra in 0.0..3.0f64,
    ) {
        let gt = LabelMaps { seg: seg.clone(), shrunk: seg.clone(), scale: FloatMap::zeros(6, 6), text_mask: seg.clone() };
        let pred = |e: f64| LabelMaps { scale: FloatMap::filled(6, 6, e), ..gt.clone() };
        let w = LossWeights::default();
        let a = total_loss(&pred(err_a), &gt, &w).unwrap();
        let b = total_loss(&pred(err_a + extra), &gt, &w).unwrap();
        prop_assert!(b.scale >= a.scale && b.total >= a.total);
        prop_assert_eq!(a.segment, b.segment);
    }

    #[test]
    fn pfm_round_trip(m in prop::collection::vec(-1e6..1e6f64, 35)) {
        let m = FloatMap::from_vec(7, 5, m).unwrap().to_f32_precision();
        prop_assert_eq!(pfm::decode(&pfm::encode(&m)).unwrap(), m);
    }
}

#[test]
fn label_examples() {
    let mut s = SceneSpec::empty(400, 200);
    s.words.push(Word {
        id: 0,
        quad: vec![
            Point2::new(100.0, 50.0),
            Point2::new(200.0, 50.0),
            Point2::new(200.0, 75.0),
            Point2::new(100.0, 75.0),
        ],
        ink: 1.0,
    });
    let full = rasterize_labels(&s, 400, &RasterOptions::default()).unwrap();
    let half = rasterize_labels(&s, 200, &RasterOptions::default()).unwrap();
    for (maps, expected) in [(&full, 0.0), (&half, (0.5f64).ln())] {
        for (v, m) in maps.scale.data().iter().zip(maps.text_mask.data()) {
            if *m == 1.0 {
                assert!((v - expected).abs() < 1e-12);
            }
        }
    }
    let empty = rasterize_labels(&SceneSpec::empty(300, 300), 300, &RasterOptions::default()).unwrap();
    assert_eq!(empty.seg.sum() + empty.shrunk.sum() + empty.text_mask.sum(), 0.0);
}

#[test]
fn component_examples() {
    let mut m = FloatMap::zeros(9, 3);
    for y in 0..3 {
        for x in (0..3).chain(5..8) {
            m.set(x, y, 1.0);
        }
    }
    assert_eq!(connected_components(&m).len(), 2);
    let mut d = FloatMap::zeros(4, 4);
    d.set(0, 0, 1.0);
    d.set(1, 1, 1.0);
    assert_eq!(connected_components(&d).len(), 1);
    assert!(connected_components(&FloatMap::zeros(5, 5)).is_empty());
}

#[test]
fn loss_examples() {
    let g = |v: &[f64]| FloatMap::from_vec(v.len(), 1, v.to_vec()).unwrap();
    // 4 positives, 100 negatives, ratio 3.
    let mut gt = vec![0.0; 104];
    gt[..4].fill(1.0);
    let pred: Vec<f64> = (0..104).map(|i| i as f64 / 104.0).collect();
    assert_eq!(ohnm_mask(&g(&pred), &g(&gt), 3.0).unwrap().sum(), 16.0);
    assert_eq!(ohnm_mask(&g(&pred), &g(&[1.0; 104]), 3.0).unwrap().sum(), 104.0);
    assert_eq!(ohnm_mask(&g(&pred), &g(&gt), 1000.0).unwrap().sum(), 104.0);

    for (x, y) in [(0.0, 0.0), (0.5, 0.125), (2.0, 1.5)] {
        assert_eq!(smooth_l1(x), y);
    }
    let mask = g(&[1.0, 1.0, 0.0]);
    assert_eq!(scale_loss(&g(&[0.5, -0.5, 9.0]), &g(&[0.0; 3]), &mask).unwrap(), 0.125);
    assert_eq!(scale_loss(&g(&[3.0; 3]), &g(&[0.0; 3]), &g(&[0.0; 3])).unwrap(), 0.0);

    let seg = g(&[1.0, 1.0, 0.0, 0.0]);
    let gt = LabelMaps { seg: seg.clone(), shrunk: seg.clone(), scale: g(&[0.0; 4]), text_mask: seg.clone() };
    let w = LossWeights::default();
    assert_eq!(total_loss(&gt, &gt, &w).unwrap().total, 0.0);
    let no_shrunk = LabelMaps { shrunk: g(&[0.0; 4]), ..gt.clone() };
    assert_eq!(segment_loss(&no_shrunk, &gt, &w).unwrap(), 0.5);
    let inverted = g(&[0.0, 0.0, 1.0, 1.0]);
    let wrong = LabelMaps { seg: inverted.clone(), shrunk: inverted, ..gt.clone() };
    assert_eq!(segment_loss(&wrong, &gt, &w).unwrap(), 1.0);
    let zero = LossWeights { w_c: 0.0, w_s: 0.0, w_scale: 0.0, ..w };
    assert_eq!(total_loss(&wrong, &gt, &zero).unwrap().total, 0.0);
}
