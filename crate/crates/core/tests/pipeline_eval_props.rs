use adascale_core::eval::{match_detections, score};
use adascale_core::geometry::{polygon_iou, RotatedRect};
use adascale_core::maps::input_geometry;
use adascale_core::oracle::{synth_infer, OracleConfig, SynthOracle};
use adascale_core::pipeline::{
    build_knapsacks, estimate_blob_scales, plan_regions, run_pipeline, single_scale_run, Detection, PipelineConfig,
    RegionPlan,
};
use adascale_core::scene::SceneSpec;
use adascale_core::synth::{generate_pair_scene, generate_scene, PairParams, SynthParams};
use proptest::prelude::*;

fn plans_for(scene: &SceneSpec, cfg: &PipelineConfig) -> Vec<RegionPlan> {
    let out = synth_infer(scene, cfg.first_pass_long_side, &OracleConfig::default()).unwrap();
    let blobs = estimate_blob_scales(&out, cfg).unwrap();
    plan_regions(&blobs, &out, cfg)
}

fn best_iou(d: &Detection, gts: &[RotatedRect]) -> f64 {
    gts.iter()
        .map(|g| polygon_iou(&d.rect.to_polygon(), &g.to_polygon()))
        .fold(0.0, f64::max)
}

fn spread_scene(seed: u64, n_words: usize) -> SceneSpec {
    generate_scene(&SynthParams {
        n_words,
        height_range: (12.0, 60.0),
        angle_range: (-15.0, 15.0),
        margin: 40.0,
        seed,
        ..Default::default()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn knapsack_words_are_canonical(seed in 0u64..500) {
        let cfg = PipelineConfig::default();
        let scene = spread_scene(seed, 12);
        let plans = plans_for(&scene, &cfg);
        let build = build_knapsacks(&scene, &plans, &cfg).unwrap();
        let target = cfg.kappa * cfg.s_ref;
        let mut checked = 0;
        for (bin, ks) in build.scenes.iter().enumerate() {
            for w in &ks.words {
                let kr = w.rect().unwrap();
                let t = build
                    .transforms_for(bin)
                    .into_iter()
                    .find(|t| t.region.contains(kr.cx, kr.cy))
                    .unwrap();
                let c = t.to_original(adascale_core::geometry::Point2::new(kr.cx, kr.cy));
                let Some(orig) = scene.words.iter().find(|o| o.polygon().unwrap().contains(c)) else {
                    continue;
                };
                let or = orig.rect().unwrap();
                // Unclipped words only.
                let full = or.area() * t.scale * t.scale;
                if (kr.area() - full).abs() > 1e-6 * full {
                    continue;
                }
                let estimate = target / t.scale;
                if estimate < or.height / 2.0 || estimate > or.height * 2.0 {
                    continue;
                }
                prop_assert!((0.5 * target..=2.0 * target).contains(&kr.height), "{} vs {}", kr.height, target);
                checked += 1;
            }
        }
        prop_assert!(checked > 0 || scene.words.is_empty() || plans.is_empty());
    }

    #[test]
    fn pixel_accounting_is_exact(seed in 0u64..500) {
        let cfg = PipelineConfig::default();
        let scene = spread_scene(seed, 8);
        let (_, stats) = run_pipeline(&scene, &cfg, &SynthOracle::default()).unwrap();
        let (w, h, _) = input_geometry(&scene, cfg.first_pass_long_side);
        prop_assert_eq!(stats.pixels_pass1, (w * h) as u64);
        let build = build_knapsacks(&scene, &plans_for(&scene, &cfg), &cfg).unwrap();
        let bins: u64 = build.layouts.iter().map(|l| l.area()).sum();
        prop_assert_eq!(stats.pixels_pass2, bins);
        prop_assert_eq!(stats.knapsack_count, build.layouts.len());
    }

    #[test]
    fn adding_a_word_never_shrinks_planned_area(seed in 0u64..500) {
        let cfg = PipelineConfig::default();
        let full = spread_scene(seed, 10);
        let mut fewer = full.clone();
        fewer.words.pop();
        let small = plans_for(&fewer, &cfg);
        let large = plans_for(&full, &cfg);
        for p in &small {
            let r = p.source_rect;
            prop_assert!(
                large.iter().any(|q| {
                    let s = q.source_rect;
                    s.x0 <= r.x0 + 1e-9 && s.y0 <= r.y0 + 1e-9 && s.x1 >= r.x1 - 1e-9 && s.y1 >= r.y1 - 1e-9
                }),
                "{:?} not covered", r
            );
        }
    }

    #[test]
    fn planning_is_deterministic(seed in 0u64..500) {
        let cfg = PipelineConfig::default();
        let scene = spread_scene(seed, 8);
        prop_assert_eq!(plans_for(&scene, &cfg), plans_for(&scene, &cfg));
    }
}

fn rect_strategy() -> impl Strategy<Value = RotatedRect> {
    (0.0..200.0f64, 0.0..200.0f64, 5.0..60.0f64, 5.0..60.0f64, -1.5..1.5f64)
        .prop_map(|(cx, cy, w, h, a)| RotatedRect::new(cx, cy, w, h, a).unwrap())
}

fn dets_of(rects: &[RotatedRect]) -> Vec<Detection> {
    rects.iter().map(|&rect| Detection { rect, confidence: 1.0 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matching_is_one_to_one(dets in prop::collection::vec(rect_strategy(), 0..12), gts in prop::collection::vec(rect_strategy(), 0..12)) {
        let m = match_detections(&dets_of(&dets), &gts, 0.5);
        let mut d: Vec<u64> = m.iter().map(|x| x.det_id).collect();
        let mut g: Vec<u64> = m.iter().map(|x| x.gt_id).collect();
        d.sort();
        d.dedup();
        g.sort();
        g.dedup();
        prop_assert_eq!(d.len(), m.len());
        prop_assert_eq!(g.len(), m.len());
        prop_assert!(m.len() <= dets.len().min(gts.len()));
        prop_assert!(m.iter().all(|x| x.iou >= 0.5));
    }

    #[test]
    fn f_bounded_by_twice_min(n_gts in 0usize..30, n_dets in 0usize..30, frac in 0.0..=1.0f64) {
        let n = ((n_gts.min(n_dets)) as f64 * frac).floor() as usize;
        let s = score(n, n_dets, n_gts);
        prop_assert!(s.f_score <= 2.0 * s.precision.min(s.recall) + 1e-12);
        prop_assert!(s.f_score <= 1.0);
    }

    #[test]
    fn correct_detection_never_hurts(dets in prop::collection::vec(rect_strategy(), 0..10), gts in prop::collection::vec(rect_strategy(), 1..10)) {
        let base = dets_of(&dets);
        let m = match_detections(&base, &gts, 0.5);
        let before = score(m.len(), base.len(), gts.len());
        let Some(free) = (0..gts.len() as u64).find(|g| m.iter().all(|x| x.gt_id != *g)) else {
            return Ok(());
        };
        let mut more = base.clone();
        more.push(Detection { rect: gts[free as usize], confidence: 1.0 });
        let after = score(match_detections(&more, &gts, 0.5).len(), more.len(), gts.len());
        prop_assert!(after.recall >= before.recall);
        prop_assert!(after.f_score >= before.f_score);
    }
}

fn single_pair(seed: u64) -> SceneSpec {
    generate_pair_scene(&PairParams {
        n_pairs: 1,
        seed,
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn close_pair_merges_at_low_resolution() {
    let cfg = PipelineConfig::default();
    let scene = single_pair(0);
    let (dets, _) = single_scale_run(&scene, cfg.first_pass_long_side, &cfg, &SynthOracle::default()).unwrap();
    assert_eq!(dets.len(), 1, "{dets:?}");
}

#[test]
fn pipeline_splits_the_pair() {
    let cfg = PipelineConfig::default();
    let oracle = SynthOracle::default();
    for seed in 0..5 {
        let scene = single_pair(seed);
        let (dets, _) = run_pipeline(&scene, &cfg, &oracle).unwrap();
        assert_eq!(dets.len(), 2, "seed {seed}: {dets:?}");
        let gts = scene.gt_rects().unwrap();
        for d in &dets {
            assert!(best_iou(d, &gts) >= 0.8, "seed {seed}: {d:?}");
        }
    }
}

#[test]
fn sparse_scene_uses_a_quarter_of_reference_pixels() {
    let cfg = PipelineConfig::default();
    let oracle = SynthOracle::default();
    let scene = generate_scene(&SynthParams {
        n_words: 10,
        height_range: (30.0, 80.0),
        density: Some(0.03),
        angle_range: (-20.0, 20.0),
        margin: 40.0,
        seed: 0,
        ..Default::default()
    })
    .unwrap();
    let (_, stats) = run_pipeline(&scene, &cfg, &oracle).unwrap();
    let (_, at_l) = single_scale_run(&scene, cfg.reference_long_side, &cfg, &oracle).unwrap();
    let used = stats.pixels_pass1 + stats.pixels_pass2;
    assert!(
        4 * used <= at_l.pixels_pass1,
        "pass1 {} + pass2 {} vs reference {}",
        stats.pixels_pass1,
        stats.pixels_pass2,
        at_l.pixels_pass1
    );
}

#[test]
fn empty_scene_has_no_second_pass() {
    let cfg = PipelineConfig::default();
    let (dets, stats) = run_pipeline(&SceneSpec::empty(1600, 900), &cfg, &SynthOracle::default()).unwrap();
    assert!(dets.is_empty());
    assert_eq!((stats.pixels_pass2, stats.knapsack_count), (0, 0));
}
