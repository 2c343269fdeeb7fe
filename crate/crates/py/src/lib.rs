//! Python bindings. Geometry and detections are small classes; structured
//! results (stats, layouts, reports) come back as plain dicts.

use adascale_core::eval::{evaluate, SceneInput, DEFAULT_IOU_THRESHOLD};
use adascale_core::formats::{RunConfig, SceneFile};
use adascale_core::geometry::{self, Point2, Polygon, ShrinkParams};
use adascale_core::losses::{self, LossWeights};
use adascale_core::maps::{self, FloatMap, LabelMaps, RasterOptions, ScaleParams};
use adascale_core::oracle::SynthOracle;
use adascale_core::packing::{self, PackItem};
use adascale_core::pipeline::{self, Detection};
use adascale_core::scene::SceneSpec;
use adascale_core::synth::{self, PairParams, SynthParams};
use adascale_core::Error;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Invariant(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn points(pts: Vec<(f64, f64)>) -> Vec<Point2> {
    pts.into_iter().map(|(x, y)| Point2::new(x, y)).collect()
}

fn polygon(pts: Vec<(f64, f64)>) -> PyResult<Polygon> {
    Polygon::new(points(pts)).map_err(py_err)
}

fn tuples(pts: &[Point2]) -> Vec<(f64, f64)> {
    pts.iter().map(|p| (p.x, p.y)).collect()
}

fn shrink(r: f64) -> PyResult<ShrinkParams> {
    ShrinkParams::new(r).map_err(py_err)
}

#[pyclass(name = "RotatedRect", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyRect(geometry::RotatedRect);

#[pymethods]
impl PyRect {
    #[new]
    #[pyo3(signature = (cx, cy, width, height, angle = 0.0))]
    fn new(cx: f64, cy: f64, width: f64, height: f64, angle: f64) -> PyResult<Self> {
        geometry::RotatedRect::new(cx, cy, width, height, angle)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn cx(&self) -> f64 {
        self.0.cx
    }

    #[getter]
    fn cy(&self) -> f64 {
        self.0.cy
    }

    #[getter]
    fn width(&self) -> f64 {
        self.0.width
    }

    #[getter]
    fn height(&self) -> f64 {
        self.0.height
    }

    #[getter]
    fn angle(&self) -> f64 {
        self.0.angle
    }

    fn area(&self) -> f64 {
        self.0.area()
    }

    fn corners(&self) -> Vec<(f64, f64)> {
        tuples(&self.0.corners())
    }

    fn iou(&self, other: PyRef<'_, PyRect>) -> f64 {
        geometry::polygon_iou(&self.0.to_polygon(), &other.0.to_polygon())
    }

    fn __repr__(&self) -> String {
        let r = self.0;
        format!(
            "RotatedRect(cx={}, cy={}, width={}, height={}, angle={})",
            r.cx, r.cy, r.width, r.height, r.angle
        )
    }
}

#[pyclass(name = "Detection", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyDetection(Detection);

#[pymethods]
impl PyDetection {
    #[new]
    #[pyo3(signature = (rect, confidence = 1.0))]
    fn new(rect: PyRef<'_, PyRect>, confidence: f64) -> Self {
        Self(Detection { rect: rect.0, confidence })
    }

    #[getter]
    fn rect(&self) -> PyRect {
        PyRect(self.0.rect)
    }

    #[getter]
    fn confidence(&self) -> f64 {
        self.0.confidence
    }

    fn __repr__(&self) -> String {
        format!("Detection({}, confidence={})", PyRect(self.0.rect).__repr__(), self.0.confidence)
    }
}

#[pyclass(name = "Scene", skip_from_py_object)]
#[derive(Clone)]
struct PyScene(SceneSpec);

#[pymethods]
impl PyScene {
    #[new]
    fn new(canvas_width: u32, canvas_height: u32) -> Self {
        Self(SceneSpec::empty(canvas_width, canvas_height))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: SceneFile =
            adascale_core::formats::parse_json(text, std::path::Path::new("<string>")).map_err(py_err)?;
        file.into_scene().map(Self).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        adascale_core::formats::to_json(&SceneFile::from(&self.0)).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (seed = 0, n_words = 50, canvas = (2000, 1500), height_range = (16.0, 48.0), angle_range = (0.0, 0.0), density = None))]
    fn synth(
        seed: u64,
        n_words: usize,
        canvas: (u32, u32),
        height_range: (f64, f64),
        angle_range: (f64, f64),
        density: Option<f64>,
    ) -> PyResult<Self> {
        synth::generate_scene(&SynthParams {
            canvas_width: canvas.0,
            canvas_height: canvas.1,
            n_words,
            height_range,
            angle_range,
            density,
            seed,
            ..Default::default()
        })
        .map(Self)
        .map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (seed = 0, n_pairs = 8))]
    fn pairs(seed: u64, n_pairs: usize) -> PyResult<Self> {
        synth::generate_pair_scene(&PairParams { n_pairs, seed, ..Default::default() })
            .map(Self)
            .map_err(py_err)
    }

    /// Adds a word given its corner points; returns its id.
    fn add_word(&mut self, quad: Vec<(f64, f64)>) -> PyResult<u64> {
        let id = self.0.words.iter().map(|w| w.id + 1).max().unwrap_or(0);
        let mut next = self.0.clone();
        next.words.push(adascale_core::scene::Word { id, quad: points(quad), ink: 1.0 });
        self.0 = next.validated().map_err(py_err)?;
        Ok(id)
    }

    #[getter]
    fn canvas_width(&self) -> u32 {
        self.0.canvas_width
    }

    #[getter]
    fn canvas_height(&self) -> u32 {
        self.0.canvas_height
    }

    fn __len__(&self) -> usize {
        self.0.words.len()
    }

    fn gt_rects(&self) -> PyResult<Vec<PyRect>> {
        Ok(self.0.gt_rects().map_err(py_err)?.into_iter().map(PyRect).collect())
    }
}

/// Pipeline, oracle and single-pass settings.
#[pyclass(name = "RunConfig", skip_from_py_object)]
#[derive(Clone, Default)]
struct PyConfig(RunConfig);

#[pymethods]
impl PyConfig {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let cfg: RunConfig =
            adascale_core::formats::parse_json(text, std::path::Path::new("<string>")).map_err(py_err)?;
        cfg.validate().map_err(py_err)?;
        Ok(Self(cfg))
    }

    fn to_json(&self) -> PyResult<String> {
        adascale_core::formats::to_json(&self.0).map_err(py_err)
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.0.pipeline.kappa
    }

    #[setter]
    fn set_kappa(&mut self, v: f64) {
        self.0.pipeline.kappa = v;
    }

    #[getter]
    fn first_pass_long_side(&self) -> u32 {
        self.0.pipeline.first_pass_long_side
    }

    #[setter]
    fn set_first_pass_long_side(&mut self, v: u32) {
        self.0.pipeline.first_pass_long_side = v;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.oracle.seed
    }

    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.0.oracle.seed = v;
    }

    fn ideal_oracle(&mut self) {
        self.0.oracle = adascale_core::oracle::OracleConfig::ideal();
    }
}

fn config_or_default(cfg: Option<PyRef<'_, PyConfig>>) -> PyResult<(RunConfig, SynthOracle)> {
    let cfg = cfg.map(|c| c.0.clone()).unwrap_or_default();
    cfg.validate().map_err(py_err)?;
    let raster = RasterOptions {
        shrink: ShrinkParams::new(cfg.pipeline.shrink_r).map_err(py_err)?,
        scale: ScaleParams::new(cfg.pipeline.s_ref).map_err(py_err)?,
        ..Default::default()
    };
    let oracle = SynthOracle::new(cfg.oracle, raster);
    Ok((cfg, oracle))
}

fn detections_out<'py>(
    py: Python<'py>,
    dets: Vec<Detection>,
    stats: &pipeline::PipelineStats,
) -> PyResult<(Vec<PyDetection>, Bound<'py, PyAny>)> {
    Ok((dets.into_iter().map(PyDetection).collect(), to_py(py, stats)?))
}

/// One pass at `long_side`; returns (detections, stats).
#[pyfunction]
#[pyo3(signature = (scene, long_side = None, config = None))]
fn single_scale_run<'py>(
    py: Python<'py>,
    scene: PyRef<'_, PyScene>,
    long_side: Option<u32>,
    config: Option<PyRef<'_, PyConfig>>,
) -> PyResult<(Vec<PyDetection>, Bound<'py, PyAny>)> {
    let (cfg, oracle) = config_or_default(config)?;
    let ls = long_side
        .or(cfg.single_long_side)
        .unwrap_or(cfg.pipeline.first_pass_long_side);
    let (dets, stats) = pipeline::single_scale_run(&scene.0, ls, &cfg.pipeline, &oracle).map_err(py_err)?;
    detections_out(py, dets, &stats)
}

/// Two-pass adaptive run; returns (detections, stats).
#[pyfunction]
#[pyo3(signature = (scene, config = None))]
fn run_pipeline<'py>(
    py: Python<'py>,
    scene: PyRef<'_, PyScene>,
    config: Option<PyRef<'_, PyConfig>>,
) -> PyResult<(Vec<PyDetection>, Bound<'py, PyAny>)> {
    let (cfg, oracle) = config_or_default(config)?;
    let (dets, stats) = pipeline::run_pipeline(&scene.0, &cfg.pipeline, &oracle).map_err(py_err)?;
    detections_out(py, dets, &stats)
}

#[pyfunction]
#[pyo3(signature = (scene, detections, iou = DEFAULT_IOU_THRESHOLD, reference_long_side = 1440))]
fn evaluate_scene<'py>(
    py: Python<'py>,
    scene: PyRef<'_, PyScene>,
    detections: Vec<PyRef<'_, PyDetection>>,
    iou: f64,
    reference_long_side: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let dets: Vec<Detection> = detections.iter().map(|d| d.0).collect();
    let input = SceneInput {
        name: "scene".into(),
        det_ids: (0..dets.len() as u64).collect(),
        dets,
        gt_ids: scene.0.words.iter().map(|w| w.id).collect(),
        gts: scene.0.gt_rects().map_err(py_err)?,
        stats: None,
    };
    to_py(py, &evaluate(&[input], iou, reference_long_side))
}

/// Packs `(id, width, height)` items; returns a list of layout dicts.
#[pyfunction]
#[pyo3(signature = (items, gutter = 0, max_bin_side = 4096))]
fn pack<'py>(py: Python<'py>, items: Vec<(u64, u32, u32)>, gutter: u32, max_bin_side: u32) -> PyResult<Bound<'py, PyAny>> {
    let items: Vec<PackItem> = items
        .into_iter()
        .map(|(id, width, height)| PackItem { id, width, height })
        .collect();
    to_py(py, &packing::pack_all(&items, gutter, max_bin_side).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (points, r = 0.4))]
fn shrink_offset(points: Vec<(f64, f64)>, r: f64) -> PyResult<f64> {
    geometry::shrink_offset(&polygon(points)?, shrink(r)?).map_err(py_err)
}

/// Shrunk polygon, or None when it collapses.
#[pyfunction]
#[pyo3(signature = (points, r = 0.4))]
fn shrink_polygon(points: Vec<(f64, f64)>, r: f64) -> PyResult<Option<Vec<(f64, f64)>>> {
    let out = geometry::shrink_polygon(&polygon(points)?, shrink(r)?).map_err(py_err)?;
    Ok(out.map(|p| tuples(p.vertices())))
}

#[pyfunction]
#[pyo3(signature = (rect, r = 0.4))]
fn expand_shrunk_rect(rect: PyRef<'_, PyRect>, r: f64) -> PyResult<PyRect> {
    geometry::expand_shrunk_rect(&rect.0, shrink(r)?)
        .map(PyRect)
        .map_err(py_err)
}

#[pyfunction]
fn min_area_rect(points: Vec<(f64, f64)>) -> PyResult<PyRect> {
    geometry::min_area_rect(&self::points(points))
        .map(PyRect)
        .map_err(py_err)
}

#[pyfunction]
fn polygon_iou(a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> PyResult<f64> {
    Ok(geometry::polygon_iou(&polygon(a)?, &polygon(b)?))
}

/// Label maps of `scene` at `long_side` as a dict of row-major lists.
#[pyfunction]
fn rasterize_labels<'py>(py: Python<'py>, scene: PyRef<'_, PyScene>, long_side: u32) -> PyResult<Bound<'py, PyAny>> {
    let m = maps::rasterize_labels(&scene.0, long_side, &RasterOptions::default()).map_err(py_err)?;
    let (w, h) = m.dims();
    let d = pyo3::types::PyDict::new(py);
    d.set_item("width", w)?;
    d.set_item("height", h)?;
    for (k, v) in [("seg", &m.seg), ("shrunk", &m.shrunk), ("scale", &m.scale), ("text_mask", &m.text_mask)] {
        d.set_item(k, v.data().to_vec())?;
    }
    Ok(d.into_any())
}

fn flat(v: Vec<f64>) -> PyResult<FloatMap> {
    FloatMap::from_vec(v.len(), 1, v).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (s, g, mask = None))]
fn dice_loss(s: Vec<f64>, g: Vec<f64>, mask: Option<Vec<f64>>) -> PyResult<f64> {
    let mask = mask.map(flat).transpose()?;
    losses::dice_loss(&flat(s)?, &flat(g)?, mask.as_ref()).map_err(py_err)
}

#[pyfunction]
fn smooth_l1(x: f64) -> f64 {
    losses::smooth_l1(x)
}

/// Loss between two sets of maps given as dicts like `rasterize_labels` returns.
#[pyfunction]
fn total_loss<'py>(
    py: Python<'py>,
    pred: &Bound<'py, PyAny>,
    gt: &Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let labels = |d: &Bound<'py, PyAny>| -> PyResult<LabelMaps> {
        let w: usize = d.get_item("width")?.extract()?;
        let h: usize = d.get_item("height")?.extract()?;
        let map = |k: &str| -> PyResult<FloatMap> {
            FloatMap::from_vec(w, h, d.get_item(k)?.extract()?).map_err(py_err)
        };
        Ok(LabelMaps {
            seg: map("seg")?,
            shrunk: map("shrunk")?,
            scale: map("scale")?,
            text_mask: map("text_mask")?,
        })
    };
    let out = losses::total_loss(&labels(pred)?, &labels(gt)?, &LossWeights::default()).map_err(py_err)?;
    to_py(py, &out)
}

#[pymodule]
pub fn adascale(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SCHEMA_VERSION", adascale_core::formats::SCHEMA_VERSION)?;
    m.add_class::<PyRect>()?;
    m.add_class::<PyDetection>()?;
    m.add_class::<PyScene>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(single_scale_run, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_scene, m)?)?;
    m.add_function(wrap_pyfunction!(pack, m)?)?;
    m.add_function(wrap_pyfunction!(shrink_offset, m)?)?;
    m.add_function(wrap_pyfunction!(shrink_polygon, m)?)?;
    m.add_function(wrap_pyfunction!(expand_shrunk_rect, m)?)?;
    m.add_function(wrap_pyfunction!(min_area_rect, m)?)?;
    m.add_function(wrap_pyfunction!(polygon_iou, m)?)?;
    m.add_function(wrap_pyfunction!(rasterize_labels, m)?)?;
    m.add_function(wrap_pyfunction!(dice_loss, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_l1, m)?)?;
    m.add_function(wrap_pyfunction!(total_loss, m)?)?;
    Ok(())
}
