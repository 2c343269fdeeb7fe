//! Command line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 config error, 4 internal
//! invariant violation. `ADASCALE_THREADS` caps the worker pool.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport, SceneInput, DEFAULT_IOU_THRESHOLD};
use crate::formats::{
    read_json, write_json, DetectionsFile, LayoutFile, LossFile, PackRequest, RunConfig, SceneFile, StatsFile,
    SCHEMA_VERSION,
};
use crate::losses::{total_loss, LossWeights};
use crate::maps::{binarize, pfm, LabelMaps, RasterOptions};
use crate::oracle::{SegmentationOracle, SynthOracle};
use crate::packing::pack_all;
use crate::pipeline::{run_pipeline, single_scale_run, Detection, PipelineStats};
use crate::render::{render_detections, render_layout};
use crate::scene::SceneSpec;
use crate::synth::{generate_pair_scene, generate_scene, PairParams, SynthParams};

pub const THREADS_ENV: &str = "ADASCALE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "adascale", version, about = "Adaptive two-pass scene text detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic scene.
    Synth(SynthArgs),
    /// Detect text in a scene with the synthetic oracle.
    Run(RunArgs),
    /// Score detections against a scene's words.
    Eval(EvalArgs),
    /// Pack rectangles into knapsack bins.
    Pack(PackArgs),
    /// Loss between predicted and ground-truth PFM maps.
    Loss(LossArgs),
    /// Write oracle maps of a scene as PFM files.
    Maps(MapsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Single,
    Adaptive,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Adaptive => "adaptive",
        }
    }
}

fn parse_size(s: &str) -> std::result::Result<(u32, u32), String> {
    let (w, h) = s.split_once('x').ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: u32 = w.parse().map_err(|e| format!("width: {e}"))?;
    let h: u32 = h.parse().map_err(|e| format!("height: {e}"))?;
    Ok((w, h))
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub n_words: usize,
    #[arg(long, default_value_t = 16.0)]
    pub height_min: f64,
    #[arg(long, default_value_t = 48.0)]
    pub height_max: f64,
    /// Target word area over canvas area.
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub angle_min: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub angle_max: f64,
    #[arg(long, value_parser = parse_size, default_value = "2000x1500")]
    pub canvas: (u32, u32),
    /// Generate this many adjacent word pairs instead of free words.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long, default_value = "scene.json")]
    pub name: String,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Adaptive)]
    pub mode: Mode,
    /// Overrides the oracle noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also write overlay.ppm.
    #[arg(long)]
    pub render: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    pub iou: f64,
    #[arg(long, default_value_t = 1440)]
    pub reference_long_side: u32,
    /// Also write report.csv.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PackArgs {
    /// JSON with `items` and optional `gutter` / `max_bin_side`.
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub render: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LossArgs {
    /// Directory with seg.pfm, shrunk.pfm and scale.pfm.
    #[arg(long)]
    pub pred_dir: PathBuf,
    /// Same layout; text_mask.pfm is optional.
    #[arg(long)]
    pub gt_dir: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MapsArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub long_side: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exact labels instead of oracle predictions.
    #[arg(long)]
    pub labels: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Generation(_) => EXIT_CONFIG,
        Error::Invariant(_) => EXIT_INVARIANT,
        _ => EXIT_INPUT,
    }
}

/// Worker count from `ADASCALE_THREADS`; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn as_config_error(e: Error) -> Error {
    match e {
        Error::Io { .. } => e,
        other => Error::Config(other.to_string()),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn load_scene(path: &Path) -> Result<SceneSpec> {
    read_json::<SceneFile>(path)?.into_scene()
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let cfg = match path {
        Some(p) => read_json::<RunConfig>(p).map_err(as_config_error)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<PathBuf> {
    let (canvas_width, canvas_height) = args.canvas;
    let scene = match args.pairs {
        Some(n_pairs) => generate_pair_scene(&PairParams {
            canvas_width,
            canvas_height,
            n_pairs,
            height_range: (args.height_min, args.height_max),
            seed: args.seed,
            ..Default::default()
        })?,
        None => generate_scene(&SynthParams {
            canvas_width,
            canvas_height,
            n_words: args.n_words,
            height_range: (args.height_min, args.height_max),
            density: args.density,
            angle_range: (args.angle_min, args.angle_max),
            seed: args.seed,
            ..Default::default()
        })?,
    };
    create_dir(&args.out_dir)?;
    let path = args.out_dir.join(&args.name);
    write_json(&path, &SceneFile::from(&scene))?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub detections: Vec<Detection>,
    pub stats: PipelineStats,
    pub report: EvalReport,
}

pub fn cmd_run(args: &RunArgs) -> Result<RunOutput> {
    let scene = load_scene(&args.scene)?;
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.oracle.seed = seed;
    }
    let raster = RasterOptions {
        shrink: crate::geometry::ShrinkParams::new(cfg.pipeline.shrink_r)?,
        scale: crate::maps::ScaleParams::new(cfg.pipeline.s_ref)?,
        ..Default::default()
    };
    let oracle = SynthOracle::new(cfg.oracle, raster);
    let (dets, stats) = match args.mode {
        Mode::Single => {
            let ls = cfg.single_long_side.unwrap_or(cfg.pipeline.first_pass_long_side);
            single_scale_run(&scene, ls, &cfg.pipeline, &oracle as &dyn SegmentationOracle)?
        }
        Mode::Adaptive => run_pipeline(&scene, &cfg.pipeline, &oracle)?,
    };
    let input = SceneInput {
        name: args.scene.display().to_string(),
        det_ids: (0..dets.len() as u64).collect(),
        dets: dets.clone(),
        gt_ids: scene.words.iter().map(|w| w.id).collect(),
        gts: scene.gt_rects()?,
        stats: Some(stats),
    };
    let report = evaluate(&[input], DEFAULT_IOU_THRESHOLD, cfg.pipeline.reference_long_side);

    create_dir(&args.out_dir)?;
    let mode = args.mode.name();
    write_json(args.out_dir.join("detections.json"), &DetectionsFile::new(mode, &dets))?;
    write_json(
        args.out_dir.join("stats.json"),
        &StatsFile {
            schema_version: SCHEMA_VERSION.into(),
            mode: mode.into(),
            stats,
        },
    )?;
    write_json(args.out_dir.join("report.json"), &report)?;
    if args.render {
        render_detections(&scene, &dets)?.write_ppm(args.out_dir.join("overlay.ppm"))?;
    }
    Ok(RunOutput {
        detections: dets,
        stats,
        report,
    })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    if !(args.iou > 0.0 && args.iou <= 1.0) {
        return Err(Error::Config(format!("iou threshold must lie in (0,1], got {}", args.iou)));
    }
    let scene = load_scene(&args.scene)?;
    let file: DetectionsFile = read_json(&args.detections)?;
    let mut seen = HashSet::new();
    for d in &file.detections {
        if !seen.insert(d.id) {
            return Err(Error::Input(format!(
                "{}: duplicate detection id {}",
                args.detections.display(),
                d.id
            )));
        }
    }
    let stats = match &args.stats {
        Some(p) => Some(read_json::<StatsFile>(p)?.stats),
        None => None,
    };
    let input = SceneInput {
        name: args.scene.display().to_string(),
        det_ids: file.detections.iter().map(|d| d.id).collect(),
        dets: file.detections.iter().map(|d| d.detection()).collect(),
        gt_ids: scene.words.iter().map(|w| w.id).collect(),
        gts: scene.gt_rects()?,
        stats,
    };
    let report = evaluate(&[input], args.iou, args.reference_long_side);
    create_dir(&args.out_dir)?;
    write_json(args.out_dir.join("report.json"), &report)?;
    if args.csv {
        let path = args.out_dir.join("report.csv");
        std::fs::write(&path, report.to_csv()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(report)
}

pub fn cmd_pack(args: &PackArgs) -> Result<LayoutFile> {
    let req: PackRequest = read_json(&args.items)?;
    let layouts = pack_all(&req.items, req.gutter, req.max_bin_side)?;
    for l in &layouts {
        l.verify()?;
    }
    let out = LayoutFile {
        schema_version: SCHEMA_VERSION.into(),
        gutter: req.gutter,
        layouts,
    };
    create_dir(&args.out_dir)?;
    write_json(args.out_dir.join("layout.json"), &out)?;
    if args.render {
        for (i, l) in out.layouts.iter().enumerate() {
            render_layout(l).write_ppm(args.out_dir.join(format!("bin_{i}.ppm")))?;
        }
    }
    Ok(out)
}

fn read_maps(dir: &Path, need_mask: bool) -> Result<LabelMaps> {
    let seg = pfm::read(dir.join("seg.pfm"))?;
    let shrunk = pfm::read(dir.join("shrunk.pfm"))?;
    let scale = pfm::read(dir.join("scale.pfm"))?;
    let mask_path = dir.join("text_mask.pfm");
    let text_mask = if need_mask && mask_path.exists() {
        pfm::read(mask_path)?
    } else {
        binarize(&seg, 0.5)
    };
    let maps = LabelMaps {
        seg,
        shrunk,
        scale,
        text_mask,
    };
    maps.check_consistent()?;
    Ok(maps)
}

pub fn cmd_loss(args: &LossArgs) -> Result<LossFile> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct LossConfig {
        #[allow(dead_code)]
        schema_version: String,
        #[serde(default)]
        weights: LossWeights,
    }
    impl crate::formats::Versioned for LossConfig {
        fn schema_version(&self) -> &str {
            &self.schema_version
        }
    }
    let weights = match &args.config {
        Some(p) => read_json::<LossConfig>(p).map_err(as_config_error)?.weights,
        None => LossWeights::default(),
    };
    let pred = read_maps(&args.pred_dir, false)?;
    let gt = read_maps(&args.gt_dir, true)?;
    let out = LossFile {
        schema_version: SCHEMA_VERSION.into(),
        loss: total_loss(&pred, &gt, &weights)?,
    };
    create_dir(&args.out_dir)?;
    write_json(args.out_dir.join("loss.json"), &out)?;
    Ok(out)
}

pub fn cmd_maps(args: &MapsArgs) -> Result<()> {
    let scene = load_scene(&args.scene)?;
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.oracle.seed = seed;
    }
    let raster = RasterOptions {
        shrink: crate::geometry::ShrinkParams::new(cfg.pipeline.shrink_r)?,
        scale: crate::maps::ScaleParams::new(cfg.pipeline.s_ref)?,
        ..Default::default()
    };
    let maps = if args.labels {
        crate::maps::rasterize_labels(&scene, args.long_side, &raster)?
    } else {
        SynthOracle::new(cfg.oracle, raster).infer(&scene, args.long_side)?.maps
    };
    create_dir(&args.out_dir)?;
    for (name, m) in [
        ("seg", &maps.seg),
        ("shrunk", &maps.shrunk),
        ("scale", &maps.scale),
        ("text_mask", &maps.text_mask),
    ] {
        pfm::write(args.out_dir.join(format!("{name}.pfm")), m)?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a).map(|p| println!("{}", p.display())),
        Command::Run(a) => cmd_run(a).map(|o| {
            println!(
                "{} detections, F={:.4}, pixels {}+{}",
                o.detections.len(),
                o.report.score.f_score,
                o.stats.pixels_pass1,
                o.stats.pixels_pass2
            )
        }),
        Command::Eval(a) => cmd_eval(a).map(|r| {
            println!(
                "R={:.4} P={:.4} F={:.4}",
                r.score.recall, r.score.precision, r.score.f_score
            )
        }),
        Command::Pack(a) => cmd_pack(a).map(|l| println!("{} bins", l.layouts.len())),
        Command::Loss(a) => cmd_loss(a).map(|l| println!("total={}", l.loss.total)),
        Command::Maps(a) => cmd_maps(a),
    }
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let run = || -> Result<()> {
        if let Some(n) = threads_from_env()? {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        }
        execute(&cli)
    };
    match run() {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
