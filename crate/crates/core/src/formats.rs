//! Versioned JSON documents read and written by the command line tool.
//!
//! Every document carries `schema_version` ("MAJOR.MINOR"); readers accept
//! any minor of [`SCHEMA_MAJOR`] and reject other majors.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, RotatedRect};
use crate::losses::LossBreakdown;
use crate::oracle::OracleConfig;
use crate::packing::{KnapsackLayout, PackItem};
use crate::pipeline::{Detection, PipelineConfig, PipelineStats};
use crate::scene::{SceneSpec, Word};

pub const SCHEMA_VERSION: &str = "1.0";
pub const SCHEMA_MAJOR: u32 = 1;

fn version() -> String {
    SCHEMA_VERSION.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema_version: String,
    pub canvas_width: u32,
    pub canvas_height: u32,
    #[serde(default)]
    pub seed: u64,
    pub words: Vec<Word>,
}

impl From<&SceneSpec> for SceneFile {
    fn from(s: &SceneSpec) -> Self {
        Self {
            schema_version: version(),
            canvas_width: s.canvas_width,
            canvas_height: s.canvas_height,
            seed: s.seed,
            words: s.words.clone(),
        }
    }
}

impl SceneFile {
    pub fn into_scene(self) -> Result<SceneSpec> {
        SceneSpec {
            canvas_width: self.canvas_width,
            canvas_height: self.canvas_height,
            words: self.words,
            seed: self.seed,
        }
        .validated()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: String,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Long side of the single-pass mode; defaults to the first-pass side.
    #[serde(default)]
    pub single_long_side: Option<u32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: version(),
            pipeline: PipelineConfig::default(),
            oracle: OracleConfig::default(),
            single_long_side: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        self.oracle.validate()?;
        if self.single_long_side.is_some_and(|s| s < 32) {
            return Err(Error::Config("single_long_side must be at least 32".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub id: u64,
    pub rect: RotatedRect,
    /// Corners of `rect`, for consumers that want polygons.
    pub quad: [Point2; 4],
    pub confidence: f64,
}

impl DetectionRecord {
    pub fn new(id: u64, d: &Detection) -> Self {
        Self {
            id,
            rect: d.rect,
            quad: d.rect.corners(),
            confidence: d.confidence,
        }
    }

    pub fn detection(&self) -> Detection {
        Detection {
            rect: self.rect,
            confidence: self.confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionsFile {
    pub schema_version: String,
    pub mode: String,
    pub detections: Vec<DetectionRecord>,
}

impl DetectionsFile {
    pub fn new(mode: &str, dets: &[Detection]) -> Self {
        Self {
            schema_version: version(),
            mode: mode.to_string(),
            detections: dets
                .iter()
                .enumerate()
                .map(|(i, d)| DetectionRecord::new(i as u64, d))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsFile {
    pub schema_version: String,
    pub mode: String,
    pub stats: PipelineStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackRequest {
    pub schema_version: String,
    #[serde(default)]
    pub gutter: u32,
    #[serde(default = "default_max_bin_side")]
    pub max_bin_side: u32,
    pub items: Vec<PackItem>,
}

fn default_max_bin_side() -> u32 {
    PipelineConfig::default().max_bin_side
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub schema_version: String,
    pub gutter: u32,
    pub layouts: Vec<KnapsackLayout>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossFile {
    pub schema_version: String,
    #[serde(flatten)]
    pub loss: LossBreakdown,
}

/// Anything carrying a `schema_version`.
pub trait Versioned {
    fn schema_version(&self) -> &str;
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn schema_version(&self) -> &str {
                &self.schema_version
            }
        })*
    };
}

versioned!(SceneFile, RunConfig, DetectionsFile, StatsFile, PackRequest, LayoutFile, LossFile);

impl Versioned for crate::eval::EvalReport {
    fn schema_version(&self) -> &str {
        &self.schema_version
    }
}

/// Accepts `"1"`, `"1.x"`, rejects other majors and malformed versions.
pub fn check_schema_version(v: &str) -> Result<()> {
    let major = v.split('.').next().unwrap_or("");
    match major.parse::<u32>() {
        Ok(SCHEMA_MAJOR) => Ok(()),
        Ok(m) => Err(Error::Input(format!(
            "unsupported schema_version {v:?} (major {m}, expected {SCHEMA_MAJOR})"
        ))),
        Err(_) => Err(Error::Input(format!("malformed schema_version {v:?}"))),
    }
}

/// Byte offset of a 1-based line / column pair.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(text.len())
}

#[derive(Deserialize)]
struct Probe {
    schema_version: Option<String>,
}

/// Parses a versioned document. Syntax and type errors report the byte
/// offset; the version is checked before the body is interpreted.
pub fn parse_json<T: DeserializeOwned + Versioned>(text: &str, path: &Path) -> Result<T> {
    let json_err = |e: serde_json::Error| Error::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    };
    let probe: Probe = serde_json::from_str(text).map_err(json_err)?;
    let v = probe
        .schema_version
        .ok_or_else(|| Error::Input(format!("{}: missing schema_version", path.display())))?;
    check_schema_version(&v).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(text).map_err(json_err)
}

pub fn read_json<T: DeserializeOwned + Versioned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_json(&text, path)
}

/// Pretty JSON with a trailing newline. Struct fields serialize in
/// declaration order, so output is byte-stable.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Invariant(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(value)?).map_err(|e| Error::io(path, e))
}
