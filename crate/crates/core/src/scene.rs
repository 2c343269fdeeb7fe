//! Ground-truth scenes: a canvas plus word polygons.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{min_area_rect, Point2, Polygon, RotatedRect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub id: u64,
    /// Word outline. Dataset and synthetic scenes carry 4-point quads;
    /// knapsack scenes may carry clipped polygons with more vertices.
    pub quad: Vec<Point2>,
    #[serde(default = "default_ink")]
    pub ink: f64,
}

fn default_ink() -> f64 {
    1.0
}

impl Word {
    pub fn polygon(&self) -> Result<Polygon> {
        Polygon::new(self.quad.clone())
            .map_err(|e| Error::Input(format!("word {}: {e}", self.id)))
    }

    /// Oriented bounding rectangle; its height is the word scale.
    pub fn rect(&self) -> Result<RotatedRect> {
        min_area_rect(&self.quad).map_err(|e| Error::Input(format!("word {}: {e}", self.id)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub words: Vec<Word>,
    #[serde(default)]
    pub seed: u64,
}

impl SceneSpec {
    pub fn empty(canvas_width: u32, canvas_height: u32) -> Self {
        Self {
            canvas_width,
            canvas_height,
            words: Vec::new(),
            seed: 0,
        }
    }

    pub fn long_side(&self) -> u32 {
        self.canvas_width.max(self.canvas_height)
    }

    pub fn area(&self) -> u64 {
        self.canvas_width as u64 * self.canvas_height as u64
    }

    /// Checks canvas size, id uniqueness and word geometry. Vertices are
    /// clamped into the canvas first.
    pub fn validated(mut self) -> Result<Self> {
        if self.canvas_width == 0 || self.canvas_height == 0 {
            return Err(Error::Input(format!(
                "canvas must be non-empty, got {}x{}",
                self.canvas_width, self.canvas_height
            )));
        }
        let (w, h) = (self.canvas_width as f64, self.canvas_height as f64);
        let mut seen = HashSet::new();
        for word in &mut self.words {
            if !seen.insert(word.id) {
                return Err(Error::Input(format!("duplicate word id {}", word.id)));
            }
            if word.quad.len() < 3 {
                return Err(Error::Input(format!(
                    "word {} has {} vertices",
                    word.id,
                    word.quad.len()
                )));
            }
            if !(0.0..=1.0).contains(&word.ink) {
                return Err(Error::Input(format!("word {} ink {} outside [0,1]", word.id, word.ink)));
            }
            for p in &mut word.quad {
                if !p.is_finite() {
                    return Err(Error::Input(format!("word {} has a non-finite vertex", word.id)));
                }
                p.x = p.x.clamp(0.0, w);
                p.y = p.y.clamp(0.0, h);
            }
            word.polygon()?;
        }
        Ok(self)
    }

    /// Ground-truth rotated rectangles, ordered like `words`.
    pub fn gt_rects(&self) -> Result<Vec<RotatedRect>> {
        self.words.iter().map(Word::rect).collect()
    }

    /// Total analytic word area.
    pub fn text_area(&self) -> f64 {
        self.words
            .iter()
            .filter_map(|w| w.polygon().ok())
            .map(|p| p.area())
            .sum()
    }
}
