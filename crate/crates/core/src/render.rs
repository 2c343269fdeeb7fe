//! Binary PPM overlays.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon};
use crate::maps::fill_polygon;
use crate::packing::KnapsackLayout;
use crate::pipeline::Detection;
use crate::scene::SceneSpec;

pub type Rgb = [u8; 3];

pub const BACKGROUND: Rgb = [255, 255, 255];
pub const WORD_FILL: Rgb = [200, 200, 200];
pub const DETECTION: Rgb = [220, 30, 30];
pub const PLACEMENT: Rgb = [40, 90, 200];

#[derive(Debug, Clone, PartialEq)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
    pixels: Vec<Rgb>,
}

impl Canvas {
    pub fn new(width: usize, height: usize, color: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    fn put(&mut self, x: f64, y: f64, color: Rgb) {
        if x >= 0.0 && y >= 0.0 && (x as usize) < self.width && (y as usize) < self.height {
            let i = y as usize * self.width + x as usize;
            self.pixels[i] = color;
        }
    }

    pub fn fill(&mut self, poly: &Polygon, color: Rgb) {
        let (w, h) = (self.width, self.height);
        fill_polygon(poly, w, h, |x, y| self.pixels[y * w + x] = color);
    }

    /// Closed outline, sampled at sub-pixel steps.
    pub fn outline(&mut self, pts: &[Point2], color: Rgb) {
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            let steps = (a.dist(b) * 2.0).ceil().max(1.0) as usize;
            for s in 0..=steps {
                let t = s as f64 / steps as f64;
                self.put(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), color);
            }
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_ppm()).map_err(|e| Error::io(path, e))
    }
}

/// Ground-truth words filled in grey, detections outlined in red.
pub fn render_detections(scene: &SceneSpec, dets: &[Detection]) -> Result<Canvas> {
    let mut c = Canvas::new(scene.canvas_width as usize, scene.canvas_height as usize, BACKGROUND);
    for w in &scene.words {
        c.fill(&w.polygon()?, WORD_FILL);
    }
    for d in dets {
        c.outline(&d.rect.corners(), DETECTION);
    }
    Ok(c)
}

/// Placement outlines of one bin.
pub fn render_layout(layout: &KnapsackLayout) -> Canvas {
    let mut c = Canvas::new(layout.bin_width as usize, layout.bin_height as usize, BACKGROUND);
    for p in &layout.placements {
        let (x0, y0) = (p.x as f64 + 0.5, p.y as f64 + 0.5);
        let (x1, y1) = (p.right() as f64 - 0.5, p.bottom() as f64 - 0.5);
        c.outline(
            &[Point2::new(x0, y0), Point2::new(x1, y0), Point2::new(x1, y1), Point2::new(x0, y1)],
            PLACEMENT,
        );
    }
    c
}
