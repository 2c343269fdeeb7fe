//! Seeded scene generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{intersection_area, Polygon, RotatedRect};
use crate::scene::{SceneSpec, Word};

/// Placement attempts per word before generation gives up.
pub const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub n_words: usize,
    /// Word heights are drawn uniformly from this range (pixels).
    pub height_range: (f64, f64),
    /// Target word area over canvas area. `None` draws aspect ratios from
    /// `aspect_range` instead.
    pub density: Option<f64>,
    pub aspect_range: (f64, f64),
    /// Rotation range in degrees.
    pub angle_range: (f64, f64),
    /// Minimum clearance between words.
    pub margin: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            canvas_width: 2000,
            canvas_height: 1500,
            n_words: 50,
            height_range: (16.0, 48.0),
            density: None,
            aspect_range: (2.0, 8.0),
            angle_range: (0.0, 0.0),
            margin: 4.0,
            seed: 0,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64), min: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo >= min && lo <= hi) {
        return Err(Error::Config(format!("invalid {name} range ({lo}, {hi})")));
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.canvas_width == 0 || self.canvas_height == 0 {
            return Err(Error::Config("canvas must be non-empty".into()));
        }
        check_range("height", self.height_range, f64::MIN_POSITIVE)?;
        check_range("aspect", self.aspect_range, f64::MIN_POSITIVE)?;
        check_range("angle", self.angle_range, -90.0)?;
        if self.angle_range.1 > 90.0 {
            return Err(Error::Config("angles must lie in [-90, 90]".into()));
        }
        if let Some(d) = self.density {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::Config(format!("density must lie in (0,1), got {d}")));
            }
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::Config("margin must be non-negative".into()));
        }
        Ok(())
    }
}

struct Placer {
    width: f64,
    height: f64,
    placed: Vec<Polygon>,
}

impl Placer {
    fn fits(&self, r: &RotatedRect, margin: f64) -> bool {
        let inside = r
            .corners()
            .iter()
            .all(|p| p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width && p.y <= self.height);
        if !inside {
            return false;
        }
        let padded = RotatedRect {
            width: r.width + 2.0 * margin,
            height: r.height + 2.0 * margin,
            ..*r
        }
        .to_polygon();
        self.placed.iter().all(|q| intersection_area(&padded, q) <= 0.0)
    }
}

/// Non-overlapping rotated words, placed by rejection sampling.
pub fn generate_scene(params: &SynthParams) -> Result<SceneSpec> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut scene = SceneSpec::empty(params.canvas_width, params.canvas_height);
    scene.seed = params.seed;
    let (cw, ch) = (params.canvas_width as f64, params.canvas_height as f64);
    let word_area = params
        .density
        .map(|d| d * cw * ch / params.n_words.max(1) as f64);
    let mut placer = Placer {
        width: cw,
        height: ch,
        placed: Vec::new(),
    };
    for id in 0..params.n_words {
        let h = draw(&mut rng, params.height_range);
        let w = match word_area {
            Some(a) => (a / h).max(h),
            None => h * draw(&mut rng, params.aspect_range),
        };
        let angle = draw(&mut rng, params.angle_range).to_radians();
        let mut placed = None;
        for _ in 0..MAX_ATTEMPTS {
            let cx = rng.random_range(0.0..cw);
            let cy = rng.random_range(0.0..ch);
            let Ok(r) = RotatedRect::new(cx, cy, w, h, angle) else {
                break;
            };
            if placer.fits(&r, params.margin) {
                placed = Some(r);
                break;
            }
        }
        let r = placed.ok_or_else(|| {
            Error::Generation(format!(
                "word {id} ({w:.1}x{h:.1}) found no free spot in {MAX_ATTEMPTS} attempts"
            ))
        })?;
        placer.placed.push(r.to_polygon());
        scene.words.push(Word {
            id: id as u64,
            quad: r.corners().to_vec(),
            ink: 1.0,
        });
    }
    Ok(scene)
}

/// Pairs of horizontally adjacent words separated by a small gap, each pair
/// well apart from the others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairParams {
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub n_pairs: usize,
    pub height_range: (f64, f64),
    pub aspect_range: (f64, f64),
    pub gap_range: (f64, f64),
    /// Clearance between pairs, in word heights.
    pub separation: f64,
    pub seed: u64,
}

impl Default for PairParams {
    fn default() -> Self {
        Self {
            canvas_width: 2880,
            canvas_height: 1620,
            n_pairs: 8,
            height_range: (26.0, 30.0),
            aspect_range: (6.0, 8.0),
            gap_range: (3.0, 6.0),
            separation: 3.0,
            seed: 0,
        }
    }
}

pub fn generate_pair_scene(params: &PairParams) -> Result<SceneSpec> {
    check_range("height", params.height_range, f64::MIN_POSITIVE)?;
    check_range("aspect", params.aspect_range, f64::MIN_POSITIVE)?;
    check_range("gap", params.gap_range, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut scene = SceneSpec::empty(params.canvas_width, params.canvas_height);
    scene.seed = params.seed;
    let (cw, ch) = (params.canvas_width as f64, params.canvas_height as f64);
    let mut placer = Placer {
        width: cw,
        height: ch,
        placed: Vec::new(),
    };
    for pair in 0..params.n_pairs {
        let h = draw(&mut rng, params.height_range);
        let w1 = h * draw(&mut rng, params.aspect_range);
        let w2 = h * draw(&mut rng, params.aspect_range);
        let gap = draw(&mut rng, params.gap_range);
        let total = w1 + gap + w2;
        let mut spot = None;
        for _ in 0..MAX_ATTEMPTS {
            let cx = rng.random_range(0.0..cw);
            let cy = rng.random_range(0.0..ch);
            let Ok(r) = RotatedRect::new(cx, cy, total, h, 0.0) else {
                break;
            };
            if placer.fits(&r, params.separation * h) {
                spot = Some(r);
                break;
            }
        }
        let r = spot.ok_or_else(|| {
            Error::Generation(format!("pair {pair} found no free spot in {MAX_ATTEMPTS} attempts"))
        })?;
        placer.placed.push(r.to_polygon());
        let (x0, y0) = (r.cx - total / 2.0, r.cy - h / 2.0);
        for (k, (x, w)) in [(x0, w1), (x0 + w1 + gap, w2)].into_iter().enumerate() {
            let word = RotatedRect::new(x + w / 2.0, y0 + h / 2.0, w, h, 0.0)?;
            scene.words.push(Word {
                id: (2 * pair + k) as u64,
                quad: word.corners().to_vec(),
                ink: 1.0,
            });
        }
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_words() {
        let s = generate_scene(&SynthParams { n_words: 0, ..Default::default() }).unwrap();
        assert!(s.words.is_empty());
    }

    #[test]
    fn deterministic() {
        let p = SynthParams { seed: 9, angle_range: (-30.0, 30.0), ..Default::default() };
        assert_eq!(generate_scene(&p).unwrap(), generate_scene(&p).unwrap());
        let q = SynthParams { seed: 10, ..p };
        assert_ne!(generate_scene(&p).unwrap(), generate_scene(&q).unwrap());
    }

    #[test]
    fn density_accounting() {
        let p = SynthParams {
            n_words: 50,
            density: Some(0.03),
            height_range: (20.0, 40.0),
            ..Default::default()
        };
        let s = generate_scene(&p).unwrap();
        let frac = s.text_area() / s.area() as f64;
        assert!((frac - 0.03).abs() <= 0.01, "{frac}");
        s.validated().unwrap();
    }

    #[test]
    fn words_do_not_overlap() {
        let p = SynthParams { n_words: 40, angle_range: (-45.0, 45.0), seed: 4, ..Default::default() };
        let s = generate_scene(&p).unwrap();
        let polys: Vec<_> = s.words.iter().map(|w| w.polygon().unwrap()).collect();
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                assert_eq!(intersection_area(&polys[i], &polys[j]), 0.0);
            }
        }
    }

    #[test]
    fn infeasible_density_errors() {
        let p = SynthParams {
            canvas_width: 100,
            canvas_height: 100,
            n_words: 30,
            height_range: (30.0, 30.0),
            ..Default::default()
        };
        assert!(matches!(generate_scene(&p), Err(Error::Generation(_))));
    }

    #[test]
    fn pairs_are_adjacent() {
        let s = generate_pair_scene(&PairParams { seed: 1, ..Default::default() }).unwrap();
        assert_eq!(s.words.len(), 16);
        for pair in s.words.chunks(2) {
            let a = pair[0].rect().unwrap();
            let b = pair[1].rect().unwrap();
            let gap = (b.cx - b.width / 2.0) - (a.cx + a.width / 2.0);
            assert!((3.0..=6.0).contains(&gap), "{gap}");
        }
    }
}
