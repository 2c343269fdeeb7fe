//! Dense float grids, label rasterization, scale normalization and blob
//! extraction.

mod components;
pub mod pfm;
mod raster;

pub use components::{connected_components, Blob, PixelBox};
pub use raster::{fill_polygon, input_geometry, rasterize_labels, LabelMaps, RasterOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major grid of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl FloatMap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Input(format!(
                "map data has {} values, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value at ({}, {})",
                i % width.max(1),
                i / width.max(1)
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        debug_assert!(v.is_finite());
        self.data[y * self.width + x] = v;
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn count_at_least(&self, threshold: f64) -> usize {
        self.data.iter().filter(|&&v| v >= threshold).count()
    }

    pub fn check_same_dims(&self, other: &FloatMap) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Shape {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    pub fn zip_map(&self, other: &FloatMap, f: impl Fn(f64, f64) -> f64) -> Result<FloatMap> {
        self.check_same_dims(other)?;
        Ok(FloatMap {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> FloatMap {
        FloatMap {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Rounds every value through `f32`, the precision PFM files carry.
    pub fn to_f32_precision(&self) -> FloatMap {
        self.map(|v| v as f32 as f64)
    }
}

/// Reference word height of the log scale normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub s_ref: f64,
}

impl Default for ScaleParams {
    fn default() -> Self {
        Self { s_ref: 25.0 }
    }
}

impl ScaleParams {
    pub fn new(s_ref: f64) -> Result<Self> {
        if !(s_ref > 0.0 && s_ref.is_finite()) {
            return Err(Error::Config(format!("s_ref must be positive, got {s_ref}")));
        }
        Ok(Self { s_ref })
    }
}

/// `ln(s / s_ref)`.
pub fn normalize_scale(s: f64, params: ScaleParams) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("scale must be positive, got {s}")));
    }
    Ok((s / params.s_ref).ln())
}

pub fn denormalize_scale(s_hat: f64, params: ScaleParams) -> f64 {
    params.s_ref * s_hat.exp()
}

/// Pointwise mean of the two segmentation channels.
pub fn average_map(seg: &FloatMap, shrunk: &FloatMap) -> Result<FloatMap> {
    seg.zip_map(shrunk, |a, b| 0.5 * (a + b))
}

/// 1 where `value >= threshold`, else 0.
pub fn binarize(m: &FloatMap, threshold: f64) -> FloatMap {
    m.map(|v| if v >= threshold { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let p = ScaleParams::default();
        assert_eq!(normalize_scale(25.0, p).unwrap(), 0.0);
        assert!((normalize_scale(50.0, p).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        for s in [1.0, 25.0, 300.0] {
            let back = denormalize_scale(normalize_scale(s, p).unwrap(), p);
            assert!((back - s).abs() <= 1e-12 * s);
        }
        assert!(matches!(normalize_scale(0.0, p), Err(Error::Domain(_))));
        assert!(normalize_scale(-3.0, p).is_err());
    }

    #[test]
    fn average_examples() {
        let ones = FloatMap::filled(3, 2, 1.0);
        let zeros = FloatMap::zeros(3, 2);
        assert!(average_map(&ones, &ones).unwrap().data().iter().all(|&v| v == 1.0));
        assert!(average_map(&ones, &zeros).unwrap().data().iter().all(|&v| v == 0.5));
        let a = FloatMap::filled(1, 1, 0.8);
        let b = FloatMap::filled(1, 1, 0.4);
        assert!((average_map(&a, &b).unwrap().get(0, 0) - 0.6).abs() < 1e-15);
        assert!(matches!(
            average_map(&ones, &FloatMap::zeros(2, 3)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize(&FloatMap::filled(2, 2, 0.6), 0.5).sum(), 4.0);
        assert_eq!(binarize(&FloatMap::filled(2, 2, 0.4), 0.5).sum(), 0.0);
        assert_eq!(binarize(&FloatMap::filled(1, 1, 0.5), 0.5).sum(), 1.0);
    }

    #[test]
    fn from_vec_rejects_nan() {
        assert!(FloatMap::from_vec(2, 1, vec![0.0, f64::NAN]).is_err());
        assert!(FloatMap::from_vec(2, 2, vec![0.0; 3]).is_err());
    }
}
