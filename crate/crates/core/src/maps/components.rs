use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::maps::FloatMap;

/// Pixel bounds, right/bottom exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelBox {
    pub left: u32,
    pub top: u32,
    pub right: u32,
    pub bottom: u32,
}

impl PixelBox {
    pub fn width(&self) -> u32 {
        self.right - self.left
    }

    pub fn height(&self) -> u32 {
        self.bottom - self.top
    }
}

/// An 8-connected foreground region.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    /// Row-major sorted `(x, y)` pixels.
    pub pixels: Vec<(u32, u32)>,
    pub bbox: PixelBox,
    pub mean_confidence: Option<f64>,
    /// Word height in original-image pixels, once estimated.
    pub scale_estimate: Option<f64>,
}

impl Blob {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// Corners of the outermost pixel squares on each row. Their convex hull
    /// equals the hull of the full pixel-square union.
    pub fn outline_points(&self) -> Vec<Point2> {
        let mut pts = Vec::new();
        let mut i = 0;
        while i < self.pixels.len() {
            let y = self.pixels[i].1;
            let mut j = i;
            while j < self.pixels.len() && self.pixels[j].1 == y {
                j += 1;
            }
            let x0 = self.pixels[i].0 as f64;
            let x1 = self.pixels[j - 1].0 as f64 + 1.0;
            let (y0, y1) = (y as f64, y as f64 + 1.0);
            pts.extend([
                Point2::new(x0, y0),
                Point2::new(x1, y0),
                Point2::new(x0, y1),
                Point2::new(x1, y1),
            ]);
            i = j;
        }
        pts
    }

    /// Mean of `m` over the blob's pixels.
    pub fn mean_of(&self, m: &FloatMap) -> f64 {
        if self.pixels.is_empty() {
            return 0.0;
        }
        let s: f64 = self
            .pixels
            .iter()
            .map(|&(x, y)| m.get(x as usize, y as usize))
            .sum();
        s / self.pixels.len() as f64
    }
}

/// 8-connected components of the pixels with value `>= 0.5`, sorted by
/// `(bbox.top, bbox.left)`.
pub fn connected_components(binary: &FloatMap) -> Vec<Blob> {
    let (w, h) = binary.dims();
    let fg = |x: usize, y: usize| binary.get(x, y) >= 0.5;
    let mut seen = vec![false; w * h];
    let mut blobs: Vec<(usize, Blob)> = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for y0 in 0..h {
        for x0 in 0..w {
            if seen[y0 * w + x0] || !fg(x0, y0) {
                continue;
            }
            seen[y0 * w + x0] = true;
            stack.push((x0, y0));
            let mut pixels: Vec<(u32, u32)> = Vec::new();
            while let Some((x, y)) = stack.pop() {
                pixels.push((x as u32, y as u32));
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if !seen[ny * w + nx] && fg(nx, ny) {
                            seen[ny * w + nx] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            pixels.sort_by_key(|&(x, y)| (y, x));
            let bbox = pixels.iter().fold(
                PixelBox {
                    left: u32::MAX,
                    top: u32::MAX,
                    right: 0,
                    bottom: 0,
                },
                |b, &(x, y)| PixelBox {
                    left: b.left.min(x),
                    top: b.top.min(y),
                    right: b.right.max(x + 1),
                    bottom: b.bottom.max(y + 1),
                },
            );
            blobs.push((
                y0 * w + x0,
                Blob {
                    pixels,
                    bbox,
                    mean_confidence: None,
                    scale_estimate: None,
                },
            ));
        }
    }
    blobs.sort_by_key(|(first, b)| (b.bbox.top, b.bbox.left, *first));
    blobs.into_iter().map(|(_, b)| b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_from(rows: &[&str]) -> FloatMap {
        let h = rows.len();
        let w = rows[0].len();
        let data = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| if c == '#' { 1.0 } else { 0.0 }))
            .collect();
        FloatMap::from_vec(w, h, data).unwrap()
    }

    #[test]
    fn separated_squares() {
        let m = map_from(&[
            "###..###",
            "###..###",
            "###..###",
        ]);
        let blobs = connected_components(&m);
        assert_eq!(blobs.len(), 2);
        assert_eq!(blobs[0].bbox, PixelBox { left: 0, top: 0, right: 3, bottom: 3 });
        assert_eq!(blobs[1].bbox.left, 5);
        assert!(blobs.iter().all(|b| b.area() == 9));
    }

    #[test]
    fn diagonal_touch_is_one_blob() {
        let m = map_from(&[
            "##....",
            "##....",
            "..##..",
            "..##..",
        ]);
        assert_eq!(connected_components(&m).len(), 1);
    }

    #[test]
    fn empty_map() {
        assert!(connected_components(&FloatMap::zeros(5, 5)).is_empty());
    }

    #[test]
    fn ordering_uses_bbox_not_discovery() {
        // The right blob is discovered first on row 0 but the left blob's
        // bbox starts on the same row further left.
        let m = map_from(&[
            "....#",
            "#...#",
        ]);
        let blobs = connected_components(&m);
        assert_eq!(blobs.len(), 2);
        assert_eq!(blobs[0].bbox.top, 0);
        assert_eq!(blobs[0].bbox.left, 4);
        assert_eq!(blobs[1].bbox.left, 0);
    }

    #[test]
    fn outline_hull_matches_pixel_squares() {
        let m = map_from(&["###", "###"]);
        let b = &connected_components(&m)[0];
        let r = crate::geometry::min_area_rect(&b.outline_points()).unwrap();
        assert!((r.width - 3.0).abs() < 1e-12 && (r.height - 2.0).abs() < 1e-12);
    }
}
