//! Maximal Rectangles packing with the Best Short Side Fit rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bin sides are multiples of this.
pub const BIN_ALIGN: u32 = 32;
/// Area slack applied before the first packing attempt.
pub const AREA_SLACK: f64 = 1.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackItem {
    pub id: u64,
    pub width: u32,
    pub height: u32,
}

impl PackItem {
    pub fn area(&self) -> u64 {
        self.width as u64 * self.height as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub id: u64,
    pub x: u32,
    pub y: u32,
    /// Placed extent, after rotation.
    pub width: u32,
    pub height: u32,
    pub rotated: bool,
}

impl Placement {
    pub fn right(&self) -> u32 {
        self.x + self.width
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.height
    }

    pub fn overlaps(&self, o: &Placement) -> bool {
        self.x < o.right() && o.x < self.right() && self.y < o.bottom() && o.y < self.bottom()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackLayout {
    pub bin_width: u32,
    pub bin_height: u32,
    pub placements: Vec<Placement>,
    pub occupancy: f64,
}

impl KnapsackLayout {
    fn new(bin_width: u32, bin_height: u32, placements: Vec<Placement>) -> Self {
        let used: u64 = placements
            .iter()
            .map(|p| p.width as u64 * p.height as u64)
            .sum();
        let bin = bin_width as u64 * bin_height as u64;
        Self {
            bin_width,
            bin_height,
            placements,
            occupancy: if bin == 0 { 0.0 } else { used as f64 / bin as f64 },
        }
    }

    pub fn area(&self) -> u64 {
        self.bin_width as u64 * self.bin_height as u64
    }

    /// Checks containment and pairwise disjointness.
    pub fn verify(&self) -> Result<()> {
        for p in &self.placements {
            if p.right() > self.bin_width || p.bottom() > self.bin_height {
                return Err(Error::Invariant(format!("placement {} leaves the bin", p.id)));
            }
        }
        for (i, a) in self.placements.iter().enumerate() {
            for b in &self.placements[i + 1..] {
                if a.overlaps(b) {
                    return Err(Error::Invariant(format!(
                        "placements {} and {} overlap",
                        a.id, b.id
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct FreeRect {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
}

impl FreeRect {
    fn contains(&self, o: &FreeRect) -> bool {
        o.x >= self.x && o.y >= self.y && o.x + o.w <= self.x + self.w && o.y + o.h <= self.y + self.h
    }
}

struct MaxRects {
    free: Vec<FreeRect>,
}

impl MaxRects {
    fn new(w: u32, h: u32) -> Self {
        Self {
            free: vec![FreeRect { x: 0, y: 0, w, h }],
        }
    }

    /// Best short side fit: minimize the smaller leftover side, then the
    /// larger one. Returns `(x, y, w, h, rotated)`.
    fn find(&self, w: u32, h: u32, allow_rotate: bool) -> Option<(u32, u32, u32, u32, bool)> {
        let mut best: Option<((u32, u32), (u32, u32, u32, u32, bool))> = None;
        let mut consider = |fr: &FreeRect, pw: u32, ph: u32, rot: bool| {
            if fr.w < pw || fr.h < ph {
                return;
            }
            let lh = fr.w - pw;
            let lv = fr.h - ph;
            let score = (lh.min(lv), lh.max(lv));
            if best.is_none_or(|(s, _)| score < s) {
                best = Some((score, (fr.x, fr.y, pw, ph, rot)));
            }
        };
        for fr in &self.free {
            consider(fr, w, h, false);
            if allow_rotate && w != h {
                consider(fr, h, w, true);
            }
        }
        best.map(|(_, p)| p)
    }

    fn place(&mut self, used: FreeRect) {
        let mut next: Vec<FreeRect> = Vec::with_capacity(self.free.len() + 4);
        for fr in &self.free {
            let disjoint = used.x >= fr.x + fr.w
                || used.x + used.w <= fr.x
                || used.y >= fr.y + fr.h
                || used.y + used.h <= fr.y;
            if disjoint {
                next.push(*fr);
                continue;
            }
            if used.x > fr.x {
                next.push(FreeRect { x: fr.x, y: fr.y, w: used.x - fr.x, h: fr.h });
            }
            if used.x + used.w < fr.x + fr.w {
                let x = used.x + used.w;
                next.push(FreeRect { x, y: fr.y, w: fr.x + fr.w - x, h: fr.h });
            }
            if used.y > fr.y {
                next.push(FreeRect { x: fr.x, y: fr.y, w: fr.w, h: used.y - fr.y });
            }
            if used.y + used.h < fr.y + fr.h {
                let y = used.y + used.h;
                next.push(FreeRect { x: fr.x, y, w: fr.w, h: fr.y + fr.h - y });
            }
        }
        // Prune rectangles contained in another one; keep the first of equal
        // pairs.
        let mut keep = vec![true; next.len()];
        for i in 0..next.len() {
            if !keep[i] {
                continue;
            }
            for j in 0..next.len() {
                if i == j || !keep[j] {
                    continue;
                }
                if next[j].contains(&next[i]) && (next[i] != next[j] || j < i) {
                    keep[i] = false;
                    break;
                }
            }
        }
        self.free = next
            .into_iter()
            .zip(keep)
            .filter_map(|(f, k)| k.then_some(f))
            .collect();
    }
}

/// Insertion order: decreasing longer side, ties by id.
fn insertion_order(items: &[PackItem]) -> Vec<PackItem> {
    let mut sorted = items.to_vec();
    sorted.sort_by(|a, b| {
        b.width
            .max(b.height)
            .cmp(&a.width.max(a.height))
            .then(a.id.cmp(&b.id))
    });
    sorted
}

/// Packs `items` into one `bin_width x bin_height` bin. Items that fit
/// nowhere are returned, in insertion order.
pub fn maxrects_bssf(
    items: &[PackItem],
    bin_width: u32,
    bin_height: u32,
    allow_rotate: bool,
) -> (KnapsackLayout, Vec<PackItem>) {
    let mut bin = MaxRects::new(bin_width, bin_height);
    let mut placements = Vec::with_capacity(items.len());
    let mut unplaced = Vec::new();
    for item in insertion_order(items) {
        if item.width == 0 || item.height == 0 {
            unplaced.push(item);
            continue;
        }
        match bin.find(item.width, item.height, allow_rotate) {
            Some((x, y, w, h, rotated)) => {
                bin.place(FreeRect { x, y, w, h });
                placements.push(Placement { id: item.id, x, y, width: w, height: h, rotated });
            }
            None => unplaced.push(item),
        }
    }
    (KnapsackLayout::new(bin_width, bin_height, placements), unplaced)
}

fn align_up(v: f64) -> u32 {
    let a = BIN_ALIGN as f64;
    ((v / a).ceil() * a).max(a) as u32
}

/// Packs every item into as few square-started bins as the growth rule
/// produces.
///
/// Each item is inflated by `gutter` on all sides, so placements (and the
/// returned ids) refer to inflated rectangles. The first bin side is the
/// smallest multiple of 32 at or above `sqrt(1.15 * total area)` (and the
/// longest item side), capped at `max_bin_side`. While items remain
/// unplaced the side grows by 25 %; once the cap is reached the leftovers
/// open a new bin.
pub fn pack_all(items: &[PackItem], gutter: u32, max_bin_side: u32) -> Result<Vec<KnapsackLayout>> {
    if max_bin_side == 0 {
        return Err(Error::Config("max_bin_side must be positive".into()));
    }
    let mut pending: Vec<PackItem> = Vec::with_capacity(items.len());
    for it in items {
        if it.width == 0 || it.height == 0 {
            return Err(Error::Input(format!("item {} has an empty side", it.id)));
        }
        let inflated = PackItem {
            id: it.id,
            width: it.width + 2 * gutter,
            height: it.height + 2 * gutter,
        };
        if inflated.width > max_bin_side || inflated.height > max_bin_side {
            return Err(Error::OversizeItem {
                id: it.id,
                width: inflated.width,
                height: inflated.height,
                max_side: max_bin_side,
            });
        }
        pending.push(inflated);
    }

    let mut layouts = Vec::new();
    while !pending.is_empty() {
        let total: u64 = pending.iter().map(PackItem::area).sum();
        let longest = pending.iter().map(|p| p.width.max(p.height)).max().unwrap_or(1);
        let mut side = align_up((AREA_SLACK * total as f64).sqrt())
            .max(align_up(longest as f64))
            .min(max_bin_side);
        loop {
            let (layout, unplaced) = maxrects_bssf(&pending, side, side, false);
            if unplaced.is_empty() || side >= max_bin_side {
                if layout.placements.is_empty() {
                    return Err(Error::Invariant("packing made no progress".into()));
                }
                layouts.push(layout);
                pending = unplaced;
                break;
            }
            side = align_up(side as f64 * 1.25).min(max_bin_side);
        }
    }
    Ok(layouts)
}
