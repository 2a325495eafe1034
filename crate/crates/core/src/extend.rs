//! Scaling a packed layout to a rectangular boundary, growing each block to
//! the nearest obstruction, and placing fixed-size blocks inside the result.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::bounding_area;
use crate::geom::Rect;
use crate::model::{Direction, SpatialRequirement};
use crate::placement::{Floorplan, SpatialBlock};
use crate::units::Len;

/// A block after scaling and growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedBlock {
    pub label: usize,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedLayout {
    pub boundary: Rect,
    /// In placement order; empty when `penalty` is set.
    pub blocks: Vec<ExtendedBlock>,
    pub penalty: bool,
    pub scale: (f64, f64),
    /// Sum of extended areas over the boundary area.
    pub coverage: f64,
}

impl ExtendedLayout {
    pub fn block(&self, label: usize) -> Option<&ExtendedBlock> {
        self.blocks.iter().find(|b| b.label == label)
    }
}

/// Maps `v` from `[from, from + len)` onto `[to, to + target)`, rounding to
/// the nearest micro-unit (halves up).
fn rescale(v: Len, from: Len, len: Len, to: Len, target: Len) -> Len {
    let num = i128::from(v - from) * i128::from(target);
    let den = i128::from(len);
    to + ((2 * num + den).div_euclid(2 * den)) as Len
}

fn y_overlap(a: &Rect, b: &Rect) -> bool {
    a.y < b.top() && a.top() > b.y
}

fn x_overlap(a: &Rect, b: &Rect) -> bool {
    a.x < b.right() && a.right() > b.x
}

/// Grows block `i` right, up, left, then down until it meets another block or
/// the boundary.
fn grow(rects: &[Rect], i: usize, boundary: &Rect) -> Rect {
    let others: Vec<&Rect> = rects.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, o)| o).collect();
    let mut g = rects[i];

    let right = others
        .iter()
        .filter(|o| y_overlap(o, &g) && o.x >= g.right())
        .map(|o| o.x)
        .fold(boundary.right(), Len::min);
    g.w = right - g.x;

    let top = others
        .iter()
        .filter(|o| x_overlap(o, &g) && o.y >= g.top())
        .map(|o| o.y)
        .fold(boundary.top(), Len::min);
    g.h = top - g.y;

    let left = others
        .iter()
        .filter(|o| y_overlap(o, &g) && o.right() <= g.x)
        .map(|o| o.right())
        .fold(boundary.x, Len::max);
    g.w = g.right() - left;
    g.x = left;

    let bottom = others
        .iter()
        .filter(|o| x_overlap(o, &g) && o.top() <= g.y)
        .map(|o| o.top())
        .fold(boundary.y, Len::max);
    g.h = g.top() - bottom;
    g.y = bottom;
    g
}

/// Scales `fp` onto `boundary` and grows every block, in placement order,
/// right, up, left and down to the nearest obstruction. Sets `penalty` (and
/// skips extension) when the layout is wider or taller than the boundary and
/// contains a non-flexible block.
pub fn extend_layout(fp: &Floorplan, reqs: &[SpatialRequirement], boundary: Rect) -> Result<ExtendedLayout> {
    if boundary.w <= 0 || boundary.h <= 0 {
        return Err(Error::DegenerateBoundary(format!(
            "boundary {}x{} has no area",
            boundary.w, boundary.h
        )));
    }
    let (bb, _) = bounding_area(&fp.blocks)?;
    let scale = (boundary.w as f64 / bb.w as f64, boundary.h as f64 / bb.h as f64);
    let has_fixed = fp.blocks.iter().any(|b| !reqs[b.label].flexible);
    if has_fixed && (bb.w > boundary.w || bb.h > boundary.h) {
        return Ok(ExtendedLayout {
            boundary,
            blocks: Vec::new(),
            penalty: true,
            scale,
            coverage: 0.0,
        });
    }

    let sx = |v: Len| rescale(v, bb.x, bb.w, boundary.x, boundary.w);
    let sy = |v: Len| rescale(v, bb.y, bb.h, boundary.y, boundary.h);
    let mut rects: Vec<Rect> = fp
        .blocks
        .iter()
        .map(|b| {
            let (x0, y0) = (sx(b.x), sy(b.y));
            Rect::new(x0, y0, sx(b.x + b.w) - x0, sy(b.y + b.h) - y0)
        })
        .collect();

    for i in 0..rects.len() {
        rects[i] = grow(&rects, i, &boundary);
    }

    let covered: i128 = rects.iter().map(Rect::area).sum();
    Ok(ExtendedLayout {
        boundary,
        blocks: fp
            .blocks
            .iter()
            .zip(rects)
            .map(|(b, rect)| ExtendedBlock { label: b.label, rect })
            .collect(),
        penalty: false,
        scale,
        coverage: covered as f64 / boundary.area() as f64,
    })
}

/// Final blocks after fixed-size allocation, plus the labels that did not fit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub blocks: Vec<SpatialBlock>,
    pub infeasible: Vec<usize>,
}

/// Flexible blocks take their extended block. Fixed blocks keep the size they
/// were placed with and sit flush against their anchor edge, centered along
/// it, or centered when unanchored. A fixed block larger than its extended
/// block keeps the extended block and is reported in `infeasible`.
pub fn allocate_fixed_blocks(ex: &ExtendedLayout, fp: &Floorplan, reqs: &[SpatialRequirement]) -> Result<Allocation> {
    if ex.penalty {
        return Err(Error::InvalidLayout("cannot allocate a penalized layout".into()));
    }
    let mut out = Allocation {
        blocks: Vec::with_capacity(ex.blocks.len()),
        infeasible: Vec::new(),
    };
    for e in &ex.blocks {
        let placed = fp
            .block(e.label)
            .ok_or_else(|| Error::InvalidLayout(format!("block {} missing from floorplan", e.label)))?;
        let req = &reqs[e.label];
        let area = e.rect;
        let (w, h) = (placed.w, placed.h);
        if req.flexible || w > area.w || h > area.h {
            if !req.flexible {
                out.infeasible.push(e.label);
            }
            out.blocks.push(SpatialBlock {
                label: e.label,
                x: area.x,
                y: area.y,
                w: area.w,
                h: area.h,
                rotated: placed.rotated,
            });
            continue;
        }
        let cx = area.x + (area.w - w) / 2;
        let cy = area.y + (area.h - h) / 2;
        let (x, y) = match req.anchor_edge {
            Some(Direction::North) => (cx, area.top() - h),
            Some(Direction::South) => (cx, area.y),
            Some(Direction::East) => (area.right() - w, cy),
            Some(Direction::West) => (area.x, cy),
            None => (cx, cy),
        };
        out.blocks.push(SpatialBlock {
            label: e.label,
            x,
            y,
            w,
            h,
            rotated: placed.rotated,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treegraph::{LayoutTree, TreeKind};

    fn fp(blocks: &[(Len, Len, Len, Len)]) -> Floorplan {
        Floorplan {
            blocks: blocks
                .iter()
                .enumerate()
                .map(|(label, &(x, y, w, h))| SpatialBlock {
                    label,
                    x,
                    y,
                    w,
                    h,
                    rotated: false,
                })
                .collect(),
            tree: LayoutTree::standard(TreeKind::Binary, blocks.len()),
        }
    }

    fn reqs(n: usize) -> Vec<SpatialRequirement> {
        (0..n).map(|i| SpatialRequirement::new(format!("r{i}"), "r", 1, 1)).collect()
    }

    fn rects(ex: &ExtendedLayout) -> Vec<Rect> {
        ex.blocks.iter().map(|b| b.rect).collect()
    }

    #[test]
    fn tiling_example() {
        let layout = fp(&[(0, 0, 4, 3), (4, 0, 2, 2), (0, 3, 3, 1)]);
        let ex = extend_layout(&layout, &reqs(3), Rect::new(0, 0, 12, 8)).unwrap();
        assert!(!ex.penalty);
        assert_eq!(ex.scale, (2.0, 2.0));
        assert_eq!(
            rects(&ex),
            vec![Rect::new(0, 0, 8, 6), Rect::new(8, 0, 4, 8), Rect::new(0, 6, 8, 2)]
        );
        assert_eq!(ex.coverage, 1.0);
    }

    #[test]
    fn single_block_fills_boundary() {
        let b = Rect::new(3, 4, 10, 7);
        let ex = extend_layout(&fp(&[(0, 0, 2, 5)]), &reqs(1), b).unwrap();
        assert_eq!(rects(&ex), vec![b]);
    }

    #[test]
    fn fixed_wide_block_is_penalized() {
        let mut r = reqs(2);
        r[0] = r[0].clone().flexible(false);
        let layout = fp(&[(0, 0, 6, 1), (0, 1, 2, 3)]);
        let ex = extend_layout(&layout, &r, Rect::new(0, 0, 5, 5)).unwrap();
        assert!(ex.penalty && ex.blocks.is_empty());
        // all-flexible content just shrinks
        let ex = extend_layout(&layout, &reqs(2), Rect::new(0, 0, 5, 5)).unwrap();
        assert!(!ex.penalty);
    }

    #[test]
    fn degenerate_boundary() {
        assert!(matches!(
            extend_layout(&fp(&[(0, 0, 1, 1)]), &reqs(1), Rect::new(0, 0, 0, 4)),
            Err(Error::DegenerateBoundary(_))
        ));
    }

    fn extended(area: Rect) -> ExtendedLayout {
        ExtendedLayout {
            boundary: area,
            blocks: vec![ExtendedBlock { label: 0, rect: area }],
            penalty: false,
            scale: (1.0, 1.0),
            coverage: 1.0,
        }
    }

    #[test]
    fn bed_flush_north() {
        let r = vec![SpatialRequirement::new("bed", "Bed", 2, 3)
            .flexible(false)
            .anchored(Some(Direction::North), None)];
        let a = allocate_fixed_blocks(&extended(Rect::new(0, 0, 4, 5)), &fp(&[(0, 0, 2, 3)]), &r).unwrap();
        assert!(a.infeasible.is_empty());
        assert_eq!(a.blocks[0].rect(), Rect::new(1, 2, 2, 3));
    }

    #[test]
    fn flexible_adopts_extended_block() {
        let a = allocate_fixed_blocks(&extended(Rect::new(0, 0, 4, 5)), &fp(&[(0, 0, 2, 3)]), &reqs(1)).unwrap();
        assert_eq!(a.blocks[0].rect(), Rect::new(0, 0, 4, 5));
    }

    #[test]
    fn oversized_fixed_block_is_flagged() {
        let r = vec![SpatialRequirement::new("sofa", "Sofa", 6, 1).flexible(false)];
        let a = allocate_fixed_blocks(&extended(Rect::new(0, 0, 4, 5)), &fp(&[(0, 0, 6, 1)]), &r).unwrap();
        assert_eq!(a.infeasible, vec![0]);
    }
}
