//! Tree-to-rectangle placement on a horizontal contour.

use serde::{Deserialize, Serialize};

use crate::geom::Rect;
use crate::model::SpatialRequirement;
use crate::treegraph::{LayoutTree, Side, TreeKind};
use crate::units::{serde_len, Len};

/// A placed requirement. `label` is the requirement index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpatialBlock {
    pub label: usize,
    #[serde(with = "serde_len")]
    pub x: Len,
    #[serde(with = "serde_len")]
    pub y: Len,
    #[serde(with = "serde_len")]
    pub w: Len,
    #[serde(with = "serde_len")]
    pub h: Len,
    pub rotated: bool,
}

impl SpatialBlock {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.w, self.h)
    }
}

/// Piecewise-constant upper profile over `[0, +inf)`. Segment `k` spans
/// `[starts[k], starts[k + 1])` at `heights[k]`; the last one is unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    starts: Vec<Len>,
    heights: Vec<Len>,
}

impl Default for Contour {
    fn default() -> Self {
        Self::new()
    }
}

impl Contour {
    pub fn new() -> Self {
        Self {
            starts: vec![0],
            heights: vec![0],
        }
    }

    /// `(x_start, x_end, height)` per segment; `None` end means unbounded.
    pub fn segments(&self) -> Vec<(Len, Option<Len>, Len)> {
        (0..self.starts.len())
            .map(|k| (self.starts[k], self.starts.get(k + 1).copied(), self.heights[k]))
            .collect()
    }

    fn segment_at(&self, x: Len) -> usize {
        self.starts.partition_point(|&s| s <= x) - 1
    }

    /// Highest point of the contour over `[x, x + w)`.
    pub fn max_height(&self, x: Len, w: Len) -> Len {
        debug_assert!(x >= 0 && w > 0);
        let first = self.segment_at(x);
        let mut best = self.heights[first];
        for k in first + 1..self.starts.len() {
            if self.starts[k] >= x + w {
                break;
            }
            best = best.max(self.heights[k]);
        }
        best
    }

    /// Raises `[x, x + w)` to `top`.
    pub fn commit(&mut self, x: Len, w: Len, top: Len) {
        let end = x + w;
        let after = self.heights[self.segment_at(end)];
        let mut starts = Vec::with_capacity(self.starts.len() + 2);
        let mut heights = Vec::with_capacity(self.starts.len() + 2);
        for (k, &s) in self.starts.iter().enumerate() {
            if s < x {
                starts.push(s);
                heights.push(self.heights[k]);
            }
        }
        starts.push(x);
        heights.push(top);
        starts.push(end);
        heights.push(after);
        for (k, &s) in self.starts.iter().enumerate() {
            if s > end {
                starts.push(s);
                heights.push(self.heights[k]);
            }
        }
        // merge equal neighbours
        let mut out_s = Vec::with_capacity(starts.len());
        let mut out_h: Vec<Len> = Vec::with_capacity(starts.len());
        for (s, h) in starts.into_iter().zip(heights) {
            if out_h.last() == Some(&h) {
                continue;
            }
            out_s.push(s);
            out_h.push(h);
        }
        self.starts = out_s;
        self.heights = out_h;
    }

    /// Places a `w` x `h` block starting at `x` on the contour and commits it.
    /// Returns the block's `y`.
    pub fn place(&mut self, x: Len, w: Len, h: Len) -> Len {
        let y = self.max_height(x, w);
        self.commit(x, w, y + h);
        y
    }
}

/// Placed blocks (in placement order) plus the tree they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Floorplan {
    pub blocks: Vec<SpatialBlock>,
    pub tree: LayoutTree,
}

impl Floorplan {
    pub fn kind(&self) -> TreeKind {
        self.tree.kind()
    }

    pub fn block(&self, label: usize) -> Option<&SpatialBlock> {
        self.blocks.iter().find(|b| b.label == label)
    }

    pub fn rects(&self) -> Vec<Rect> {
        self.blocks.iter().map(SpatialBlock::rect).collect()
    }

    /// First pair of blocks whose interiors intersect, if any.
    pub fn first_overlap(&self) -> Option<(usize, usize)> {
        for (i, a) in self.blocks.iter().enumerate() {
            for b in &self.blocks[i + 1..] {
                if a.rect().interiors_overlap(&b.rect()) {
                    return Some((a.label, b.label));
                }
            }
        }
        None
    }
}

fn block_dims(reqs: &[SpatialRequirement], rotations: &[bool], label: usize) -> (Len, Len, bool) {
    reqs[label].dims(rotations.get(label).copied().unwrap_or(false))
}

/// B*-Tree placement: the root sits at the origin, a left child starts at its
/// parent's right edge and a right child shares its parent's `x`.
pub fn place_bstar(tree: &LayoutTree, reqs: &[SpatialRequirement], rotations: &[bool]) -> Floorplan {
    assert_eq!(tree.kind(), TreeKind::Binary);
    let mut xs = vec![0; tree.n() + 1];
    let mut right_edge = vec![0; tree.n() + 1];
    let mut contour = Contour::new();
    let mut blocks = Vec::with_capacity(tree.n());
    for node in tree.dfs_order() {
        let x = match (tree.parent(node), tree.side_of(node)) {
            (Some(p), Some(Side::Left)) => right_edge[p.0],
            (Some(p), _) => xs[p.0],
            (None, _) => 0,
        };
        let label = node.label().expect("binary nodes are labeled");
        let (w, h, rotated) = block_dims(reqs, rotations, label);
        let y = contour.place(x, w, h);
        xs[node.0] = x;
        right_edge[node.0] = x + w;
        blocks.push(SpatialBlock { label, x, y, w, h, rotated });
    }
    Floorplan {
        blocks,
        tree: tree.clone(),
    }
}

/// O-Tree placement: `D_0` is the left boundary (`x = 0`, zero width) and
/// every child starts at its parent's right edge.
pub fn place_otree(tree: &LayoutTree, reqs: &[SpatialRequirement], rotations: &[bool]) -> Floorplan {
    assert_eq!(tree.kind(), TreeKind::Nary);
    let mut right_edge = vec![0; tree.n() + 1];
    let mut contour = Contour::new();
    let mut blocks = Vec::with_capacity(tree.n());
    for node in tree.dfs_order() {
        let Some(label) = node.label() else { continue };
        let parent = tree.parent(node).expect("labeled nodes have a parent");
        let x = right_edge[parent.0];
        let (w, h, rotated) = block_dims(reqs, rotations, label);
        let y = contour.place(x, w, h);
        right_edge[node.0] = x + w;
        blocks.push(SpatialBlock { label, x, y, w, h, rotated });
    }
    Floorplan {
        blocks,
        tree: tree.clone(),
    }
}

/// Dispatches on the tree kind.
pub fn place(tree: &LayoutTree, reqs: &[SpatialRequirement], rotations: &[bool]) -> Floorplan {
    match tree.kind() {
        TreeKind::Binary => place_bstar(tree, reqs, rotations),
        TreeKind::Nary => place_otree(tree, reqs, rotations),
    }
}
