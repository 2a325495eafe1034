//! Axis-aligned rectangles and simple polygons on the micro-unit grid.

use serde::{Deserialize, Serialize};

use crate::units::{serde_len, Len};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    #[serde(with = "serde_len")]
    pub x: Len,
    #[serde(with = "serde_len")]
    pub y: Len,
}

impl Point {
    pub fn new(x: Len, y: Len) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    #[serde(with = "serde_len")]
    pub x: Len,
    #[serde(with = "serde_len")]
    pub y: Len,
    #[serde(with = "serde_len")]
    pub w: Len,
    #[serde(with = "serde_len")]
    pub h: Len,
}

impl Rect {
    pub fn new(x: Len, y: Len, w: Len, h: Len) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> Len {
        self.x + self.w
    }

    pub fn top(&self) -> Len {
        self.y + self.h
    }

    pub fn area(&self) -> i128 {
        self.w as i128 * self.h as i128
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x, self.y),
            Point::new(self.right(), self.y),
            Point::new(self.right(), self.top()),
            Point::new(self.x, self.top()),
        ]
    }

    /// True when the open interiors intersect.
    pub fn interiors_overlap(&self, other: &Rect) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.top()
            && other.y < self.top()
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.top() <= self.top()
    }

    /// Length of the boundary segment shared with `other`; 0 for corner
    /// touches, disjoint or overlapping rectangles.
    pub fn shared_edge(&self, other: &Rect) -> Len {
        if self.interiors_overlap(other) {
            return 0;
        }
        if self.right() == other.x || other.right() == self.x {
            let len = self.top().min(other.top()) - self.y.max(other.y);
            if len > 0 {
                return len;
            }
        }
        if self.top() == other.y || other.top() == self.y {
            let len = self.right().min(other.right()) - self.x.max(other.x);
            if len > 0 {
                return len;
            }
        }
        0
    }

    /// Axis gaps `(dx, dy)` between the two rectangles, zero when the
    /// projections overlap or touch.
    pub fn gaps(&self, other: &Rect) -> (Len, Len) {
        let dx = (other.x - self.right()).max(self.x - other.right()).max(0);
        let dy = (other.y - self.top()).max(self.y - other.top()).max(0);
        (dx, dy)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        Rect::new(
            x,
            y,
            self.right().max(other.right()) - x,
            self.top().max(other.top()) - y,
        )
    }
}

fn cross(o: Point, a: Point, b: Point) -> i128 {
    (a.x - o.x) as i128 * (b.y - o.y) as i128 - (a.y - o.y) as i128 * (b.x - o.x) as i128
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    cross(a, b, p) == 0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

fn segments_properly_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a).signum();
    let d2 = cross(c, d, b).signum();
    let d3 = cross(a, b, c).signum();
    let d4 = cross(a, b, d).signum();
    d1 * d2 < 0 && d3 * d4 < 0
}

fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    segments_properly_cross(a, b, c, d)
        || on_segment(a, c, d)
        || on_segment(b, c, d)
        || on_segment(c, a, b)
        || on_segment(d, a, b)
}

/// Simple polygon given by its vertices in order (either orientation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn from_rect(r: &Rect) -> Self {
        Self::new(r.corners().to_vec())
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn twice_signed_area(&self) -> i128 {
        let v = &self.vertices;
        let n = v.len();
        (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                a.x as i128 * b.y as i128 - b.x as i128 * a.y as i128
            })
            .sum()
    }

    /// At least three vertices, non-zero area and no two non-adjacent edges
    /// touching.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 || self.twice_signed_area() == 0 {
            return false;
        }
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            if edges[i].0 == edges[i].1 {
                return false;
            }
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if adjacent {
                    // Neighbours share one vertex; a collinear fold-back overlaps.
                    let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    let dot = (p.x - shared.x) as i128 * (q.x - shared.x) as i128
                        + (p.y - shared.y) as i128 * (q.y - shared.y) as i128;
                    if cross(shared, p, q) == 0 && dot > 0 {
                        return false;
                    }
                } else if segments_touch(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        self.edges().any(|(a, b)| on_segment(p, a, b))
    }

    /// Inside or on the boundary.
    pub fn contains_point(&self, p: Point) -> bool {
        if self.on_boundary(p) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                // x of the crossing compared against p.x without division
                let lhs = (p.x - a.x) as i128 * (b.y - a.y) as i128;
                let rhs = (b.x - a.x) as i128 * (p.y - a.y) as i128;
                let crosses = if b.y > a.y { lhs < rhs } else { lhs > rhs };
                if crosses {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True when some edge passes through the open interior of `r`.
    pub fn edge_crosses_interior(&self, r: &Rect) -> bool {
        self.edges().any(|(a, b)| segment_hits_open_rect(a, b, r))
    }

    pub fn bounds(&self) -> Option<Rect> {
        let mut it = self.vertices.iter();
        let first = it.next()?;
        let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.x, first.y);
        for p in it {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        Some(Rect::new(x0, y0, x1 - x0, y1 - y0))
    }
}

/// Separating-axis test between a closed segment and an open rectangle.
fn segment_hits_open_rect(a: Point, b: Point, r: &Rect) -> bool {
    if a.x.max(b.x) <= r.x || a.x.min(b.x) >= r.right() {
        return false;
    }
    if a.y.max(b.y) <= r.y || a.y.min(b.y) >= r.top() {
        return false;
    }
    // Project the rectangle corners onto the segment normal; the segment sits at
    // a single value (zero), so it is separated when all corners lie on one side
    // or on the line.
    let signs: Vec<i128> = r.corners().iter().map(|&c| cross(a, b, c).signum()).collect();
    let pos = signs.iter().any(|&s| s > 0);
    let neg = signs.iter().any(|&s| s < 0);
    pos && neg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn shared_edge_excludes_corner_contact() {
        let a = Rect::new(0, 0, 4, 3);
        let b = Rect::new(4, 0, 2, 2);
        let d = Rect::new(4, 3, 1, 1);
        assert_eq!(a.shared_edge(&b), 2);
        assert_eq!(b.shared_edge(&a), 2);
        assert_eq!(a.shared_edge(&d), 0);
    }

    #[test]
    fn simple_polygon_checks() {
        let square = Polygon::new(vec![p(0, 0), p(4, 0), p(4, 4), p(0, 4)]);
        assert!(square.is_simple());
        let bowtie = Polygon::new(vec![p(0, 0), p(4, 4), p(4, 0), p(0, 4)]);
        assert!(!bowtie.is_simple());
        let line = Polygon::new(vec![p(0, 0), p(4, 0), p(8, 0)]);
        assert!(!line.is_simple());
    }

    #[test]
    fn point_in_l_shape() {
        let l = Polygon::new(vec![p(0, 0), p(6, 0), p(6, 3), p(3, 3), p(3, 6), p(0, 6)]);
        assert!(l.contains_point(p(1, 1)));
        assert!(l.contains_point(p(3, 3)));
        assert!(l.contains_point(p(6, 0)));
        assert!(!l.contains_point(p(5, 5)));
    }

    #[test]
    fn edge_crossing_open_rect() {
        let r = Rect::new(0, 0, 4, 4);
        assert!(segment_hits_open_rect(p(2, -1), p(2, 5), &r));
        assert!(!segment_hits_open_rect(p(0, -1), p(0, 5), &r));
        assert!(!segment_hits_open_rect(p(4, 4), p(6, 6), &r));
        assert!(segment_hits_open_rect(p(-1, -1), p(5, 5), &r));
    }
}
