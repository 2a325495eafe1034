//! SVG renderers. Output depends only on the inputs, so equal inputs give
//! byte-identical documents.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{adjacency_check, bounding_area, resulted_adjacency};
use crate::geom::Rect;
use crate::model::SpatialRequirement;
use crate::placement::Floorplan;
use crate::treegraph::{LayoutTree, NodeId, Side, TreeKind};
use crate::units::Len;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderKind {
    #[default]
    Floorplan,
    Bubble,
    Tree,
}

impl std::str::FromStr for RenderKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "floorplan" => Ok(RenderKind::Floorplan),
            "bubble" => Ok(RenderKind::Bubble),
            "tree" => Ok(RenderKind::Tree),
            other => Err(format!("unknown render kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub achieved: String,
    pub missed: String,
    pub fill: String,
    pub stroke: String,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            achieved: "#2e7d32".into(),
            missed: "#c62828".into(),
            fill: "#e8eef6".into(),
            stroke: "#34495e".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub kind: RenderKind,
    /// Width of the drawing in pixels.
    pub size: u32,
    #[serde(default)]
    pub palette: Palette,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            kind: RenderKind::Floorplan,
            size: 480,
            palette: Palette::default(),
        }
    }
}

impl RenderSpec {
    pub fn new(kind: RenderKind) -> Self {
        RenderSpec {
            kind,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidConfig("render size must be positive".into()));
        }
        Ok(())
    }
}

const MARGIN: f64 = 16.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Layout-to-pixel mapping with the y axis flipped.
struct Frame {
    bb: Rect,
    k: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(bb: Rect, size: u32) -> Frame {
        let inner = f64::from(size) - 2.0 * MARGIN;
        let k = inner.max(1.0) / bb.w.max(1) as f64;
        let height = bb.h as f64 * k + 2.0 * MARGIN;
        Frame {
            bb,
            k,
            width: f64::from(size),
            height,
        }
    }

    fn x(&self, v: Len) -> f64 {
        MARGIN + (v - self.bb.x) as f64 * self.k
    }

    fn y(&self, v: Len) -> f64 {
        MARGIN + (self.bb.top() - v) as f64 * self.k
    }

    fn header(&self, out: &mut String, kind: &str) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" class="{kind}" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = num(self.width),
            h = num(self.height)
        );
    }
}

fn id_of(reqs: &[SpatialRequirement], label: usize) -> String {
    reqs.get(label).map_or_else(|| label.to_string(), |r| r.id.clone())
}

/// One labelled `<rect>` per block.
pub fn render_floorplan_svg(fp: &Floorplan, reqs: &[SpatialRequirement], spec: &RenderSpec) -> Result<String> {
    spec.check()?;
    let (bb, _) = bounding_area(&fp.blocks)?;
    let f = Frame::new(bb, spec.size);
    let p = &spec.palette;
    let mut out = String::new();
    f.header(&mut out, "floorplan");
    for b in &fp.blocks {
        let id = escape(&id_of(reqs, b.label));
        let _ = writeln!(
            out,
            r#"<rect data-id="{id}" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="{}"/>"#,
            num(f.x(b.x)),
            num(f.y(b.y + b.h)),
            num(b.w as f64 * f.k),
            num(b.h as f64 * f.k),
            p.fill,
            p.stroke
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" font-size="11">{id}</text>"#,
            num(f.x(b.x) + b.w as f64 * f.k / 2.0),
            num(f.y(b.y + b.h) + b.h as f64 * f.k / 2.0)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// One circle per block at its centroid and one line per goal, classed and
/// colored by whether the goal is met.
pub fn render_bubble_svg(
    fp: &Floorplan,
    reqs: &[SpatialRequirement],
    goals: &[(usize, usize)],
    min_shared: Len,
    spec: &RenderSpec,
) -> Result<String> {
    spec.check()?;
    let (bb, _) = bounding_area(&fp.blocks)?;
    let f = Frame::new(bb, spec.size);
    let p = &spec.palette;
    let report = adjacency_check(&resulted_adjacency(&fp.blocks, min_shared), goals);
    let centre = |label: usize| {
        fp.block(label).map(|b| {
            (
                f.x(b.x) + b.w as f64 * f.k / 2.0,
                f.y(b.y + b.h) + b.h as f64 * f.k / 2.0,
            )
        })
    };
    let mut out = String::new();
    f.header(&mut out, "bubble");
    for g in &report.per_goal {
        let (Some((x1, y1)), Some((x2, y2))) = (centre(g.a), centre(g.b)) else {
            return Err(Error::InvalidLayout(format!("goal {}-{} names a missing block", g.a, g.b)));
        };
        let (class, color) = if g.achieved {
            ("achieved", &p.achieved)
        } else {
            ("missed", &p.missed)
        };
        let _ = writeln!(
            out,
            r#"<line class="{class}" data-a="{}" data-b="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="3"/>"#,
            escape(&id_of(reqs, g.a)),
            escape(&id_of(reqs, g.b)),
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }
    for b in &fp.blocks {
        let (cx, cy) = centre(b.label).expect("block exists");
        let id = escape(&id_of(reqs, b.label));
        let _ = writeln!(
            out,
            r#"<circle data-id="{id}" cx="{}" cy="{}" r="14" fill="{}" stroke="{}"/>"#,
            num(cx),
            num(cy),
            p.fill,
            p.stroke
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" font-size="10">{id}</text>"#,
            num(cx),
            num(cy)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Horizontal slot of every node. Binary trees use in-order rank, which puts
/// left children left of and right children right of their parent; n-ary
/// trees center parents over their children.
fn tree_columns(tree: &LayoutTree) -> Vec<(NodeId, f64)> {
    let mut out = Vec::new();
    match tree.kind() {
        TreeKind::Binary => {
            fn walk(t: &LayoutTree, v: NodeId, out: &mut Vec<(NodeId, f64)>) {
                if let Some(l) = t.slot(v, Side::Left) {
                    walk(t, l, out);
                }
                let x = out.len() as f64;
                out.push((v, x));
                if let Some(r) = t.slot(v, Side::Right) {
                    walk(t, r, out);
                }
            }
            walk(tree, tree.root(), &mut out);
        }
        TreeKind::Nary => {
            fn walk(t: &LayoutTree, v: NodeId, next: &mut f64, out: &mut Vec<(NodeId, f64)>) -> f64 {
                let kids = t.children(v);
                let x = if kids.is_empty() {
                    *next += 1.0;
                    *next - 1.0
                } else {
                    let xs: Vec<f64> = kids.iter().map(|&c| walk(t, c, next, out)).collect();
                    (xs[0] + xs[xs.len() - 1]) / 2.0
                };
                out.push((v, x));
                x
            }
            let mut next = 0.0;
            walk(tree, tree.root(), &mut next, &mut out);
        }
    }
    out.sort_by_key(|(v, _)| *v);
    out
}

/// Nodes layered by depth with one edge per parent link.
pub fn render_tree_svg(tree: &LayoutTree, spec: &RenderSpec) -> Result<String> {
    spec.check()?;
    let cols = tree_columns(tree);
    let width = cols.iter().map(|c| c.1).fold(0.0, f64::max) + 1.0;
    let layers = tree.height() as f64;
    let step_x = (f64::from(spec.size) - 2.0 * MARGIN) / width;
    let step_y = 56.0;
    let pos = |v: NodeId| {
        let x = cols.iter().find(|c| c.0 == v).expect("every node has a column").1;
        (MARGIN + (x + 0.5) * step_x, MARGIN + 14.0 + tree.depth(v) as f64 * step_y)
    };
    let height = 2.0 * MARGIN + 28.0 + (layers - 1.0) * step_y;
    let p = &spec.palette;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" class="tree" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(f64::from(spec.size)),
        h = num(height)
    );
    for &(v, _) in &cols {
        if let Some(parent) = tree.parent(v) {
            let (x1, y1) = pos(parent);
            let (x2, y2) = pos(v);
            let side = match (tree.kind(), tree.side_of(v)) {
                (TreeKind::Binary, Some(Side::Left)) => " data-side=\"left\"",
                (TreeKind::Binary, Some(Side::Right)) => " data-side=\"right\"",
                _ => "",
            };
            let _ = writeln!(
                out,
                r#"<line{side} x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}"/>"#,
                num(x1),
                num(y1),
                num(x2),
                num(y2),
                p.stroke
            );
        }
    }
    for &(v, _) in &cols {
        let (cx, cy) = pos(v);
        let _ = writeln!(
            out,
            r#"<circle data-node="{v}" cx="{}" cy="{}" r="13" fill="{}" stroke="{}"/>"#,
            num(cx),
            num(cy),
            p.fill,
            p.stroke
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" font-size="10">{v}</text>"#,
            num(cx),
            num(cy)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
