//! Fitness evaluators over a placed floorplan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Polygon, Rect};
use crate::model::Problem;
use crate::placement::{Floorplan, SpatialBlock};
use crate::units::{area_units, to_units, Len, SCALE};

/// Unordered label pairs `(a, b)` with `a < b` whose rectangles share an edge
/// segment longer than `min_shared`. Sorted.
pub fn resulted_adjacency(blocks: &[SpatialBlock], min_shared: Len) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            if a.rect().shared_edge(&b.rect()) > min_shared {
                out.push((a.label.min(b.label), a.label.max(b.label)));
            }
        }
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalOutcome {
    pub a: usize,
    pub b: usize,
    pub achieved: bool,
}

/// Goal-by-goal comparison of resulted and target adjacencies.
///
/// Counts are per endpoint: a goal between two blocks appears in the tally of
/// both, so `required` is twice the number of goal pairs and `achieved_count`
/// twice the number of met pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyReport {
    pub resulted: Vec<(usize, usize)>,
    pub per_goal: Vec<GoalOutcome>,
    pub achieved_pairs: usize,
    pub achieved_count: usize,
    pub required: usize,
}

pub fn adjacency_check(resulted: &[(usize, usize)], goals: &[(usize, usize)]) -> AdjacencyReport {
    let per_goal: Vec<GoalOutcome> = goals
        .iter()
        .map(|&(a, b)| {
            let key = (a.min(b), a.max(b));
            GoalOutcome {
                a,
                b,
                achieved: resulted.binary_search(&key).is_ok(),
            }
        })
        .collect();
    let achieved_pairs = per_goal.iter().filter(|g| g.achieved).count();
    AdjacencyReport {
        resulted: resulted.to_vec(),
        per_goal,
        achieved_pairs,
        achieved_count: 2 * achieved_pairs,
        required: 2 * goals.len(),
    }
}

/// Minimum bounding rectangle and its area.
pub fn bounding_area(blocks: &[SpatialBlock]) -> Result<(Rect, i128)> {
    let rect = blocks
        .iter()
        .map(SpatialBlock::rect)
        .reduce(|a, b| a.union(&b))
        .ok_or(Error::EmptyFloorplan)?;
    Ok((rect, rect.area()))
}

/// Euclidean distance between two rectangles; 0 when they touch or overlap.
pub fn rect_distance(a: &Rect, b: &Rect) -> f64 {
    let (dx, dy) = a.gaps(b);
    (dx as f64).hypot(dy as f64)
}

/// Distance from `block` to the nearest of `others`.
pub fn closest_distance(block: &Rect, others: &[Rect]) -> f64 {
    others
        .iter()
        .map(|o| rect_distance(block, o))
        .fold(f64::INFINITY, f64::min)
}

/// Per block, in block order, the distance to its nearest neighbour. A
/// single block has distance 0.
pub fn closest_distances(blocks: &[SpatialBlock]) -> Vec<f64> {
    let rects: Vec<Rect> = blocks.iter().map(SpatialBlock::rect).collect();
    (0..rects.len())
        .map(|i| {
            let others: Vec<Rect> = rects
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, r)| *r)
                .collect();
            if others.is_empty() {
                0.0
            } else {
                closest_distance(&rects[i], &others)
            }
        })
        .collect()
}

/// Blocks fully inside-or-on `polygon`, per block and overall.
pub fn within_boundary(blocks: &[SpatialBlock], polygon: &Polygon) -> Result<(bool, Vec<bool>)> {
    if !polygon.is_simple() {
        return Err(Error::DegenerateBoundary("boundary polygon is not simple".into()));
    }
    let per_block: Vec<bool> = blocks
        .iter()
        .map(|b| {
            let r = b.rect();
            r.corners().iter().all(|&c| polygon.contains_point(c)) && !polygon.edge_crosses_interior(&r)
        })
        .collect();
    Ok((per_block.iter().all(|&v| v), per_block))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalReport {
    pub a: String,
    pub b: String,
    pub achieved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencySummary {
    pub count: usize,
    pub required: usize,
    pub per_goal: Vec<GoalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingSummary {
    pub w: f64,
    pub h: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDistance {
    pub id: String,
    pub closest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub total: f64,
    pub per_block: Vec<BlockDistance>,
}

/// Evaluation report in lengths of the problem's units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub adjacency: AdjacencySummary,
    pub bounding: BoundingSummary,
    pub distances: DistanceSummary,
    pub inside: bool,
}

/// Runs every evaluator. `inside` is true when the problem has no boundary.
pub fn evaluate(problem: &Problem, fp: &Floorplan, min_shared: Len) -> Result<EvaluationReport> {
    let reqs = problem.requirements();
    let id = |label: usize| reqs[label].id.clone();
    let report = adjacency_check(&resulted_adjacency(&fp.blocks, min_shared), problem.goal_pairs());
    let (rect, _) = bounding_area(&fp.blocks)?;
    let distances = closest_distances(&fp.blocks);
    let inside = match problem.boundary() {
        Some(b) => within_boundary(&fp.blocks, &b.polygon())?.0,
        None => true,
    };
    Ok(EvaluationReport {
        adjacency: AdjacencySummary {
            count: report.achieved_count,
            required: report.required,
            per_goal: report
                .per_goal
                .iter()
                .map(|g| GoalReport {
                    a: id(g.a),
                    b: id(g.b),
                    achieved: g.achieved,
                })
                .collect(),
        },
        bounding: BoundingSummary {
            w: to_units(rect.w),
            h: to_units(rect.h),
            area: area_units(rect.w, rect.h),
        },
        distances: DistanceSummary {
            total: distances.iter().map(|&d| d / SCALE as f64).sum(),
            per_block: fp
                .blocks
                .iter()
                .zip(&distances)
                .map(|(b, &d)| BlockDistance {
                    id: id(b.label),
                    closest: d / SCALE as f64,
                })
                .collect(),
        },
        inside,
    })
}
