//! JSON documents and run artifacts.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::extend::ExtendedLayout;
use crate::geom::Rect;
use crate::model::{AdjacencyGoal, Problem, Representation, SpatialRequirement};
use crate::perturb::PermutationParams;
use crate::placement::{Floorplan, SpatialBlock};
use crate::search::{GAConfig, GenerationStats, RunResult, Solution};
use crate::treegraph::LayoutTree;
use crate::units::serde_len;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub id: String,
    #[serde(with = "serde_len")]
    pub x: i64,
    #[serde(with = "serde_len")]
    pub y: i64,
    #[serde(with = "serde_len")]
    pub w: i64,
    #[serde(with = "serde_len")]
    pub h: i64,
    #[serde(default)]
    pub rotated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectDoc {
    #[serde(with = "serde_len")]
    pub x: i64,
    #[serde(with = "serde_len")]
    pub y: i64,
    #[serde(with = "serde_len")]
    pub w: i64,
    #[serde(with = "serde_len")]
    pub h: i64,
}

impl From<Rect> for RectDoc {
    fn from(r: Rect) -> Self {
        RectDoc {
            x: r.x,
            y: r.y,
            w: r.w,
            h: r.h,
        }
    }
}

impl From<&RectDoc> for Rect {
    fn from(r: &RectDoc) -> Self {
        Rect::new(r.x, r.y, r.w, r.h)
    }
}

/// A placed layout. `requirements` and `goals` are carried along so the
/// document can be rendered and re-evaluated on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorplanDoc {
    pub representation: Representation,
    pub blocks: Vec<BlockDoc>,
    pub tree: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PermutationParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub requirements: Vec<SpatialRequirement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub goals: Vec<AdjacencyGoal>,
}

impl FloorplanDoc {
    pub fn new(problem: &Problem, fp: &Floorplan, params: Option<PermutationParams>) -> Self {
        let reqs = problem.requirements();
        FloorplanDoc {
            representation: problem.representation(),
            blocks: fp
                .blocks
                .iter()
                .map(|b| BlockDoc {
                    id: reqs[b.label].id.clone(),
                    x: b.x,
                    y: b.y,
                    w: b.w,
                    h: b.h,
                    rotated: b.rotated,
                })
                .collect(),
            tree: fp.tree.to_json(),
            params,
            requirements: reqs.to_vec(),
            goals: problem.goals().to_vec(),
        }
    }

    /// Rebuilds the floorplan, resolving block ids against `reqs`.
    pub fn floorplan(&self, reqs: &[SpatialRequirement]) -> Result<Floorplan> {
        let index: HashMap<&str, usize> = reqs.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let label = *index
                    .get(b.id.as_str())
                    .ok_or_else(|| Error::InvalidLayout(format!("unknown block id `{}`", b.id)))?;
                if b.w <= 0 || b.h <= 0 {
                    return Err(Error::InvalidLayout(format!("block `{}` has no area", b.id)));
                }
                Ok(SpatialBlock {
                    label,
                    x: b.x,
                    y: b.y,
                    w: b.w,
                    h: b.h,
                    rotated: b.rotated,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let tree = LayoutTree::from_json(&self.tree)?;
        if tree.kind() != self.representation.tree_kind() || tree.n() != blocks.len() {
            return Err(Error::InvalidLayout("tree does not match the block list".into()));
        }
        Ok(Floorplan { blocks, tree })
    }

    /// The embedded problem, if the document carries its requirements.
    pub fn problem(&self) -> Result<Problem> {
        if self.requirements.is_empty() {
            return Err(Error::InvalidLayout("document carries no requirements".into()));
        }
        Problem::new(
            self.requirements.clone(),
            self.goals.clone(),
            None,
            self.representation,
            false,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("floorplan documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedDoc {
    pub representation: Representation,
    pub blocks: Vec<BlockDoc>,
    pub tree: Value,
    pub boundary: RectDoc,
    pub coverage: f64,
    pub penalty: bool,
}

impl ExtendedDoc {
    pub fn new(problem: &Problem, fp: &Floorplan, ex: &ExtendedLayout) -> Self {
        let reqs = problem.requirements();
        ExtendedDoc {
            representation: problem.representation(),
            blocks: ex
                .blocks
                .iter()
                .map(|b| BlockDoc {
                    id: reqs[b.label].id.clone(),
                    x: b.rect.x,
                    y: b.rect.y,
                    w: b.rect.w,
                    h: b.rect.h,
                    rotated: fp.block(b.label).is_some_and(|p| p.rotated),
                })
                .collect(),
            tree: fp.tree.to_json(),
            boundary: ex.boundary.into(),
            coverage: ex.coverage,
            penalty: ex.penalty,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("extended documents always serialize")
    }
}

/// One archived solution as written to `pareto/NNN.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    #[serde(flatten)]
    pub floorplan: FloorplanDoc,
    pub genome: Vec<u32>,
    pub rotations: Vec<bool>,
    pub objectives: Vec<f64>,
    pub adjacency: usize,
    pub required: usize,
    pub area: f64,
    pub feasible: bool,
}

impl SolutionDoc {
    pub fn new(problem: &Problem, s: &Solution) -> Self {
        SolutionDoc {
            floorplan: FloorplanDoc::new(problem, &s.floorplan, Some(s.params.clone())),
            genome: s.genome.clone(),
            rotations: s.rotations.clone(),
            objectives: s.objectives.clone(),
            adjacency: s.adjacency,
            required: problem.adjacency_count(),
            area: s.area,
            feasible: s.feasible(),
        }
    }
}

/// `generation,best_adjacency,min_area`; empty cells when a generation had
/// no feasible member.
pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best_adjacency,min_area\n");
    for h in history {
        let adj = h.best_adjacency.map(|v| v.to_string()).unwrap_or_default();
        let area = h.min_area.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{adj},{area}", h.generation);
    }
    out
}

/// Inverse of [`history_csv`].
pub fn parse_history_csv(text: &str) -> Result<Vec<GenerationStats>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv {
            row: row + 2,
            column: String::new(),
            message: e.to_string(),
        })?;
        let field = |k: usize, name: &str| -> Result<Option<&str>> {
            let v = rec.get(k).ok_or_else(|| Error::Csv {
                row: row + 2,
                column: name.into(),
                message: "missing".into(),
            })?;
            Ok((!v.is_empty()).then_some(v))
        };
        let bad = |name: &str| Error::Csv {
            row: row + 2,
            column: name.into(),
            message: "not a number".into(),
        };
        out.push(GenerationStats {
            generation: field(0, "generation")?
                .ok_or_else(|| bad("generation"))?
                .parse()
                .map_err(|_| bad("generation"))?,
            best_adjacency: field(1, "best_adjacency")?
                .map(|v| v.parse().map_err(|_| bad("best_adjacency")))
                .transpose()?,
            min_area: field(2, "min_area")?
                .map(|v| v.parse().map_err(|_| bad("min_area")))
                .transpose()?,
            feasible: 0,
        });
    }
    Ok(out)
}

/// Writes `config.json`, `problem.json`, `history.csv` and `pareto/NNN.json`.
pub fn write_run_dir(dir: &Path, problem: &Problem, config: &GAConfig, result: &RunResult) -> Result<()> {
    let pareto = dir.join("pareto");
    fs::create_dir_all(&pareto)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)?)?;
    fs::write(dir.join("problem.json"), serde_json::to_string_pretty(problem)?)?;
    fs::write(dir.join("history.csv"), history_csv(&result.history))?;
    for (i, s) in result.pareto.iter().enumerate() {
        let doc = SolutionDoc::new(problem, s);
        fs::write(pareto.join(format!("{i:03}.json")), serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(())
}
