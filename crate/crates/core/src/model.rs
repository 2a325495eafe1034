//! Problem definition: spatial requirements, adjacency goals and boundary.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Polygon, Rect};
use crate::treegraph::{LayoutTree, TreeKind};
use crate::units::{self, serde_len, Len};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "north" | "n" => Ok(Direction::North),
            "south" | "s" => Ok(Direction::South),
            "east" | "e" => Ok(Direction::East),
            "west" | "w" => Ok(Direction::West),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::North => "north",
            Direction::South => "south",
            Direction::East => "east",
            Direction::West => "west",
        })
    }
}

/// Goal priority level. `L1` holds every requirement, `L2` the designer's
/// high-priority subset and `L3` the set left after transitive pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Priority {
    #[default]
    L1,
    L2,
    L3,
}

impl FromStr for Priority {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L1" | "1" => Ok(Priority::L1),
            "L2" | "2" => Ok(Priority::L2),
            "L3" | "3" => Ok(Priority::L3),
            other => Err(format!("unknown priority `{other}`")),
        }
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialRequirement {
    pub id: String,
    pub name: String,
    #[serde(with = "serde_len")]
    pub width: Len,
    #[serde(with = "serde_len")]
    pub height: Len,
    #[serde(default)]
    pub rotatable: bool,
    #[serde(default = "default_true")]
    pub flexible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_edge: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facing: Option<Direction>,
}

fn default_true() -> bool {
    true
}

impl SpatialRequirement {
    pub fn new(id: impl Into<String>, name: impl Into<String>, width: Len, height: Len) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            width,
            height,
            rotatable: false,
            flexible: true,
            anchor_edge: None,
            facing: None,
        }
    }

    pub fn rotatable(mut self, yes: bool) -> Self {
        self.rotatable = yes;
        self
    }

    pub fn flexible(mut self, yes: bool) -> Self {
        self.flexible = yes;
        self
    }

    pub fn anchored(mut self, edge: Option<Direction>, facing: Option<Direction>) -> Self {
        self.anchor_edge = edge;
        self.facing = facing;
        self
    }

    /// Block dimensions after applying a rotation gene. Non-rotatable
    /// requirements ignore the gene.
    pub fn dims(&self, rotated: bool) -> (Len, Len, bool) {
        if rotated && self.rotatable {
            (self.height, self.width, true)
        } else {
            (self.width, self.height, false)
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.width <= 0 || self.height <= 0 {
            return Err(format!("`{}` has a non-positive dimension", self.id));
        }
        if self.flexible && (self.anchor_edge.is_some() || self.facing.is_some()) {
            return Err(format!(
                "`{}` is flexible but declares anchor_edge/facing",
                self.id
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyGoal {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub priority: Priority,
}

impl AdjacencyGoal {
    pub fn new(a: impl Into<String>, b: impl Into<String>, priority: Priority) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            priority,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Rect(Rect),
    Polygon(Polygon),
}

impl Boundary {
    pub fn polygon(&self) -> Polygon {
        match self {
            Boundary::Rect(r) => Polygon::from_rect(r),
            Boundary::Polygon(p) => p.clone(),
        }
    }

    pub fn as_rect(&self) -> Option<Rect> {
        match self {
            Boundary::Rect(r) => Some(*r),
            Boundary::Polygon(_) => None,
        }
    }
}

/// Which tree encoding and permutation method a problem is searched with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    OtreeProceeding,
    BstarAscendDescend,
    #[default]
    BstarAvailableNodes,
}

impl Representation {
    pub const ALL: [Representation; 3] = [
        Representation::OtreeProceeding,
        Representation::BstarAscendDescend,
        Representation::BstarAvailableNodes,
    ];

    pub fn tree_kind(self) -> TreeKind {
        match self {
            Representation::OtreeProceeding => TreeKind::Nary,
            _ => TreeKind::Binary,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Representation::OtreeProceeding => "otree_proceeding",
            Representation::BstarAscendDescend => "bstar_ascend_descend",
            Representation::BstarAvailableNodes => "bstar_available_nodes",
        }
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "otree_proceeding" | "proceeding" | "otree" => Ok(Representation::OtreeProceeding),
            "bstar_ascend_descend" | "ascend_descend" => Ok(Representation::BstarAscendDescend),
            "bstar_available_nodes" | "available_nodes" => Ok(Representation::BstarAvailableNodes),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemDoc", into = "ProblemDoc")]
pub struct Problem {
    requirements: Vec<SpatialRequirement>,
    goals: Vec<AdjacencyGoal>,
    boundary: Option<Boundary>,
    representation: Representation,
    use_rotation_genes: bool,
    pairs: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    requirements: Vec<SpatialRequirement>,
    #[serde(default)]
    goals: Vec<AdjacencyGoal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<Boundary>,
    #[serde(default)]
    representation: Representation,
    #[serde(default)]
    use_rotation_genes: bool,
}

impl TryFrom<ProblemDoc> for Problem {
    type Error = Error;

    fn try_from(d: ProblemDoc) -> Result<Self> {
        Problem::new(d.requirements, d.goals, d.boundary, d.representation, d.use_rotation_genes)
    }
}

impl From<Problem> for ProblemDoc {
    fn from(p: Problem) -> Self {
        ProblemDoc {
            requirements: p.requirements,
            goals: p.goals,
            boundary: p.boundary,
            representation: p.representation,
            use_rotation_genes: p.use_rotation_genes,
        }
    }
}

impl Problem {
    pub fn new(
        requirements: Vec<SpatialRequirement>,
        goals: Vec<AdjacencyGoal>,
        boundary: Option<Boundary>,
        representation: Representation,
        use_rotation_genes: bool,
    ) -> Result<Self> {
        if requirements.is_empty() {
            return Err(Error::InvalidProblem("at least one requirement is needed".into()));
        }
        let mut index = HashMap::new();
        for (i, r) in requirements.iter().enumerate() {
            r.check().map_err(Error::InvalidProblem)?;
            if index.insert(r.id.as_str(), i).is_some() {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(goals.len());
        for g in &goals {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidProblem(format!("goal references unknown id `{id}`")))
            };
            let (a, b) = (lookup(&g.a)?, lookup(&g.b)?);
            if a == b {
                return Err(Error::InvalidProblem(format!("goal pairs `{}` with itself", g.a)));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(Error::InvalidProblem(format!(
                    "duplicate goal between `{}` and `{}`",
                    g.a, g.b
                )));
            }
            pairs.push(key);
        }
        if let Some(b) = &boundary {
            let poly = b.polygon();
            if !poly.is_simple() {
                return Err(Error::DegenerateBoundary("boundary polygon is not simple".into()));
            }
        }
        Ok(Self {
            requirements,
            goals,
            boundary,
            representation,
            use_rotation_genes,
            pairs,
        })
    }

    /// Builds a problem from a loaded requirement sheet.
    pub fn from_sheet(sheet: RequirementSheet, representation: Representation) -> Result<Self> {
        Problem::new(sheet.requirements, sheet.goals, None, representation, false)
    }

    pub fn n(&self) -> usize {
        self.requirements.len()
    }

    pub fn requirements(&self) -> &[SpatialRequirement] {
        &self.requirements
    }

    pub fn goals(&self) -> &[AdjacencyGoal] {
        &self.goals
    }

    /// Goals as `(min, max)` requirement-index pairs, in goal order.
    pub fn goal_pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn boundary(&self) -> Option<&Boundary> {
        self.boundary.as_ref()
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn use_rotation_genes(&self) -> bool {
        self.use_rotation_genes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.requirements.iter().position(|r| r.id == id)
    }

    /// Adjacency count: each goal is counted once for each of its two
    /// spaces, matching the per-block tally of achieved adjacencies.
    pub fn adjacency_count(&self) -> usize {
        2 * self.goals.len()
    }

    pub fn with_representation(mut self, representation: Representation) -> Self {
        self.representation = representation;
        self
    }

    pub fn with_rotation_genes(mut self, yes: bool) -> Self {
        self.use_rotation_genes = yes;
        self
    }

    pub fn with_boundary(self, boundary: Option<Boundary>) -> Result<Self> {
        Problem::new(
            self.requirements,
            self.goals,
            boundary,
            self.representation,
            self.use_rotation_genes,
        )
    }

    pub fn with_goals(self, goals: Vec<AdjacencyGoal>) -> Result<Self> {
        Problem::new(
            self.requirements,
            goals,
            self.boundary,
            self.representation,
            self.use_rotation_genes,
        )
    }

    pub fn has_fixed_blocks(&self) -> bool {
        self.requirements.iter().any(|r| !r.flexible)
    }
}

/// The Standard Tree for a problem: a complete binary tree for B*-Tree
/// methods, a single-level ordered tree under a synthetic root for O-Trees.
pub fn build_standard_tree(problem: &Problem) -> LayoutTree {
    LayoutTree::standard(problem.representation().tree_kind(), problem.n())
}

/// Requirements and goals read from a CSV sheet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequirementSheet {
    pub requirements: Vec<SpatialRequirement>,
    pub goals: Vec<AdjacencyGoal>,
}

const BASE_COLUMNS: [&str; 7] = [
    "id",
    "name",
    "width",
    "height",
    "rotatable",
    "flexible",
    "adjacent_to",
];

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Some(true),
        "false" | "0" | "no" | "n" | "" => Some(false),
        _ => None,
    }
}

/// Parses the requirement CSV. Rows are numbered from 1 for the first data
/// row. A pair declared from both sides becomes a single goal carrying the
/// priority of its first declaration.
pub fn load_requirements_csv(content: &str) -> Result<RequirementSheet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(0, "header", e.to_string()))?
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    for (k, want) in BASE_COLUMNS.iter().enumerate() {
        if headers.get(k).map(String::as_str) != Some(*want) {
            return Err(csv_err(0, want, format!("expected header column {} to be `{want}`", k + 1)));
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (pri_col, anchor_col, facing_col) = (col("priority"), col("anchor_edge"), col("facing"));

    let mut requirements = Vec::new();
    let mut declared: Vec<(usize, Vec<String>, Priority)> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();

    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| csv_err(row, "row", e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        if record.len() < BASE_COLUMNS.len() - 1 {
            return Err(csv_err(row, "row", format!("expected at least {} fields", BASE_COLUMNS.len() - 1)));
        }
        let id = field(0).to_string();
        if id.is_empty() {
            return Err(csv_err(row, "id", "empty id".into()));
        }
        let dim = |i: usize, name: &str| -> Result<Len> {
            let v = units::parse_decimal(field(i))
                .ok_or_else(|| csv_err(row, name, format!("`{}` is not a decimal", field(i))))?;
            if v <= 0 {
                return Err(csv_err(row, name, format!("dimension must be positive, got {}", field(i))));
            }
            Ok(v)
        };
        let width = dim(2, "width")?;
        let height = dim(3, "height")?;
        let flag = |i: usize, name: &str| {
            parse_bool(field(i)).ok_or_else(|| csv_err(row, name, format!("`{}` is not a boolean", field(i))))
        };
        let rotatable = flag(4, "rotatable")?;
        let flexible = flag(5, "flexible")?;
        let adjacent: Vec<String> = field(6)
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        let optional = |c: Option<usize>| c.map(field).filter(|s| !s.is_empty());
        let priority = match optional(pri_col) {
            Some(s) => s.parse().map_err(|m| csv_err(row, "priority", m))?,
            None => Priority::L1,
        };
        let parse_dir = |c: Option<usize>, name: &str| -> Result<Option<Direction>> {
            optional(c)
                .map(|s| s.parse().map_err(|m| csv_err(row, name, m)))
                .transpose()
        };
        let anchor_edge = parse_dir(anchor_col, "anchor_edge")?;
        let facing = parse_dir(facing_col, "facing")?;
        if flexible && (anchor_edge.is_some() || facing.is_some()) {
            return Err(csv_err(row, "flexible", "anchor_edge/facing require flexible = false".into()));
        }
        if let Some(prev) = ids.insert(id.clone(), row) {
            return Err(csv_err(row, "id", format!("duplicate id `{id}` (first seen on row {prev})")));
        }
        requirements.push(SpatialRequirement {
            id,
            name: field(1).to_string(),
            width,
            height,
            rotatable,
            flexible,
            anchor_edge,
            facing,
        });
        declared.push((row, adjacent, priority));
    }

    let mut goals = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, (row, adjacent, priority)) in declared.into_iter().enumerate() {
        let a = &requirements[i].id;
        for b in adjacent {
            let j = *ids
                .get(&b)
                .ok_or_else(|| csv_err(row, "adjacent_to", format!("unknown id `{b}`")))?
                - 1;
            if j == i {
                return Err(csv_err(row, "adjacent_to", format!("`{a}` cannot be adjacent to itself")));
            }
            if seen.insert((i.min(j), i.max(j))) {
                goals.push(AdjacencyGoal::new(a.clone(), b, priority));
            }
        }
    }
    Ok(RequirementSheet { requirements, goals })
}

fn csv_err(row: usize, column: &str, message: String) -> Error {
    Error::Csv {
        row,
        column: column.to_string(),
        message,
    }
}

/// Writes the sheet in the full ten-column schema. Each goal is listed on the
/// row of its first id; the row's priority is that of its first goal.
pub fn write_requirements_csv(sheet: &RequirementSheet) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let header = [
        "id",
        "name",
        "width",
        "height",
        "rotatable",
        "flexible",
        "adjacent_to",
        "priority",
        "anchor_edge",
        "facing",
    ];
    w.write_record(header).expect("in-memory write");
    for r in &sheet.requirements {
        let own: Vec<&AdjacencyGoal> = sheet.goals.iter().filter(|g| g.a == r.id).collect();
        let adjacent = own.iter().map(|g| g.b.as_str()).collect::<Vec<_>>().join(";");
        let priority = own.first().map(|g| g.priority).unwrap_or_default();
        let opt = |d: Option<Direction>| d.map(|d| d.to_string()).unwrap_or_default();
        w.write_record([
            r.id.clone(),
            r.name.clone(),
            units::format_decimal(r.width),
            units::format_decimal(r.height),
            r.rotatable.to_string(),
            r.flexible.to_string(),
            adjacent,
            priority.to_string(),
            opt(r.anchor_edge),
            opt(r.facing),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Drops goals that close a triangle: walking the pairs in lexicographic
/// index order, a pair `{a, c}` is skipped when some `b` already has kept
/// goals `{a, b}` and `{b, c}`.
pub fn prune_transitive(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut ordered: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    ordered.sort_unstable();
    ordered.dedup();
    let mut neighbours: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    let mut kept = Vec::new();
    for (a, c) in ordered {
        let closes = match (neighbours.get(&a), neighbours.get(&c)) {
            (Some(na), Some(nc)) => na.intersection(nc).next().is_some(),
            _ => false,
        };
        if closes {
            continue;
        }
        neighbours.entry(a).or_default().insert(c);
        neighbours.entry(c).or_default().insert(a);
        kept.push((a, c));
    }
    kept
}

/// Applies [`prune_transitive`] to a goal list, re-tagging survivors as `L3`.
pub fn derive_l3_goals(problem: &Problem) -> Vec<AdjacencyGoal> {
    let reqs = problem.requirements();
    prune_transitive(problem.goal_pairs())
        .into_iter()
        .map(|(a, b)| AdjacencyGoal::new(reqs[a].id.clone(), reqs[b].id.clone(), Priority::L3))
        .collect()
}
