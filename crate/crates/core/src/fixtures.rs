//! Reference problems shipped with the crate, each with answers known ahead of
//! running the engine.
//!
//! The CSV and JSON sources live in `fixtures/` and are compiled in, so tests
//! and the CLI see identical bytes.

use serde::Deserialize;
use serde_json::Value;

use crate::geom::Rect;
use crate::io::FloorplanDoc;
use crate::model::{load_requirements_csv, Priority, Problem, Representation};
use crate::perturb::{PermutationParams, TargetDescriptor};
use crate::placement::{place, Floorplan};
use crate::search::{Constraint, GAConfig, Objective};
use crate::treegraph::NodeId;
use crate::units::from_units;

pub const RESIDENTIAL8_L1_CSV: &str = include_str!("../fixtures/residential8_l1.csv");
pub const RESIDENTIAL8_L2_CSV: &str = include_str!("../fixtures/residential8.csv");
pub const RESIDENTIAL8_L3_CSV: &str = include_str!("../fixtures/residential8_l3.csv");
pub const RESIDENTIAL8_LAYOUT_JSON: &str = include_str!("../fixtures/residential8_layout.json");
pub const ABC_CSV: &str = include_str!("../fixtures/abc.csv");
pub const ASC_DES_CASE1_JSON: &str = include_str!("../fixtures/asc_des_case1.json");

/// Where a known answer comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Reported for the original experiments.
    Reported,
    /// Worked out independently of the engine (by hand, enumeration or a
    /// separate interpreter).
    Derived,
    /// Follows directly from the definition.
    Immediate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownAnswer {
    pub name: &'static str,
    pub value: f64,
    pub origin: Origin,
}

impl KnownAnswer {
    const fn new(name: &'static str, value: f64, origin: Origin) -> Self {
        Self { name, value, origin }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub problem: Problem,
    pub answers: Vec<KnownAnswer>,
}

impl Fixture {
    pub fn answer(&self, name: &str) -> Option<f64> {
        self.answers.iter().find(|a| a.name == name).map(|a| a.value)
    }
}

/// Method the residential problem was calibrated with.
pub const RESIDENTIAL8_METHOD: Representation = Representation::OtreeProceeding;

/// The residential problem at one goal level: 14, 10 or 8 goal pairs
/// (28, 20 or 16 counted per endpoint).
pub fn residential8(level: Priority) -> Problem {
    let text = match level {
        Priority::L1 => RESIDENTIAL8_L1_CSV,
        Priority::L2 => RESIDENTIAL8_L2_CSV,
        Priority::L3 => RESIDENTIAL8_L3_CSV,
    };
    let sheet = load_requirements_csv(text).expect("bundled residential8 csv");
    Problem::from_sheet(sheet, RESIDENTIAL8_METHOD).expect("bundled residential8 problem")
}

pub fn residential8_fixture(level: Priority) -> Fixture {
    let count = match level {
        Priority::L1 => 28.0,
        Priority::L2 => 20.0,
        Priority::L3 => 16.0,
    };
    Fixture {
        name: match level {
            Priority::L1 => "residential8_l1",
            Priority::L2 => "residential8",
            Priority::L3 => "residential8_l3",
        },
        problem: residential8(level),
        answers: vec![
            KnownAnswer::new("requirements", 8.0, Origin::Immediate),
            KnownAnswer::new("adjacency_count", count, Origin::Reported),
            KnownAnswer::new("layout_achieved", count, Origin::Derived),
            KnownAnswer::new("corridor_goals_l1", 6.0, Origin::Derived),
        ],
    }
}

/// Hand-built layout realizing every L1 goal, with the parameters that
/// reproduce it.
pub fn residential8_layout() -> (Problem, Floorplan, PermutationParams) {
    let doc = FloorplanDoc::from_json(RESIDENTIAL8_LAYOUT_JSON).expect("bundled layout");
    let problem = doc.problem().expect("layout carries its problem");
    let fp = doc.floorplan(problem.requirements()).expect("layout matches problem");
    let params = doc.params.clone().expect("layout carries params");
    (problem, fp, params)
}

/// GA settings for the goal-count runs: population 100, 15 generations,
/// rates 0.2/0.1, adjacency as the sole objective.
pub fn goal_count_config(seed: u64) -> GAConfig {
    GAConfig {
        seed,
        objectives: vec![Objective::MaximizeAdjacency],
        ..GAConfig::default()
    }
}

/// GA settings for the diversity runs: layouts reaching 20 of the 28 L1
/// goal endpoints are feasible and compete on total closest distance. Pair
/// with a problem that has rotation genes enabled.
pub fn emerging_config(seed: u64) -> GAConfig {
    GAConfig {
        seed,
        objectives: vec![Objective::MinimizeTotalClosestDistance],
        constraints: vec![Constraint::MinAdjacency(20)],
        ..GAConfig::default()
    }
}

/// Three blocks a(4×3), b(2×2), c(3×1) with goals a-b and a-c.
pub fn abc() -> Problem {
    let sheet = load_requirements_csv(ABC_CSV).expect("bundled abc csv");
    Problem::from_sheet(sheet, Representation::BstarAvailableNodes).expect("bundled abc problem")
}

/// Standard-tree placement of [`abc`]: a(0,0,4,3), b(4,0,2,2), c(0,3,3,1).
pub fn abc_floorplan() -> Floorplan {
    let p = abc();
    let tree = crate::model::build_standard_tree(&p);
    place(&tree, p.requirements(), &[false; 3])
}

pub fn abc_fixture() -> Fixture {
    Fixture {
        name: "abc",
        problem: abc(),
        answers: vec![
            KnownAnswer::new("bounding_area", 24.0, Origin::Derived),
            KnownAnswer::new("closest_distance_b_c", 2f64.sqrt(), Origin::Derived),
            KnownAnswer::new("achieved_pairs", 2.0, Origin::Derived),
            KnownAnswer::new("extended_coverage_12x8", 1.0, Origin::Derived),
        ],
    }
}

/// Boundary the abc floorplan tiles exactly.
pub fn abc_tiling_boundary() -> Rect {
    Rect {
        x: 0,
        y: 0,
        w: from_units(12.0),
        h: from_units(8.0),
    }
}

/// One relocation with the tree before and after it.
#[derive(Debug, Clone, Deserialize)]
pub struct RelocationTrace {
    pub n: usize,
    pub active: NodeId,
    pub target: TargetDescriptor,
    pub before: Value,
    pub after: Value,
}

/// D2 of the three-node standard tree moved into D3's right slot.
pub fn asc_des_case1() -> RelocationTrace {
    serde_json::from_str(ASC_DES_CASE1_JSON).expect("bundled trace")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::evaluate;

    #[test]
    fn residential_goal_counts() {
        for level in [Priority::L1, Priority::L2, Priority::L3] {
            let f = residential8_fixture(level);
            assert_eq!(f.problem.n(), 8);
            assert_eq!(f.problem.adjacency_count() as f64, f.answer("adjacency_count").unwrap());
        }
    }

    #[test]
    fn levels_are_nested() {
        let pairs = |l| residential8(l).goal_pairs().to_vec();
        let (l1, l2, l3) = (pairs(Priority::L1), pairs(Priority::L2), pairs(Priority::L3));
        assert!(l3.iter().all(|p| l2.contains(p)));
        assert!(l2.iter().all(|p| l1.contains(p)));
        assert_eq!(crate::model::prune_transitive(&l1), l3);
    }

    #[test]
    fn corridor_goals() {
        let p = residential8(Priority::L1);
        let c = p.index_of("corridor").unwrap();
        let n = p.goal_pairs().iter().filter(|&&(a, b)| a == c || b == c).count();
        assert_eq!(n as f64, residential8_fixture(Priority::L1).answer("corridor_goals_l1").unwrap());
    }

    #[test]
    fn layout_achieves_every_level() {
        let (problem, fp, params) = residential8_layout();
        assert_eq!(params.representation(), RESIDENTIAL8_METHOD);
        assert!(fp.first_overlap().is_none());
        for level in [Priority::L1, Priority::L2, Priority::L3] {
            let p = residential8(level);
            assert_eq!(problem.requirements(), p.requirements());
            let r = evaluate(&p, &fp, 0).unwrap();
            assert_eq!(r.adjacency.count, p.adjacency_count(), "{level}");
        }
    }

    #[test]
    fn abc_layout() {
        let fp = abc_floorplan();
        let got: Vec<_> = fp.blocks.iter().map(|b| (b.x, b.y, b.w, b.h)).collect();
        let u = |v: f64| from_units(v);
        assert_eq!(
            got,
            vec![(0, 0, u(4.0), u(3.0)), (u(4.0), 0, u(2.0), u(2.0)), (0, u(3.0), u(3.0), u(1.0))]
        );
    }

    #[test]
    fn trace_parses() {
        let t = asc_des_case1();
        assert_eq!((t.n, t.active), (3, NodeId(2)));
        assert_eq!(t.target, TargetDescriptor::AttachOrInsertRight(NodeId(3)));
    }
}
