//! Floorplan generation from perturbed O-Trees and B*-Trees.
//!
//! A [`model::Problem`] lists spatial requirements and adjacency goals. A
//! deterministic permutation method ([`perturb`]) turns the problem's Standard
//! Tree plus a parameter vector into a [`treegraph::LayoutTree`], which the
//! contour placer ([`placement`]) converts into rectangles. The evaluators in
//! [`eval`] score a layout and [`search`] runs NSGA-II over parameter genomes.

pub mod error;
pub mod eval;
pub mod extend;
pub mod fixtures;
pub mod geom;
pub mod io;
pub mod model;
pub mod perturb;
pub mod placement;
pub mod render;
pub mod search;
pub mod treegraph;
pub mod units;

pub use error::{Error, Result};
pub use model::{AdjacencyGoal, Problem, Representation, SpatialRequirement};
pub use placement::{Floorplan, SpatialBlock};
pub use treegraph::{LayoutTree, NodeId, TreeKind};
