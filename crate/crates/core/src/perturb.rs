//! Deterministic permutation methods mapping a Standard Tree and a parameter
//! vector to a new layout tree.
//!
//! * Proceeding (O-Tree): step `i` makes `D_{p_i}` the parent of `D_i`.
//! * Ascend/Descend (B*-Tree): step `i` climbs `p_iU` levels from `D_i`, walks
//!   `p_iD` members forward in BFS order, then swaps or re-inserts `D_i`.
//! * Available Nodes (B*-Tree): step `i` relocates `D_i` to entry `p_i` of the
//!   `4n` relocation targets of the current tree.
//!
//! Half-step parameters are stored doubled ([`HalfStep`]), so `1.5` is `3`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Representation;
use crate::treegraph::{LayoutTree, NodeId, Side, TreeKind};

/// A value from `{0, 0.5, 1, ...}` stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfStep(pub u32);

impl HalfStep {
    pub fn whole(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn has_half(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

impl fmt::Display for HalfStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.has_half() {
            write!(f, "{}.5", self.whole())
        } else {
            write!(f, "{}", self.whole())
        }
    }
}

impl FromStr for HalfStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParams(format!("`{s}` is not a non-negative multiple of 0.5"));
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        let whole: u32 = if whole.is_empty() && !frac.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let half = match frac.trim_end_matches('0') {
            "" => 0,
            "5" => 1,
            _ => return Err(bad()),
        };
        whole
            .checked_mul(2)
            .and_then(|w| w.checked_add(half))
            .map(HalfStep)
            .ok_or_else(bad)
    }
}

/// Parameter vector `P` for one of the three methods.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "method", content = "values", rename_all = "snake_case")]
pub enum PermutationParams {
    /// `p_i` in `{0..n}`; `0` names the synthetic root.
    Proceeding(Vec<usize>),
    /// `(p_iU, p_iD)` pairs, each in `{0, 0.5, .., 2n}`.
    AscendDescend(Vec<(HalfStep, HalfStep)>),
    /// `p_i` in `{0, 0.5, .., 2n}`.
    AvailableNodes(Vec<HalfStep>),
}

impl PermutationParams {
    pub fn representation(&self) -> Representation {
        match self {
            PermutationParams::Proceeding(_) => Representation::OtreeProceeding,
            PermutationParams::AscendDescend(_) => Representation::BstarAscendDescend,
            PermutationParams::AvailableNodes(_) => Representation::BstarAvailableNodes,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PermutationParams::Proceeding(v) => v.len(),
            PermutationParams::AscendDescend(v) => v.len(),
            PermutationParams::AvailableNodes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameters that leave the Standard Tree unchanged.
    pub fn identity(method: Representation, n: usize) -> Self {
        match method {
            Representation::OtreeProceeding => PermutationParams::Proceeding((1..=n).collect()),
            Representation::BstarAscendDescend => {
                PermutationParams::AscendDescend(vec![(HalfStep(1), HalfStep(1)); n])
            }
            // index 4(i-1) is the swap-with-self target of D_i in the Standard Tree
            Representation::BstarAvailableNodes => {
                PermutationParams::AvailableNodes((0..n).map(|k| HalfStep(4 * k as u32)).collect())
            }
        }
    }

    /// Checks length `n` and every value's domain.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::InvalidParams(format!("expected {n} values, got {}", self.len())));
        }
        let max_half = HalfStep(4 * n as u32);
        let check_half = |i: usize, v: HalfStep| {
            if v > max_half {
                Err(Error::InvalidParams(format!("value {v} at position {} exceeds {}", i + 1, 2 * n)))
            } else {
                Ok(())
            }
        };
        match self {
            PermutationParams::Proceeding(v) => {
                if let Some((i, p)) = v.iter().enumerate().find(|(_, &p)| p > n) {
                    return Err(Error::InvalidParams(format!("value {p} at position {} exceeds {n}", i + 1)));
                }
            }
            PermutationParams::AscendDescend(v) => {
                for (i, &(u, d)) in v.iter().enumerate() {
                    check_half(i, u)?;
                    check_half(i, d)?;
                }
            }
            PermutationParams::AvailableNodes(v) => {
                for (i, &p) in v.iter().enumerate() {
                    check_half(i, p)?;
                }
            }
        }
        Ok(())
    }

    /// Parses the CLI form: comma-separated decimals, with Ascend/Descend
    /// pairs joined by `:` (`0.5:0.5,1:0`).
    pub fn parse(method: Representation, text: &str) -> Result<Self> {
        let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        Ok(match method {
            Representation::OtreeProceeding => PermutationParams::Proceeding(
                items
                    .iter()
                    .map(|s| s.parse().map_err(|_| Error::InvalidParams(format!("`{s}` is not an integer"))))
                    .collect::<Result<_>>()?,
            ),
            Representation::BstarAscendDescend => PermutationParams::AscendDescend(
                items
                    .iter()
                    .map(|s| {
                        let (u, d) = s
                            .split_once(':')
                            .ok_or_else(|| Error::InvalidParams(format!("`{s}` is not an up:down pair")))?;
                        Ok((u.parse()?, d.parse()?))
                    })
                    .collect::<Result<_>>()?,
            ),
            Representation::BstarAvailableNodes => {
                PermutationParams::AvailableNodes(items.iter().map(|s| s.parse()).collect::<Result<_>>()?)
            }
        })
    }
}

impl fmt::Display for PermutationParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match self {
            PermutationParams::Proceeding(v) => v.iter().map(usize::to_string).collect(),
            PermutationParams::AscendDescend(v) => v.iter().map(|(u, d)| format!("{u}:{d}")).collect(),
            PermutationParams::AvailableNodes(v) => v.iter().map(HalfStep::to_string).collect(),
        };
        f.write_str(&parts.join(","))
    }
}

/// Where a relocated node goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "node", rename_all = "snake_case")]
pub enum TargetDescriptor {
    /// Exchange positions with the node.
    Swap(NodeId),
    /// Take the node's slot; the node becomes the inserted node's left child.
    InsertAbove(NodeId),
    /// Attach in the empty left slot, or insert between the node and its left child.
    AttachOrInsertLeft(NodeId),
    /// Attach in the empty right slot, or insert between the node and its right child.
    AttachOrInsertRight(NodeId),
}

impl TargetDescriptor {
    pub fn anchor(self) -> NodeId {
        match self {
            TargetDescriptor::Swap(v)
            | TargetDescriptor::InsertAbove(v)
            | TargetDescriptor::AttachOrInsertLeft(v)
            | TargetDescriptor::AttachOrInsertRight(v) => v,
        }
    }
}

/// Result of the ascend half of an Ascend/Descend step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AscendPosition {
    /// `p_U = 0.5`: the step leaves the tree unchanged.
    Unchanged,
    /// Landed on a member.
    At(NodeId),
    /// Between the member and its parent.
    Above(NodeId),
}

impl AscendPosition {
    fn node(self) -> Option<NodeId> {
        match self {
            AscendPosition::Unchanged => None,
            AscendPosition::At(v) | AscendPosition::Above(v) => Some(v),
        }
    }
}

/// Climbs `up` parent links from `node`. `0.5` is the no-op sentinel; a climb
/// past the node's depth lands on the root (the half is dropped there), and a
/// trailing half otherwise marks the edge above the reached node.
pub fn ascend_target(tree: &LayoutTree, node: NodeId, up: HalfStep) -> AscendPosition {
    if up == HalfStep(1) {
        return AscendPosition::Unchanged;
    }
    let depth = tree.depth(node);
    if up.0 as usize > 2 * depth {
        return AscendPosition::At(tree.root());
    }
    let mut cur = node;
    for _ in 0..up.whole() {
        cur = tree.parent(cur).expect("climb bounded by depth");
    }
    if up.has_half() {
        AscendPosition::Above(cur)
    } else {
        AscendPosition::At(cur)
    }
}

/// Walks `down` members forward in BFS order from the ascend position
/// (clamped at the last member).
///
/// * integer walk from a node: swap with the member reached;
/// * integer walk from an edge: insert above the member reached;
/// * trailing half: insert between the next member (the ceiling) and its
///   parent, or attach below the last member when no ceiling exists.
///
/// Returns `None` for [`AscendPosition::Unchanged`].
pub fn descend_target(tree: &LayoutTree, position: AscendPosition, down: HalfStep) -> Option<TargetDescriptor> {
    let start = position.node()?;
    let order = tree.bfs_order();
    let from = order.iter().position(|&v| v == start).expect("position is a member");
    let at = (from + down.whole()).min(order.len() - 1);
    let landed = order[at];
    Some(if down.has_half() {
        match order.get(at + 1) {
            Some(&ceiling) => TargetDescriptor::InsertAbove(ceiling),
            None => TargetDescriptor::AttachOrInsertLeft(landed),
        }
    } else if matches!(position, AscendPosition::Above(_)) {
        TargetDescriptor::InsertAbove(landed)
    } else {
        TargetDescriptor::Swap(landed)
    })
}

/// The `4n` relocation targets of a binary tree: for every member in BFS
/// order, `[swap, insert above, left, right]`.
pub fn available_targets(tree: &LayoutTree) -> Vec<TargetDescriptor> {
    tree.bfs_order()
        .into_iter()
        .flat_map(|v| {
            [
                TargetDescriptor::Swap(v),
                TargetDescriptor::InsertAbove(v),
                TargetDescriptor::AttachOrInsertLeft(v),
                TargetDescriptor::AttachOrInsertRight(v),
            ]
        })
        .collect()
}

/// Deletes `node` from a binary tree: it sinks by switching with its left
/// child while it has one (else its right child) until it is a leaf, which is
/// then unlinked.
fn delete_node(tree: &mut LayoutTree, node: NodeId) {
    loop {
        let next = tree.left(node).or_else(|| tree.right(node));
        match next {
            Some(child) => tree.swap_labels(node, child),
            None => break,
        }
    }
    tree.unlink_leaf(node);
}

/// Moves `active` to `target`. Swaps exchange positions; every other target
/// deletes `active` first and re-links it at the target. Targets anchored at
/// `active`, or naming the slot `active` already holds, leave the tree as is.
///
/// For an insertion above a node whose parent was `active`, that parent is
/// gone once `active` is deleted; the anchor then steps back one BFS member at
/// a time (in the pre-deletion order) until it reaches a member whose parent
/// survives, falling back to the root.
pub fn apply_relocation(tree: &mut LayoutTree, active: NodeId, target: TargetDescriptor) -> Result<()> {
    if tree.kind() != TreeKind::Binary {
        return Err(Error::MalformedTarget("relocation needs a binary tree".into()));
    }
    let anchor = target.anchor();
    for v in [active, anchor] {
        if !tree.contains(v) {
            return Err(Error::MalformedTarget(format!("{v} is not a member")));
        }
    }
    if anchor == active {
        return Ok(());
    }
    match target {
        TargetDescriptor::Swap(other) => {
            tree.swap_labels(active, other);
            return Ok(());
        }
        TargetDescriptor::AttachOrInsertLeft(x) if tree.left(x) == Some(active) => return Ok(()),
        TargetDescriptor::AttachOrInsertRight(x) if tree.right(x) == Some(active) => return Ok(()),
        _ => {}
    }

    let pre_order = tree.bfs_order();
    let pre_parent: Vec<Option<NodeId>> = (0..=tree.n()).map(|v| tree.parent(NodeId(v))).collect();
    delete_node(tree, active);

    match target {
        TargetDescriptor::InsertAbove(x) => {
            let orphaned = |v: NodeId| pre_parent[v.0] == Some(active);
            let anchor = if orphaned(x) {
                let at = pre_order.iter().position(|&v| v == x).expect("anchor is a member");
                pre_order[..at]
                    .iter()
                    .rev()
                    .copied()
                    .find(|&v| v != active && !orphaned(v))
                    .unwrap_or_else(|| tree.root())
            } else {
                x
            };
            tree.link_above(anchor, active);
        }
        TargetDescriptor::AttachOrInsertLeft(x) => tree.link_into(x, Side::Left, active),
        TargetDescriptor::AttachOrInsertRight(x) => tree.link_into(x, Side::Right, active),
        TargetDescriptor::Swap(_) => unreachable!("handled above"),
    }
    debug_assert!(tree.validate().is_ok());
    Ok(())
}

fn require_kind(tree: &LayoutTree, kind: TreeKind) -> Result<()> {
    if tree.kind() == kind {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("method needs a {kind:?} standard tree")))
    }
}

/// Proceeding perturbation of an n-ary Standard Tree. Step `i` is discarded
/// when `p_i = i` or when `D_{p_i}` is currently a descendant of `D_i`;
/// otherwise `D_i` and its subtree become the rightmost child of `D_{p_i}`.
pub fn perturb_proceeding(standard: &LayoutTree, params: &[usize]) -> Result<LayoutTree> {
    require_kind(standard, TreeKind::Nary)?;
    let n = standard.n();
    PermutationParams::Proceeding(params.to_vec()).validate(n)?;
    let mut tree = standard.clone();
    for (k, &p) in params.iter().enumerate() {
        let active = NodeId(k + 1);
        let target = NodeId(p);
        if target == active || tree.is_descendant(active, target)? {
            continue;
        }
        tree.reparent_rightmost(active, target);
    }
    Ok(tree)
}

/// Ascend/Descend perturbation of a binary Standard Tree; step `i` relocates
/// `D_i` from wherever it currently sits.
pub fn perturb_ascend_descend(standard: &LayoutTree, params: &[(HalfStep, HalfStep)]) -> Result<LayoutTree> {
    require_kind(standard, TreeKind::Binary)?;
    PermutationParams::AscendDescend(params.to_vec()).validate(standard.n())?;
    let mut tree = standard.clone();
    for (k, &(up, down)) in params.iter().enumerate() {
        let active = NodeId(k + 1);
        let position = ascend_target(&tree, active, up);
        if let Some(target) = descend_target(&tree, position, down) {
            apply_relocation(&mut tree, active, target)?;
        }
    }
    Ok(tree)
}

/// Available Nodes perturbation: step `i` recomputes the `4n` targets and
/// relocates `D_i` to index `2 p_i`, clamped to the last target.
pub fn perturb_available_nodes(standard: &LayoutTree, params: &[HalfStep]) -> Result<LayoutTree> {
    require_kind(standard, TreeKind::Binary)?;
    let n = standard.n();
    PermutationParams::AvailableNodes(params.to_vec()).validate(n)?;
    let mut tree = standard.clone();
    for (k, &p) in params.iter().enumerate() {
        let targets = available_targets(&tree);
        debug_assert_eq!(targets.len(), 4 * n);
        let index = (p.0 as usize).min(targets.len() - 1);
        apply_relocation(&mut tree, NodeId(k + 1), targets[index])?;
    }
    Ok(tree)
}

/// Runs whichever method `params` belongs to.
pub fn perturb(standard: &LayoutTree, params: &PermutationParams) -> Result<LayoutTree> {
    match params {
        PermutationParams::Proceeding(p) => perturb_proceeding(standard, p),
        PermutationParams::AscendDescend(p) => perturb_ascend_descend(standard, p),
        PermutationParams::AvailableNodes(p) => perturb_available_nodes(standard, p),
    }
}
