//! Rooted labeled trees shared by the O-Tree and B*-Tree encodings.
//!
//! Node `D_i` (`NodeId(i)`, `1 <= i <= n`) carries requirement `i - 1`. In the
//! n-ary kind `NodeId(0)` is the synthetic root `D_0`, which stands for the left
//! boundary and has no block.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    /// Synthetic n-ary root.
    pub const ROOT: NodeId = NodeId(0);

    /// Node carrying requirement `index`.
    pub fn of_label(index: usize) -> NodeId {
        NodeId(index + 1)
    }

    /// Requirement index, `None` for the synthetic root.
    pub fn label(self) -> Option<usize> {
        self.0.checked_sub(1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeKind {
    Binary,
    Nary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A binary (B*-Tree) or ordered n-ary (O-Tree) tree over `D_1..D_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutTree {
    kind: TreeKind,
    n: usize,
    root: Option<NodeId>,
    parent: Vec<Option<NodeId>>,
    left: Vec<Option<NodeId>>,
    right: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
}

impl LayoutTree {
    fn empty(kind: TreeKind, n: usize) -> Self {
        Self {
            kind,
            n,
            root: None,
            parent: vec![None; n + 1],
            left: vec![None; n + 1],
            right: vec![None; n + 1],
            children: vec![Vec::new(); n + 1],
        }
    }

    /// Standard Tree: complete binary tree in input order (`D_k` has children
    /// `D_2k`, `D_2k+1`), or all nodes on one level under `D_0`.
    pub fn standard(kind: TreeKind, n: usize) -> Self {
        assert!(n >= 1, "a standard tree needs at least one node");
        let mut t = Self::empty(kind, n);
        match kind {
            TreeKind::Binary => {
                t.root = Some(NodeId(1));
                for k in 1..=n {
                    if 2 * k <= n {
                        t.left[k] = Some(NodeId(2 * k));
                        t.parent[2 * k] = Some(NodeId(k));
                    }
                    if 2 * k < n {
                        t.right[k] = Some(NodeId(2 * k + 1));
                        t.parent[2 * k + 1] = Some(NodeId(k));
                    }
                }
            }
            TreeKind::Nary => {
                t.root = Some(NodeId::ROOT);
                t.children[0] = (1..=n).map(NodeId).collect();
                for k in 1..=n {
                    t.parent[k] = Some(NodeId::ROOT);
                }
            }
        }
        t
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    /// Number of labeled nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> NodeId {
        self.root.expect("tree has a root")
    }

    /// Labeled members, `D_1..D_n`.
    pub fn labeled(&self) -> impl Iterator<Item = NodeId> {
        (1..=self.n).map(NodeId)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        match self.kind {
            TreeKind::Binary => (1..=self.n).contains(&node.0),
            TreeKind::Nary => node.0 <= self.n,
        }
    }

    fn check(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node.0))
        }
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent.get(node.0).copied().flatten()
    }

    pub fn left(&self, node: NodeId) -> Option<NodeId> {
        self.left.get(node.0).copied().flatten()
    }

    pub fn right(&self, node: NodeId) -> Option<NodeId> {
        self.right.get(node.0).copied().flatten()
    }

    pub fn slot(&self, node: NodeId, side: Side) -> Option<NodeId> {
        match side {
            Side::Left => self.left(node),
            Side::Right => self.right(node),
        }
    }

    /// Children in visiting order: left then right for binary trees.
    pub fn children(&self, node: NodeId) -> Vec<NodeId> {
        match self.kind {
            TreeKind::Binary => [self.left(node), self.right(node)].into_iter().flatten().collect(),
            TreeKind::Nary => self.children[node.0].clone(),
        }
    }

    /// Which slot of its parent a binary node occupies.
    pub fn side_of(&self, node: NodeId) -> Option<Side> {
        let p = self.parent(node)?;
        if self.left(p) == Some(node) {
            Some(Side::Left)
        } else {
            Some(Side::Right)
        }
    }

    pub fn depth(&self, node: NodeId) -> usize {
        let mut d = 0;
        let mut cur = node;
        while let Some(p) = self.parent(cur) {
            d += 1;
            cur = p;
        }
        d
    }

    /// Preorder; left subtree fully before right, n-ary children left to right.
    pub fn dfs_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.n + 1);
        let mut stack = vec![self.root()];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(self.children(node).into_iter().rev());
        }
        out
    }

    /// Level order, left to right within a level.
    pub fn bfs_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.n + 1);
        let mut queue = VecDeque::from([self.root()]);
        while let Some(node) = queue.pop_front() {
            out.push(node);
            queue.extend(self.children(node));
        }
        out
    }

    /// True iff `node` is in the subtree under `anc`, excluding `anc` itself.
    pub fn is_descendant(&self, anc: NodeId, node: NodeId) -> Result<bool> {
        self.check(anc)?;
        self.check(node)?;
        let mut cur = self.parent(node);
        while let Some(p) = cur {
            if p == anc {
                return Ok(true);
            }
            cur = self.parent(p);
        }
        Ok(false)
    }

    /// Number of tree levels.
    pub fn height(&self) -> usize {
        self.dfs_order().iter().map(|&v| self.depth(v)).max().unwrap_or(0) + 1
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidLayout(m));
        let root = match self.root {
            Some(r) => r,
            None => return bad("tree has no root".into()),
        };
        if self.parent(root).is_some() {
            return bad(format!("root {root} has a parent"));
        }
        let expected = match self.kind {
            TreeKind::Binary => self.n,
            TreeKind::Nary => self.n + 1,
        };
        let mut seen = vec![false; self.n + 1];
        let mut reached = 0;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if v.0 > self.n || std::mem::replace(&mut seen[v.0], true) {
                return bad(format!("{v} reached twice or out of range"));
            }
            reached += 1;
            for c in self.children(v) {
                if self.parent(c) != Some(v) {
                    return bad(format!("{c} does not point back to parent {v}"));
                }
                stack.push(c);
            }
        }
        if reached != expected {
            return bad(format!("{reached} nodes reachable, expected {expected}"));
        }
        if self.kind == TreeKind::Nary && root != NodeId::ROOT {
            return bad("n-ary root must be D0".into());
        }
        Ok(())
    }

    // ---- n-ary edits ----

    /// Detaches `node` (with its subtree) and appends it as the rightmost
    /// child of `parent`.
    pub fn reparent_rightmost(&mut self, node: NodeId, parent: NodeId) {
        debug_assert_eq!(self.kind, TreeKind::Nary);
        if let Some(old) = self.parent[node.0] {
            self.children[old.0].retain(|&c| c != node);
        }
        self.children[parent.0].push(node);
        self.parent[node.0] = Some(parent);
    }

    // ---- binary edits ----

    fn set_slot(&mut self, parent: Option<NodeId>, side: Side, child: Option<NodeId>) {
        match parent {
            None => self.root = child,
            Some(p) => match side {
                Side::Left => self.left[p.0] = child,
                Side::Right => self.right[p.0] = child,
            },
        }
        if let Some(c) = child {
            self.parent[c.0] = parent;
        }
    }

    /// Exchanges the positions of two labels.
    pub fn swap_labels(&mut self, a: NodeId, b: NodeId) {
        if a == b {
            return;
        }
        let map = |v: NodeId| {
            if v == a {
                b
            } else if v == b {
                a
            } else {
                v
            }
        };
        let remap = |o: Option<NodeId>| o.map(map);
        let old = self.clone();
        for v in 0..=self.n {
            let mv = map(NodeId(v)).0;
            self.parent[mv] = remap(old.parent[v]);
            self.left[mv] = remap(old.left[v]);
            self.right[mv] = remap(old.right[v]);
            self.children[mv] = old.children[v].iter().map(|&c| map(c)).collect();
        }
        self.root = remap(old.root);
    }

    /// Unlinks a binary leaf from its parent; the node stays detached until
    /// re-inserted.
    pub fn unlink_leaf(&mut self, node: NodeId) {
        debug_assert!(self.left(node).is_none() && self.right(node).is_none());
        match self.parent(node) {
            Some(p) => {
                if self.left[p.0] == Some(node) {
                    self.left[p.0] = None;
                } else {
                    self.right[p.0] = None;
                }
            }
            None => self.root = None,
        }
        self.parent[node.0] = None;
    }

    /// Links detached `node` between `anchor` and its parent, taking the
    /// anchor's slot; the anchor becomes `node`'s left child.
    pub fn link_above(&mut self, anchor: NodeId, node: NodeId) {
        let parent = self.parent(anchor);
        let side = self.side_of(anchor).unwrap_or(Side::Left);
        self.set_slot(parent, side, Some(node));
        self.set_slot(Some(node), Side::Left, Some(anchor));
    }

    /// Links detached `node` into `anchor`'s `side` slot. An occupant moves
    /// down into the same-side slot of `node`.
    pub fn link_into(&mut self, anchor: NodeId, side: Side, node: NodeId) {
        let occupant = self.slot(anchor, side);
        self.set_slot(Some(anchor), side, Some(node));
        if occupant.is_some() {
            self.set_slot(Some(node), side, occupant);
        }
    }

    // ---- serialization ----

    /// Nested JSON: `{label, children}` for n-ary trees, `{label, left, right}`
    /// for binary trees. Labels are node indices (`0` for `D_0`).
    pub fn to_json(&self) -> Value {
        self.node_json(self.root())
    }

    fn node_json(&self, v: NodeId) -> Value {
        match self.kind {
            TreeKind::Nary => json!({
                "label": v.0,
                "children": self.children[v.0].iter().map(|&c| self.node_json(c)).collect::<Vec<_>>(),
            }),
            TreeKind::Binary => json!({
                "label": v.0,
                "left": self.left(v).map(|c| self.node_json(c)),
                "right": self.right(v).map(|c| self.node_json(c)),
            }),
        }
    }

    /// Inverse of [`LayoutTree::to_json`]; the kind is taken from the keys.
    pub fn from_json(value: &Value) -> Result<Self> {
        let kind = if value.get("children").is_some() {
            TreeKind::Nary
        } else {
            TreeKind::Binary
        };
        let mut links = Vec::new();
        collect_links(value, None, None, &mut links)?;
        let n = match kind {
            TreeKind::Nary => links.len().saturating_sub(1),
            TreeKind::Binary => links.len(),
        };
        if n == 0 {
            return Err(Error::InvalidLayout("tree has no labeled nodes".into()));
        }
        let mut t = Self::empty(kind, n);
        for (node, parent, side) in links {
            if !t.contains(node) {
                return Err(Error::InvalidLayout(format!("label {} out of range", node.0)));
            }
            match (parent, side) {
                (None, _) => t.root = Some(node),
                (Some(p), Some(s)) => t.set_slot(Some(p), s, Some(node)),
                (Some(p), None) => {
                    t.children[p.0].push(node);
                    t.parent[node.0] = Some(p);
                }
            }
        }
        t.validate()
            .map_err(|e| Error::InvalidLayout(e.to_string()))?;
        Ok(t)
    }
}

type Link = (NodeId, Option<NodeId>, Option<Side>);

fn collect_links(v: &Value, parent: Option<NodeId>, side: Option<Side>, out: &mut Vec<Link>) -> Result<()> {
    let label = v
        .get("label")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::InvalidLayout("tree node without integer label".into()))?;
    let node = NodeId(label as usize);
    out.push((node, parent, side));
    if let Some(children) = v.get("children") {
        let children = children
            .as_array()
            .ok_or_else(|| Error::InvalidLayout("children must be an array".into()))?;
        for c in children {
            collect_links(c, Some(node), None, out)?;
        }
    } else {
        for (key, s) in [("left", Side::Left), ("right", Side::Right)] {
            match v.get(key) {
                None | Some(Value::Null) => {}
                Some(c) => collect_links(c, Some(node), Some(s), out)?,
            }
        }
    }
    Ok(())
}
