//! A second, deliberately naive interpreter of the perturbation rules.
//!
//! Binary trees are maps from root paths ("" root, "L"/"R" per step) to
//! labels; n-ary trees are parent arrays whose child order is the time each
//! link was made. Nothing here calls into the engine's tree code.

use std::collections::BTreeMap;

use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTree {
    pub at: BTreeMap<String, usize>,
}

fn bfs_key(p: &str) -> (usize, String) {
    (p.len(), p.to_string())
}

impl PathTree {
    /// Complete binary tree: `D_k` sits at the path spelled by the bits of
    /// `k` after the leading one (0 = left, 1 = right).
    pub fn standard(n: usize) -> Self {
        let mut at = BTreeMap::new();
        for k in 1..=n {
            let bits = format!("{k:b}");
            let path: String = bits[1..].chars().map(|c| if c == '0' { 'L' } else { 'R' }).collect();
            at.insert(path, k);
        }
        PathTree { at }
    }

    pub fn path_of(&self, label: usize) -> String {
        self.at
            .iter()
            .find(|(_, &l)| l == label)
            .map(|(p, _)| p.clone())
            .expect("label present")
    }

    pub fn bfs(&self) -> Vec<usize> {
        let mut paths: Vec<&String> = self.at.keys().collect();
        paths.sort_by_key(|p| bfs_key(p));
        paths.into_iter().map(|p| self.at[p]).collect()
    }

    pub fn parent_of(&self, label: usize) -> Option<usize> {
        let p = self.path_of(label);
        if p.is_empty() {
            None
        } else {
            Some(self.at[&p[..p.len() - 1]])
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        let (pa, pb) = (self.path_of(a), self.path_of(b));
        self.at.insert(pa, b);
        self.at.insert(pb, a);
    }

    /// Moves every entry under `from` to the same relative place under `to`.
    fn shift(&mut self, from: &str, to: &str) {
        let moved: Vec<(String, usize)> = self
            .at
            .iter()
            .filter(|(p, _)| p.starts_with(from))
            .map(|(p, &l)| (p.clone(), l))
            .collect();
        for (p, _) in &moved {
            self.at.remove(p);
        }
        for (p, l) in moved {
            self.at.insert(format!("{to}{}", &p[from.len()..]), l);
        }
    }

    fn delete(&mut self, label: usize) {
        let mut p = self.path_of(label);
        loop {
            let l = format!("{p}L");
            let r = format!("{p}R");
            let child = if self.at.contains_key(&l) {
                l
            } else if self.at.contains_key(&r) {
                r
            } else {
                break;
            };
            let c = self.at[&child];
            self.at.insert(p.clone(), c);
            self.at.insert(child.clone(), label);
            p = child;
        }
        self.at.remove(&p);
    }

    fn link_above(&mut self, anchor: usize, node: usize) {
        let q = self.path_of(anchor);
        self.shift(&q, &format!("{q}L"));
        self.at.insert(q, node);
    }

    fn link_into(&mut self, anchor: usize, side: char, node: usize) {
        let slot = format!("{}{side}", self.path_of(anchor));
        self.shift(&slot, &format!("{slot}{side}"));
        self.at.insert(slot, node);
    }

    pub fn to_json(&self) -> Value {
        fn node(t: &PathTree, p: &str) -> Value {
            let l = format!("{p}L");
            let r = format!("{p}R");
            json!({
                "label": t.at[p],
                "left": t.at.contains_key(&l).then(|| node(t, &l)),
                "right": t.at.contains_key(&r).then(|| node(t, &r)),
            })
        }
        node(self, "")
    }
}

/// Relocation target in oracle terms; `kind` is 0 swap, 1 above, 2 left, 3 right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub kind: u8,
    pub node: usize,
}

pub fn relocate(t: &mut PathTree, active: usize, target: Target) {
    let x = target.node;
    if x == active {
        return;
    }
    let slot_holds_active = |t: &PathTree, side: char| t.at.get(&format!("{}{side}", t.path_of(x))) == Some(&active);
    match target.kind {
        0 => return t.swap(active, x),
        2 if slot_holds_active(t, 'L') => return,
        3 if slot_holds_active(t, 'R') => return,
        _ => {}
    }
    let order = t.bfs();
    let parents: BTreeMap<usize, Option<usize>> = order.iter().map(|&v| (v, t.parent_of(v))).collect();
    t.delete(active);
    match target.kind {
        1 => {
            let orphan = |v: usize| parents[&v] == Some(active);
            let mut anchor = x;
            if orphan(x) {
                let i = order.iter().position(|&v| v == x).unwrap();
                anchor = t.at[""];
                for &v in order[..i].iter().rev() {
                    if v != active && !orphan(v) {
                        anchor = v;
                        break;
                    }
                }
            }
            t.link_above(anchor, active);
        }
        2 => t.link_into(x, 'L', active),
        3 => t.link_into(x, 'R', active),
        _ => unreachable!(),
    }
}

/// Ascend/Descend with doubled half-step values.
pub fn ascend_descend(n: usize, pairs: &[(u32, u32)]) -> PathTree {
    let mut t = PathTree::standard(n);
    for (k, &(up, down)) in pairs.iter().enumerate() {
        let active = k + 1;
        if up == 1 {
            continue;
        }
        let path = t.path_of(active);
        let (start, above) = if up as usize > 2 * path.len() {
            (String::new(), false)
        } else {
            let climb = (up / 2) as usize;
            (path[..path.len() - climb].to_string(), up % 2 == 1)
        };
        let order = t.bfs();
        let from = order.iter().position(|&v| v == t.at[&start]).unwrap();
        let i = (from + (down / 2) as usize).min(order.len() - 1);
        let target = if down % 2 == 1 {
            match order.get(i + 1) {
                Some(&c) => Target { kind: 1, node: c },
                None => Target { kind: 2, node: order[i] },
            }
        } else if above {
            Target { kind: 1, node: order[i] }
        } else {
            Target { kind: 0, node: order[i] }
        };
        relocate(&mut t, active, target);
    }
    t
}

/// Available Nodes with doubled half-step values.
pub fn available_nodes(n: usize, params: &[u32]) -> PathTree {
    let mut t = PathTree::standard(n);
    for (k, &p) in params.iter().enumerate() {
        let order = t.bfs();
        assert_eq!(order.len() * 4, 4 * n);
        let idx = (p as usize).min(4 * n - 1);
        let target = Target {
            kind: (idx % 4) as u8,
            node: order[idx / 4],
        };
        relocate(&mut t, k + 1, target);
    }
    t
}

/// N-ary tree as parent links plus link timestamps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StampTree {
    pub parent: Vec<usize>,
    pub stamp: Vec<usize>,
}

impl StampTree {
    pub fn standard(n: usize) -> Self {
        StampTree {
            parent: vec![0; n + 1],
            stamp: (0..=n).collect(),
        }
    }

    fn under(&self, anc: usize, mut v: usize) -> bool {
        while v != 0 {
            v = self.parent[v];
            if v == anc {
                return true;
            }
        }
        false
    }

    pub fn to_json(&self) -> Value {
        fn node(t: &StampTree, v: usize) -> Value {
            let mut kids: Vec<usize> = (1..t.parent.len()).filter(|&c| t.parent[c] == v).collect();
            kids.sort_by_key(|&c| t.stamp[c]);
            json!({"label": v, "children": kids.into_iter().map(|c| node(t, c)).collect::<Vec<_>>()})
        }
        node(self, 0)
    }
}

pub fn proceeding(n: usize, params: &[usize]) -> StampTree {
    let mut t = StampTree::standard(n);
    let mut clock = n + 1;
    for (k, &p) in params.iter().enumerate() {
        let i = k + 1;
        if p == i || t.under(i, p) {
            continue;
        }
        t.parent[i] = p;
        t.stamp[i] = clock;
        clock += 1;
    }
    t
}
