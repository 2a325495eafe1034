#![allow(dead_code)]

pub mod oracle;

use genfloor_core::perturb::{perturb_ascend_descend, perturb_available_nodes, perturb_proceeding, HalfStep};
use genfloor_core::treegraph::{LayoutTree, TreeKind};

pub fn engine_ad(n: usize, pairs: &[(u32, u32)]) -> serde_json::Value {
    let p: Vec<(HalfStep, HalfStep)> = pairs.iter().map(|&(u, d)| (HalfStep(u), HalfStep(d))).collect();
    perturb_ascend_descend(&LayoutTree::standard(TreeKind::Binary, n), &p)
        .unwrap()
        .to_json()
}

pub fn engine_av(n: usize, params: &[u32]) -> serde_json::Value {
    let p: Vec<HalfStep> = params.iter().map(|&v| HalfStep(v)).collect();
    perturb_available_nodes(&LayoutTree::standard(TreeKind::Binary, n), &p)
        .unwrap()
        .to_json()
}

pub fn engine_pr(n: usize, params: &[usize]) -> serde_json::Value {
    perturb_proceeding(&LayoutTree::standard(TreeKind::Nary, n), params)
        .unwrap()
        .to_json()
}

/// Every vector of `len` digits in `0..base`, indexed by `code`.
pub fn digits(mut code: u64, base: u64, len: usize) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let d = (code % base) as u32;
            code /= base;
            d
        })
        .collect()
}


/// Engine binary tree in the oracle's path form.
pub fn engine_paths(tree: &LayoutTree) -> std::collections::BTreeMap<String, usize> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![(tree.root(), String::new())];
    while let Some((v, path)) = stack.pop() {
        if let Some(l) = tree.left(v) {
            stack.push((l, format!("{path}L")));
        }
        if let Some(r) = tree.right(v) {
            stack.push((r, format!("{path}R")));
        }
        out.insert(path, v.0);
    }
    out
}
