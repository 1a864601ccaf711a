//! Exact shape laws at small sizes, for checking samplers.

use std::collections::{BTreeMap, BTreeSet};

use crate::tree::{enumerate_ternary, validate, NodeWord, ShapeKey, TernaryTree, TreeError};

/// Largest size accepted by [`increasing_shape_law`].
pub const HISTORY_LIMIT: usize = 6;

/// Uniform law over the shapes with `n` internal nodes.
pub fn uniform_shape_law(n: usize) -> Result<BTreeMap<ShapeKey, f64>, TreeError> {
    let trees = enumerate_ternary(n)?;
    let p = 1.0 / trees.len() as f64;
    Ok(trees.iter().map(|t| (t.shape_key(), p)).collect())
}

/// Law of the increasing tree with `n` internal nodes, by listing every
/// sequence of leaf choices and counting the shapes they produce.
pub fn increasing_shape_law(n: usize) -> Result<BTreeMap<ShapeKey, f64>, TreeError> {
    if n > HISTORY_LIMIT {
        return Err(TreeError::ScaleExceeded(n));
    }
    let mut counts: BTreeMap<ShapeKey, u64> = BTreeMap::new();
    let mut nodes: BTreeSet<NodeWord> = BTreeSet::from([NodeWord::root()]);
    let mut leaves: Vec<NodeWord> = vec![NodeWord::root()];
    histories(n, &mut nodes, &mut leaves, &mut counts)?;
    let total: u64 = counts.values().sum();
    Ok(counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total as f64))
        .collect())
}

fn histories(
    left: usize,
    nodes: &mut BTreeSet<NodeWord>,
    leaves: &mut Vec<NodeWord>,
    counts: &mut BTreeMap<ShapeKey, u64>,
) -> Result<(), TreeError> {
    if left == 0 {
        let words: Vec<NodeWord> = nodes.iter().cloned().collect();
        *counts.entry(validate(&words)?.shape_key()).or_default() += 1;
        return Ok(());
    }
    for i in 0..leaves.len() {
        let leaf = leaves.swap_remove(i);
        let kids = [leaf.child(1), leaf.child(2), leaf.child(3)];
        for k in &kids {
            nodes.insert(k.clone());
            leaves.push(k.clone());
        }
        histories(left - 1, nodes, leaves, counts)?;
        for k in &kids {
            nodes.remove(k);
            leaves.pop();
        }
        leaves.push(leaf);
        let last = leaves.len() - 1;
        leaves.swap(i, last);
    }
    Ok(())
}

/// Probability of `t` under GW(ξ): `(1/3)^n (2/3)^(2n+1)`.
pub fn gw_weight(t: &TernaryTree) -> f64 {
    let n = t.n_internal() as i32;
    (1.0f64 / 3.0).powi(n) * (2.0f64 / 3.0).powi(2 * n + 1)
}
