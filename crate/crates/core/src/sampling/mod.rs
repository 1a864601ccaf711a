//! Random ternary trees and splitting variables.

mod fragmentation;

pub use fragmentation::{
    build_fragmentation, fragmentation_ratios, sample_fragmentation, split_interval, to_fixed,
    FragError, FragmentationTree, Interval, FIXED_ONE,
};

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::rng::{Purpose, Seed};
use crate::tree::TernaryTree;

/// Default node budget for critical Galton–Watson trees.
pub const DEFAULT_NODE_CAP: usize = 10_000_000;

/// Finite-size tree models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeModel {
    Uniform,
    Increasing,
}

impl TreeModel {
    pub fn sample(self, n: usize, seed: Seed) -> TernaryTree {
        match self {
            TreeModel::Uniform => sample_uniform_ternary(n, seed),
            TreeModel::Increasing => sample_increasing(n, seed),
        }
    }
}

impl fmt::Display for TreeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeModel::Uniform => "uniform",
            TreeModel::Increasing => "increasing",
        })
    }
}

impl FromStr for TreeModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(TreeModel::Uniform),
            "increasing" => Ok(TreeModel::Increasing),
            _ => Err(format!("unknown tree model {s:?}")),
        }
    }
}

/// Uniform ternary tree with `n` internal nodes.
///
/// A uniformly shuffled sequence of `n` steps of +2 and `2n+1` steps of −1
/// is rotated to start just after its first minimum; the rotation is the
/// preorder arity sequence of a tree and every tree arises from exactly
/// `3n+1` sequences.
pub fn sample_uniform_ternary(n: usize, seed: Seed) -> TernaryTree {
    let mut rng = seed.rng(Purpose::Shape);
    let len = 3 * n + 1;
    let mut steps = vec![false; len];
    steps[..n].fill(true);
    steps.shuffle(&mut rng);

    let (mut sum, mut min, mut argmin) = (0i64, 0i64, len - 1);
    for (i, &up) in steps.iter().enumerate() {
        sum += if up { 2 } else { -1 };
        if sum < min {
            min = sum;
            argmin = i;
        }
    }
    steps.rotate_left((argmin + 1) % len);
    TernaryTree::from_preorder(&steps).expect("cycle-lemma rotation is a preorder sequence")
}

/// Increasing ternary tree: `n` successive expansions of a uniform leaf.
pub fn sample_increasing(n: usize, seed: Seed) -> TernaryTree {
    let mut rng = seed.rng(Purpose::Shape);
    let mut children: Vec<Option<[u32; 3]>> = Vec::with_capacity(3 * n + 1);
    children.push(None);
    let mut leaves: Vec<u32> = vec![0];
    for _ in 0..n {
        let leaf = leaves.swap_remove(rng.random_range(0..leaves.len()));
        let c = children.len() as u32;
        children.extend([None, None, None]);
        children[leaf as usize] = Some([c, c + 1, c + 2]);
        leaves.extend([c, c + 1, c + 2]);
    }
    TernaryTree::from_arena(&children, 0).0
}

/// Result of growing a Galton–Watson tree under a node budget.
#[derive(Clone, Debug, PartialEq)]
pub enum GwOutcome {
    Complete(TernaryTree),
    Overflow { nodes_generated: usize },
}

impl GwOutcome {
    pub fn tree(&self) -> Option<&TernaryTree> {
        match self {
            GwOutcome::Complete(t) => Some(t),
            GwOutcome::Overflow { .. } => None,
        }
    }

    pub fn is_overflow(&self) -> bool {
        matches!(self, GwOutcome::Overflow { .. })
    }
}

/// Galton–Watson tree with offspring law `(2/3)δ₀ + (1/3)δ₃`.
pub fn sample_gw_xi(seed: Seed, node_cap: usize) -> GwOutcome {
    gw_xi(&mut seed.rng(Purpose::Shape), node_cap)
}

/// Grow a GW(ξ) tree breadth-first from `rng`.
pub fn gw_xi<R: Rng + ?Sized>(rng: &mut R, node_cap: usize) -> GwOutcome {
    let cap = node_cap.max(1);
    let mut flags = Vec::new();
    let mut total = 1usize;
    while flags.len() < total {
        let internal = rng.random_range(0..3u8) == 0;
        flags.push(internal);
        if internal {
            total += 3;
            if total > cap {
                return GwOutcome::Overflow {
                    nodes_generated: total,
                };
            }
        }
    }
    GwOutcome::Complete(TernaryTree::from_bfs_flags(&flags).expect("breadth-first growth"))
}

/// Depth-`R` truncation of the local limit of uniform ternary trees: an
/// infinite spine of uniform letters with independent GW(ξ) trees hanging
/// off each spine node.
#[derive(Clone, Debug)]
pub struct LimitTreeSample {
    pub depth: usize,
    pub spine: Vec<u8>,
    /// For spine step `k`, the trees rooted at the two non-spine children
    /// in letter order.
    pub off_spine: Vec<[GwOutcome; 2]>,
}

/// A [`LimitTreeSample`] flattened into one finite tree.
#[derive(Clone, Debug)]
pub struct AssembledLimitTree {
    pub tree: TernaryTree,
    /// Node ids of the spine, from the root to height `R`.
    pub spine_nodes: Vec<crate::tree::NodeId>,
    /// Number of off-spine subtrees that overflowed and appear as leaves.
    pub overflowed: usize,
}

/// Sample the local limit truncated at depth `R`. Step `k` draws from a
/// stream keyed by `k`, so a deeper sample extends a shallower one with the
/// same seed.
pub fn sample_limit_tree(depth: usize, node_cap: usize, seed: Seed) -> LimitTreeSample {
    let mut spine = Vec::with_capacity(depth);
    let mut off_spine = Vec::with_capacity(depth);
    for k in 0..depth {
        let mut rng = seed.keyed_rng(Purpose::Spine, k as u64);
        spine.push(rng.random_range(1..=3u8));
        let a = gw_xi(&mut rng, node_cap);
        let b = gw_xi(&mut rng, node_cap);
        off_spine.push([a, b]);
    }
    LimitTreeSample {
        depth,
        spine,
        off_spine,
    }
}

impl LimitTreeSample {
    /// Letters other than the spine letter at step `k`, in order.
    pub fn off_letters(&self, k: usize) -> [u8; 2] {
        match self.spine[k] {
            1 => [2, 3],
            2 => [1, 3],
            _ => [1, 2],
        }
    }

    pub fn overflow_count(&self) -> usize {
        self.off_spine
            .iter()
            .flatten()
            .filter(|g| g.is_overflow())
            .count()
    }

    /// One finite tree: spine nodes are internal down to height `R`, where
    /// the spine ends in a leaf. Overflowed subtrees are cut to a leaf.
    pub fn assemble(&self) -> AssembledLimitTree {
        let mut children: Vec<Option<[u32; 3]>> = vec![None];
        let mut spine_arena = vec![0u32];
        let mut cur = 0u32;
        for k in 0..self.depth {
            let c = children.len() as u32;
            children.extend([None, None, None]);
            children[cur as usize] = Some([c, c + 1, c + 2]);
            for (slot, letter) in self.off_letters(k).into_iter().enumerate() {
                if let GwOutcome::Complete(t) = &self.off_spine[k][slot] {
                    graft(&mut children, c + u32::from(letter) - 1, t);
                }
            }
            cur = c + u32::from(self.spine[k]) - 1;
            spine_arena.push(cur);
        }
        let (tree, order) = TernaryTree::from_arena(&children, 0);
        let mut position = vec![0u32; children.len()];
        for (bfs, &arena) in order.iter().enumerate() {
            position[arena as usize] = bfs as u32;
        }
        AssembledLimitTree {
            tree,
            spine_nodes: spine_arena
                .iter()
                .map(|&a| crate::tree::NodeId(position[a as usize]))
                .collect(),
            overflowed: self.overflow_count(),
        }
    }
}

fn graft(children: &mut Vec<Option<[u32; 3]>>, at: u32, t: &TernaryTree) {
    // Breadth-first ids of `t` map to arena slots as they are allocated.
    let mut slot = vec![0u32; t.len()];
    slot[0] = at;
    for u in t.nodes() {
        if let Some(ch) = t.children(u) {
            let c = children.len() as u32;
            children.extend([None, None, None]);
            children[slot[u.index()] as usize] = Some([c, c + 1, c + 2]);
            for (j, v) in ch.into_iter().enumerate() {
                slot[v.index()] = c + j as u32;
            }
        }
    }
}

/// Symmetric Dirichlet triplet with parameter `alpha`, strictly positive
/// and renormalised to sum 1.
pub fn dirichlet_sym<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> [f64; 3] {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha > 0");
    loop {
        let g = [gamma.sample(rng), gamma.sample(rng), gamma.sample(rng)];
        if g.iter().any(|&x| !(x > 0.0)) {
            continue;
        }
        let s = g[0] + g[1] + g[2];
        let p = [g[0] / s, g[1] / s, g[2] / s];
        if p.iter().all(|&x| x > 0.0) {
            return p;
        }
    }
}

/// One Dir₂(½) triplet.
pub fn sample_dirichlet_half(seed: Seed) -> [f64; 3] {
    dirichlet_sym(0.5, &mut seed.rng(Purpose::Splits))
}
