//! Fragmentation trees: ternary trees whose nodes carry nested subintervals
//! of [0,1).
//!
//! Endpoints are stored in fixed point with 127 fractional bits, so the
//! lengths of any covering family of intervals add up to exactly one.

use rand::Rng;
use thiserror::Error;

use super::dirichlet_sym;
use crate::rng::{child_key, Purpose, Seed, ROOT_KEY};
use crate::tree::{NodeId, NodeWord, TernaryTree};

/// Fixed-point representation of 1.
pub const FIXED_ONE: u128 = 1 << 127;
const FIXED_SCALE: f64 = FIXED_ONE as f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FragError {
    #[error("point u_{step} = {point} lies on an interval endpoint shared by two leaves")]
    PointOnBoundary { step: usize, point: f64 },
    #[error("point u_{step} = {point} is outside [0,1)")]
    PointOutOfRange { step: usize, point: f64 },
    #[error("{needed} points needed, {got} given")]
    NotEnoughPoints { needed: usize, got: usize },
    #[error("ratio triplet for node {node} is not a positive triplet summing to 1")]
    InvalidTriplet { node: NodeWord },
}

/// Half-open interval `[lo, hi)` in fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: u128,
    pub hi: u128,
}

impl Interval {
    pub const UNIT: Interval = Interval {
        lo: 0,
        hi: FIXED_ONE,
    };

    pub fn start(&self) -> f64 {
        self.lo as f64 / FIXED_SCALE
    }

    pub fn end(&self) -> f64 {
        self.hi as f64 / FIXED_SCALE
    }

    /// Length in fixed point.
    pub fn width(&self) -> u128 {
        self.hi - self.lo
    }

    pub fn length(&self) -> f64 {
        self.width() as f64 / FIXED_SCALE
    }

    pub fn contains(&self, x: u128) -> bool {
        self.lo <= x && x < self.hi
    }
}

/// Fixed-point image of a real in [0,1), rounding down.
pub fn to_fixed(u: f64) -> u128 {
    (u * FIXED_SCALE) as u128
}

/// Cut `iv` into three consecutive pieces with length ratios `y`.
pub fn split_interval(iv: Interval, y: [f64; 3]) -> [Interval; 3] {
    let len = iv.width();
    let lenf = len as f64;
    let c1 = iv.lo + ((lenf * y[0]) as u128).min(len);
    let c2 = c1 + ((lenf * y[1]) as u128).min(iv.hi - c1);
    [
        Interval { lo: iv.lo, hi: c1 },
        Interval { lo: c1, hi: c2 },
        Interval { lo: c2, hi: iv.hi },
    ]
}

/// Dirichlet(½) ratios attached to the node with address key `key`.
pub fn fragmentation_ratios(seed: Seed, key: u64) -> [f64; 3] {
    dirichlet_sym(0.5, &mut seed.keyed_rng(Purpose::Fragmentation, key))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FragmentationTree {
    pub tree: TernaryTree,
    /// Interval of each node, indexed by breadth-first id.
    pub intervals: Vec<Interval>,
}

impl FragmentationTree {
    pub fn interval(&self, id: NodeId) -> Interval {
        self.intervals[id.index()]
    }

    /// Sum of leaf lengths in fixed point; equals [`FIXED_ONE`].
    pub fn leaf_width_sum(&self) -> u128 {
        self.tree.leaves().map(|l| self.interval(l).width()).sum()
    }

    /// Leaf intervals in left-to-right order are contiguous and cover [0,1).
    pub fn leaves_partition_unit(&self) -> bool {
        let mut leaves: Vec<Interval> = self.tree.leaves().map(|l| self.interval(l)).collect();
        leaves.sort_by_key(|iv| (iv.lo, iv.hi));
        let mut at = 0u128;
        for iv in leaves {
            if iv.lo != at || iv.hi < iv.lo {
                return false;
            }
            at = iv.hi;
        }
        at == FIXED_ONE
    }

    /// `[a, b)` pairs as reals.
    pub fn intervals_f64(&self) -> Vec<[f64; 2]> {
        self.intervals.iter().map(|iv| [iv.start(), iv.end()]).collect()
    }
}

struct Arena {
    children: Vec<Option<[u32; 3]>>,
    parent: Vec<u32>,
    letter: Vec<u8>,
    key: Vec<u64>,
    iv: Vec<Interval>,
}

impl Arena {
    fn word(&self, mut i: u32) -> NodeWord {
        let mut letters = Vec::new();
        while i != 0 {
            letters.push(self.letter[i as usize]);
            i = self.parent[i as usize];
        }
        letters.reverse();
        NodeWord::from_letters(&letters).expect("letters in range")
    }
}

fn grow(
    n: usize,
    mut point: impl FnMut(usize) -> Result<u128, FragError>,
    mut ratios: impl FnMut(&Arena, u32) -> Result<[f64; 3], FragError>,
) -> Result<FragmentationTree, FragError> {
    let cap = 3 * n + 1;
    let mut a = Arena {
        children: Vec::with_capacity(cap),
        parent: Vec::with_capacity(cap),
        letter: Vec::with_capacity(cap),
        key: Vec::with_capacity(cap),
        iv: Vec::with_capacity(cap),
    };
    a.children.push(None);
    a.parent.push(0);
    a.letter.push(0);
    a.key.push(ROOT_KEY);
    a.iv.push(Interval::UNIT);

    for step in 0..n {
        let x = point(step)?;
        let mut cur = 0u32;
        while let Some(ch) = a.children[cur as usize] {
            cur = *ch
                .iter()
                .find(|&&c| a.iv[c as usize].contains(x))
                .expect("children partition their parent");
        }
        let leaf = a.iv[cur as usize];
        if x == leaf.lo && leaf.lo != 0 {
            return Err(FragError::PointOnBoundary {
                step: step + 1,
                point: x as f64 / FIXED_SCALE,
            });
        }
        let y = ratios(&a, cur)?;
        if !y.iter().all(|v| v.is_finite() && *v > 0.0) || (y.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(FragError::InvalidTriplet { node: a.word(cur) });
        }
        let parts = split_interval(leaf, y);
        let c = a.children.len() as u32;
        a.children[cur as usize] = Some([c, c + 1, c + 2]);
        let pk = a.key[cur as usize];
        for (j, iv) in parts.into_iter().enumerate() {
            let letter = j as u8 + 1;
            a.children.push(None);
            a.parent.push(cur);
            a.letter.push(letter);
            a.key.push(child_key(pk, letter));
            a.iv.push(iv);
        }
    }

    let (tree, order) = TernaryTree::from_arena(&a.children, 0);
    let intervals = order.iter().map(|&i| a.iv[i as usize]).collect();
    Ok(FragmentationTree { tree, intervals })
}

/// `F(n, u, y)`: split, `n` times, the leaf whose interval holds the next
/// point, with ratios `y(address)`.
pub fn build_fragmentation(
    n: usize,
    u: &[f64],
    mut y: impl FnMut(&NodeWord) -> [f64; 3],
) -> Result<FragmentationTree, FragError> {
    if u.len() < n {
        return Err(FragError::NotEnoughPoints {
            needed: n,
            got: u.len(),
        });
    }
    grow(
        n,
        |k| {
            let p = u[k];
            if !(0.0..1.0).contains(&p) {
                return Err(FragError::PointOutOfRange {
                    step: k + 1,
                    point: p,
                });
            }
            Ok(to_fixed(p))
        },
        |a, i| Ok(y(&a.word(i))),
    )
}

/// Random fragmentation tree with uniform points and Dir₂(½) ratios. The
/// ratios at a node depend only on the seed and the node address, so the
/// same seed yields consistent intervals for every `n`.
pub fn sample_fragmentation(n: usize, seed: Seed) -> FragmentationTree {
    let mut rng = seed.rng(Purpose::Uniforms);
    // A point on a shared endpoint has probability 2^-127 per step.
    grow(
        n,
        |_| Ok(rng.random::<u128>() >> 1),
        |a, i| Ok(fragmentation_ratios(seed, a.key[i as usize])),
    )
    .expect("random points avoid endpoints")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_split_example() {
        let f = build_fragmentation(1, &[0.1], |_| [0.2, 0.3, 0.5]).unwrap();
        let iv = f.intervals_f64();
        assert_eq!(iv[0], [0.0, 1.0]);
        assert!((iv[1][1] - 0.2).abs() < 1e-15);
        assert!((iv[2][0] - 0.2).abs() < 1e-15 && (iv[2][1] - 0.5).abs() < 1e-15);
        assert_eq!(iv[3][1], 1.0);
    }

    #[test]
    fn root_only() {
        let f = sample_fragmentation(0, Seed::new(1));
        assert_eq!(f.intervals, vec![Interval::UNIT]);
    }

    #[test]
    fn boundary_point_rejected() {
        let err = build_fragmentation(2, &[0.1, 0.5], |_| [0.25, 0.25, 0.5]).unwrap_err();
        assert_eq!(err, FragError::PointOnBoundary { step: 2, point: 0.5 });
        assert!(build_fragmentation(2, &[0.1], |_| [0.2, 0.3, 0.5]).is_err());
        assert!(build_fragmentation(1, &[1.0], |_| [0.2, 0.3, 0.5]).is_err());
        assert!(build_fragmentation(1, &[0.3], |_| [0.0, 0.5, 0.5]).is_err());
    }

    #[test]
    fn selected_leaf_contains_point() {
        let u = [0.9, 0.95, 0.05, 0.51, 0.93];
        let f = build_fragmentation(5, &u, |w| match w.len() % 3 {
            0 => [0.2, 0.3, 0.5],
            1 => [0.6, 0.1, 0.3],
            _ => [1.0 / 3.0; 3],
        })
        .unwrap();
        // Every point lies in an internal node's interval at each height it
        // traversed; its final container must be internal.
        for &p in &u {
            let x = to_fixed(p);
            let containing: Vec<_> = f
                .tree
                .nodes()
                .filter(|&v| f.interval(v).contains(x))
                .collect();
            assert!(containing.iter().any(|&v| !f.tree.is_leaf(v)));
        }
        assert!(f.leaves_partition_unit());
    }

    #[test]
    fn partition_is_exact_for_random_trees() {
        for s in 0..50 {
            let f = sample_fragmentation(300, Seed::new(4).with_stream(s));
            assert_eq!(f.leaf_width_sum(), FIXED_ONE);
            assert!(f.leaves_partition_unit());
            for u in f.tree.internal_nodes() {
                let ch = f.tree.children(u).unwrap();
                let sum: u128 = ch.iter().map(|&c| f.interval(c).width()).sum();
                assert_eq!(sum, f.interval(u).width());
                assert_eq!(f.interval(ch[0]).lo, f.interval(u).lo);
            }
        }
    }

    #[test]
    fn pure_function_of_inputs() {
        let u: Vec<f64> = (0..40).map(|i| ((i * 37 % 101) as f64 + 0.5) / 101.0).collect();
        let y = |w: &NodeWord| {
            let k = crate::rng::word_key(w.letters());
            let a = (k % 97) as f64 + 1.0;
            let b = (k / 97 % 89) as f64 + 1.0;
            [a / (a + b + 50.0), b / (a + b + 50.0), 50.0 / (a + b + 50.0)]
        };
        let f1 = build_fragmentation(40, &u, y).unwrap();
        let f2 = build_fragmentation(40, &u, y).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn growing_n_keeps_intervals() {
        let seed = Seed::new(11);
        let small = sample_fragmentation(20, seed);
        let big = sample_fragmentation(200, seed);
        for u in small.tree.nodes() {
            let w = small.tree.word(u);
            let v = big.tree.find(&w).unwrap();
            assert_eq!(small.interval(u), big.interval(v));
        }
    }
}
