use std::collections::HashMap;

use super::{TernaryTree, TreeError};

/// Largest internal-node count accepted by [`enumerate_ternary`].
pub const ENUMERATION_LIMIT: usize = 8;

/// Number of ternary trees with `n` internal nodes, `C(3n, n) / (2n + 1)`.
pub fn fuss_catalan(n: usize) -> u128 {
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        // C(3n, k+1) = C(3n, k) * (3n - k) / (k + 1), exact at every step.
        c = c * (3 * n as u128 - k) / (k + 1);
    }
    c / (2 * n as u128 + 1)
}

/// Every ternary tree with `n` internal nodes, each exactly once.
pub fn enumerate_ternary(n: usize) -> Result<Vec<TernaryTree>, TreeError> {
    if n > ENUMERATION_LIMIT {
        return Err(TreeError::ScaleExceeded(n));
    }
    let mut memo = HashMap::new();
    preorders(n, &mut memo)
        .iter()
        .map(|p| TernaryTree::from_preorder(p))
        .collect()
}

fn preorders(n: usize, memo: &mut HashMap<usize, Vec<Vec<bool>>>) -> Vec<Vec<bool>> {
    if let Some(v) = memo.get(&n) {
        return v.clone();
    }
    let out = if n == 0 {
        vec![vec![false]]
    } else {
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n - a {
                let c = n - 1 - a - b;
                let (pa, pb, pc) = (preorders(a, memo), preorders(b, memo), preorders(c, memo));
                for x in &pa {
                    for y in &pb {
                        for z in &pc {
                            let mut seq = Vec::with_capacity(3 * n + 1);
                            seq.push(true);
                            seq.extend_from_slice(x);
                            seq.extend_from_slice(y);
                            seq.extend_from_slice(z);
                            out.push(seq);
                        }
                    }
                }
            }
        }
        out
    };
    memo.insert(n, out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{local_distance, validate};
    use std::collections::HashSet;

    #[test]
    fn counts_match_fuss_catalan() {
        assert_eq!(enumerate_ternary(0).unwrap().len(), 1);
        assert_eq!(enumerate_ternary(2).unwrap().len(), 3);
        assert_eq!(enumerate_ternary(3).unwrap().len(), 12);
        for n in 0..=7 {
            let trees = enumerate_ternary(n).unwrap();
            assert_eq!(trees.len() as u128, fuss_catalan(n));
            let keys: HashSet<_> = trees.iter().map(|t| t.shape_key()).collect();
            assert_eq!(keys.len(), trees.len(), "duplicates at n={n}");
        }
        assert_eq!(enumerate_ternary(9), Err(TreeError::ScaleExceeded(9)));
    }

    #[test]
    fn enumerated_trees_are_valid() {
        for n in 0..=6 {
            for t in enumerate_ternary(n).unwrap() {
                assert_eq!(t.n_leaves(), 2 * t.n_internal() + 1);
                assert_eq!(t.n_internal(), n);
                let words: Vec<_> = t.nodes().map(|u| t.word(u)).collect();
                assert_eq!(validate(&words).unwrap(), t);
                for u in t.nodes() {
                    let s = t.subtree(u);
                    assert_eq!(s.n_leaves(), 2 * s.n_internal() + 1);
                }
            }
        }
    }

    #[test]
    fn local_distance_is_ultrametric_on_n3() {
        let trees = enumerate_ternary(3).unwrap();
        for a in &trees {
            assert_eq!(local_distance(a, a), 0.0);
            for b in &trees {
                let ab = local_distance(a, b);
                assert_eq!(ab, local_distance(b, a));
                for c in &trees {
                    assert!(local_distance(a, c) <= ab.max(local_distance(b, c)));
                }
            }
        }
    }
}
