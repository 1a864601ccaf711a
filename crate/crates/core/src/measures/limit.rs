//! The limit measure of the increasing model, read off the fragmentation.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::Serialize;

use super::{MeasureError, OccupationMeasure};
use crate::geometry::{corners_cartesian, psi, Point2};
use crate::labeling::{attach_splits, child_corners, phi, Corners, SplittingLaw, ROOT_CORNERS};
use crate::rng::{child_key, Seed, ROOT_KEY};
use crate::sampling::{fragmentation_ratios, sample_fragmentation, split_interval, Interval, FIXED_ONE};
use crate::tree::NodeWord;

/// Deepest cell reachable through [`LimitMeasure::cell`].
pub const MAX_LIMIT_DEPTH: usize = 25;
/// Deepest level [`LimitMeasure::level`] will list in full.
pub const MAX_MATERIALIZED_DEPTH: usize = 12;

/// The measure `μ` built from one seed: cell `u` has mass `|I^u|` and
/// triangle `T(u)`. Cells are computed on demand from address-keyed
/// streams, so they agree with [`sample_fragmentation`] and
/// [`attach_splits`] run with the same seed.
#[derive(Clone, Debug)]
pub struct LimitMeasure {
    pub law: SplittingLaw,
    pub seed: Seed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitCell {
    pub word: NodeWord,
    pub interval: Interval,
    pub corners: Corners,
}

impl LimitCell {
    pub fn mass(&self) -> f64 {
        self.interval.length()
    }

    pub fn triangle(&self) -> [Point2; 3] {
        corners_cartesian(&self.corners)
    }
}

/// Every cell at one depth.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitMeasureApprox {
    pub depth: usize,
    pub cells: Vec<LimitCell>,
}

impl LimitMeasureApprox {
    /// Fixed-point total; equals [`FIXED_ONE`].
    pub fn total_width(&self) -> u128 {
        self.cells.iter().map(|c| c.interval.width()).sum()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.cells.iter().map(LimitCell::mass).collect()
    }
}

struct Frontier {
    word: NodeWord,
    key: u64,
    iv: Interval,
    corners: Corners,
}

impl LimitMeasure {
    pub fn new(law: SplittingLaw, seed: Seed) -> Self {
        LimitMeasure { law, seed }
    }

    fn children(&self, f: &Frontier) -> Result<[Frontier; 3], MeasureError> {
        let ivs = split_interval(f.iv, fragmentation_ratios(self.seed, f.key));
        let p = self.law.draw_at(self.seed, f.key)?;
        Ok([1u8, 2, 3].map(|l| Frontier {
            word: f.word.child(l),
            key: child_key(f.key, l),
            iv: ivs[l as usize - 1],
            corners: child_corners(&f.corners, &p, l),
        }))
    }

    fn root() -> Frontier {
        Frontier {
            word: NodeWord::root(),
            key: ROOT_KEY,
            iv: Interval::UNIT,
            corners: ROOT_CORNERS,
        }
    }

    pub fn cell(&self, word: &NodeWord) -> Result<LimitCell, MeasureError> {
        if word.len() > MAX_LIMIT_DEPTH {
            return Err(MeasureError::DepthTooLarge {
                depth: word.len(),
                limit: MAX_LIMIT_DEPTH,
            });
        }
        let mut f = Self::root();
        for &l in word.letters() {
            let [a, b, c] = self.children(&f)?;
            f = [a, b, c].into_iter().nth(l as usize - 1).expect("letter in 1..=3");
        }
        Ok(LimitCell {
            word: f.word,
            interval: f.iv,
            corners: f.corners,
        })
    }

    /// Fixed-point mass of a cell, without computing its triangle.
    pub fn cell_width(&self, word: &NodeWord) -> u128 {
        let (mut key, mut iv) = (ROOT_KEY, Interval::UNIT);
        for &l in word.letters() {
            iv = split_interval(iv, fragmentation_ratios(self.seed, key))[l as usize - 1];
            key = child_key(key, l);
        }
        iv.width()
    }

    /// Sum of the fixed-point masses of `family`.
    pub fn family_width(&self, family: &[NodeWord]) -> u128 {
        family.iter().map(|w| self.cell_width(w)).sum()
    }

    /// All `3^depth` cells, in breadth-first order.
    pub fn level(&self, depth: usize) -> Result<LimitMeasureApprox, MeasureError> {
        if depth > MAX_MATERIALIZED_DEPTH {
            return Err(MeasureError::DepthTooLarge {
                depth,
                limit: MAX_MATERIALIZED_DEPTH,
            });
        }
        let mut level = vec![Self::root()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(3 * level.len());
            for f in &level {
                next.extend(self.children(f)?);
            }
            level = next;
        }
        Ok(LimitMeasureApprox {
            depth,
            cells: level
                .into_iter()
                .map(|f| LimitCell {
                    word: f.word,
                    interval: f.iv,
                    corners: f.corners,
                })
                .collect(),
        })
    }

    /// Largest cell mass at each depth of `lo..=hi`. Masses only shrink
    /// along a branch, so a best-first search pops the heaviest cell of
    /// each depth before any lighter one.
    pub fn max_cell_mass(&self, lo: usize, hi: usize) -> Result<Vec<f64>, MeasureError> {
        if hi > MAX_LIMIT_DEPTH {
            return Err(MeasureError::DepthTooLarge {
                depth: hi,
                limit: MAX_LIMIT_DEPTH,
            });
        }
        assert!(lo <= hi, "empty depth range");
        let mut best: Vec<Option<u128>> = vec![None; hi + 1];
        let mut heap = BinaryHeap::new();
        // Ties break towards shallower, then leftmost cells.
        heap.push((FIXED_ONE, Reverse(0usize), Reverse(0u128), ROOT_KEY));
        let mut missing = hi + 1 - lo;
        while let Some((w, Reverse(d), Reverse(start), key)) = heap.pop() {
            if best[d].is_none() {
                best[d] = Some(w);
                if d >= lo {
                    missing -= 1;
                    if missing == 0 {
                        break;
                    }
                }
            }
            if d < hi {
                let ivs = split_interval(
                    Interval {
                        lo: start,
                        hi: start + w,
                    },
                    fragmentation_ratios(self.seed, key),
                );
                for (j, iv) in ivs.into_iter().enumerate() {
                    heap.push((iv.width(), Reverse(d + 1), Reverse(iv.lo), child_key(key, j as u8 + 1)));
                }
            }
        }
        Ok((lo..=hi)
            .map(|d| best[d].map_or(0.0, |w| Interval { lo: 0, hi: w }.length()))
            .collect())
    }
}

/// Cells of depth `depth` of the measure built from `seed` and `law`.
pub fn limit_measure(
    depth: usize,
    law: &SplittingLaw,
    seed: Seed,
) -> Result<LimitMeasureApprox, MeasureError> {
    LimitMeasure::new(law.clone(), seed).level(depth)
}

/// Whether `family` is the leaf set of some finite ternary tree, i.e. its
/// triangles tile `T̃`.
pub fn is_covering_family(family: &[NodeWord]) -> bool {
    let members: BTreeSet<&NodeWord> = family.iter().collect();
    if members.is_empty() || members.len() != family.len() {
        return false;
    }
    let mut inner: BTreeSet<NodeWord> = BTreeSet::new();
    for w in &members {
        for p in w.prefixes().filter(|p| p.len() < w.len()) {
            inner.insert(p);
        }
    }
    if inner.iter().any(|p| members.contains(p)) {
        return false;
    }
    inner.iter().all(|p| {
        (1..=3u8).all(|l| {
            let c = p.child(l);
            members.contains(&c) || inner.contains(&c)
        })
    })
}

/// One cell of the limit measure next to the occupation measure of the
/// coupled size-`n` drawing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupledCell {
    pub word: String,
    /// `|I^u|`.
    pub limit_mass: f64,
    /// Internal nodes of the subtree at `u`, divided by `n`.
    pub tree_mass: f64,
    /// Vertices strictly inside `T̃(u)`, divided by `n`.
    pub occupation_mass: f64,
}

impl CoupledCell {
    pub fn relative_error(&self) -> f64 {
        (self.occupation_mass - self.limit_mass).abs() / self.limit_mass
    }
}

/// Compare `μₙ(T̃(u))` with `|I^u|` over every depth-`depth` cell, for the
/// fragmentation tree of size `n` and the limit measure of the same seed.
pub fn coupled_cell_masses(
    n: usize,
    depth: usize,
    law: &SplittingLaw,
    seed: Seed,
) -> Result<Vec<CoupledCell>, MeasureError> {
    let frag = sample_fragmentation(n, seed);
    let drawing = psi(&phi(&attach_splits(&frag.tree, law, seed)?))?;
    let mu = OccupationMeasure::from_points(drawing.vertices)?;
    let sizes = frag.tree.subtree_internal_counts();
    let lm = LimitMeasure::new(law.clone(), seed);
    lm.level(depth)?
        .cells
        .into_iter()
        .map(|c| {
            let tree_mass = frag
                .tree
                .find(&c.word)
                .map_or(0.0, |u| f64::from(sizes[u.index()]) / n as f64);
            Ok(CoupledCell {
                word: c.word.to_string(),
                limit_mass: c.mass(),
                tree_mass,
                occupation_mass: mu.interior_mass(&c.triangle()),
            })
        })
        .collect()
}
