//! Ternary trees addressed by words over {1, 2, 3}.
//!
//! Nodes are stored in breadth-first order: node 0 is the root and the three
//! children of an internal node occupy consecutive indices. Addresses
//! ([`NodeWord`]) are computed on demand from parent links.

mod enumerate;

pub use enumerate::{enumerate_ternary, fuss_catalan, ENUMERATION_LIMIT};

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {0} is present but its parent is not")]
    MissingAncestor(NodeWord),
    #[error("node {node} has {count} children; ternary nodes need 0 or 3")]
    BadArity { node: NodeWord, count: usize },
    #[error("letter {0} is not in {{1,2,3}}")]
    BadLetter(u8),
    #[error("child array is not a breadth-first ternary tree: {0}")]
    Malformed(String),
    #[error("enumeration of n={0} exceeds the oracle limit")]
    ScaleExceeded(usize),
    #[error("trees agree up to the truncation depth {0}; distance not determined")]
    TruncationTooShallow(usize),
}

/// A finite word over {1, 2, 3}; the empty word is the root.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeWord(Vec<u8>);

impl NodeWord {
    pub fn root() -> Self {
        NodeWord(Vec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Result<Self, TreeError> {
        if let Some(&bad) = letters.iter().find(|l| !(1..=3).contains(*l)) {
            return Err(TreeError::BadLetter(bad));
        }
        Ok(NodeWord(letters.to_vec()))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    /// Height |u|.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `u(letter)`. Panics on a letter outside {1,2,3}.
    pub fn child(&self, letter: u8) -> Self {
        assert!((1..=3).contains(&letter), "letter {letter} out of range");
        let mut v = self.0.clone();
        v.push(letter);
        NodeWord(v)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(NodeWord(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn concat(&self, other: &NodeWord) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        NodeWord(v)
    }

    pub fn is_prefix_of(&self, other: &NodeWord) -> bool {
        other.0.starts_with(&self.0)
    }

    /// All prefixes from the root to `self` inclusive.
    pub fn prefixes(&self) -> impl Iterator<Item = NodeWord> + '_ {
        (0..=self.0.len()).map(move |k| NodeWord(self.0[..k].to_vec()))
    }
}

/// Highest common ancestor `u ∧ v`: the longest common prefix.
pub fn common_ancestor(u: &NodeWord, v: &NodeWord) -> NodeWord {
    let k = u
        .0
        .iter()
        .zip(&v.0)
        .take_while(|(a, b)| a == b)
        .count();
    NodeWord(u.0[..k].to_vec())
}

impl fmt::Display for NodeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for NodeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeWord({self})")
    }
}

impl FromStr for NodeWord {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(NodeWord::root());
        }
        let letters: Vec<u8> = s.bytes().map(|b| b.wrapping_sub(b'0')).collect();
        NodeWord::from_letters(&letters)
    }
}

/// Index of a node in breadth-first order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const NO_CHILD: u32 = u32::MAX;

/// Canonical shape of a tree: breadth-first arity flags as a '0'/'1' string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeKey(pub String);

impl fmt::Display for ShapeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Rooted planar tree in which every node has 0 or 3 ordered children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TernaryTree {
    first_child: Vec<u32>,
    parent: Vec<u32>,
    depth: Vec<u32>,
}

impl TernaryTree {
    /// The tree reduced to its root.
    pub fn root() -> Self {
        TernaryTree {
            first_child: vec![NO_CHILD],
            parent: vec![NO_CHILD],
            depth: vec![0],
        }
    }

    /// Build from breadth-first arity flags (`true` = internal).
    pub fn from_bfs_flags(flags: &[bool]) -> Result<Self, TreeError> {
        let internal = flags.iter().filter(|&&f| f).count();
        if flags.len() != 3 * internal + 1 {
            return Err(TreeError::Malformed(format!(
                "{} nodes but {} internal",
                flags.len(),
                internal
            )));
        }
        let mut first_child = Vec::with_capacity(flags.len());
        let mut next = 1u32;
        for (i, &f) in flags.iter().enumerate() {
            if f {
                if next as usize <= i {
                    return Err(TreeError::Malformed(format!("node {i} unreachable")));
                }
                first_child.push(next);
                next += 3;
            } else {
                first_child.push(NO_CHILD);
            }
        }
        Self::from_first_child_unchecked(first_child)
    }

    /// Build from a children array as stored in the JSON format: entry `i` is
    /// `None` for a leaf or the three ordered child indices. The array must be
    /// in canonical breadth-first order.
    pub fn from_children(children: &[Option<[u32; 3]>]) -> Result<Self, TreeError> {
        if children.is_empty() {
            return Err(TreeError::Malformed("empty child array".into()));
        }
        let mut next = 1u32;
        let mut first_child = Vec::with_capacity(children.len());
        for (i, c) in children.iter().enumerate() {
            match c {
                None => first_child.push(NO_CHILD),
                Some(ch) => {
                    if *ch != [next, next + 1, next + 2] {
                        return Err(TreeError::Malformed(format!(
                            "node {i} lists children {ch:?}, expected [{}, {}, {}]",
                            next,
                            next + 1,
                            next + 2
                        )));
                    }
                    first_child.push(next);
                    next += 3;
                }
            }
        }
        if next as usize != children.len() {
            return Err(TreeError::Malformed(format!(
                "{} entries but {} referenced",
                children.len(),
                next
            )));
        }
        Self::from_first_child_unchecked(first_child)
    }

    fn from_first_child_unchecked(first_child: Vec<u32>) -> Result<Self, TreeError> {
        let n = first_child.len();
        if n > u32::MAX as usize - 4 {
            return Err(TreeError::Malformed("too many nodes".into()));
        }
        let mut parent = vec![NO_CHILD; n];
        let mut depth = vec![0u32; n];
        for i in 0..n {
            let c = first_child[i];
            if c != NO_CHILD {
                for j in 0..3 {
                    let k = (c + j) as usize;
                    if k >= n {
                        return Err(TreeError::Malformed(format!("child {k} out of range")));
                    }
                    parent[k] = i as u32;
                    depth[k] = depth[i] + 1;
                }
            }
        }
        Ok(TernaryTree {
            first_child,
            parent,
            depth,
        })
    }

    /// Canonicalise an arena-built tree. `children[i]` holds the arena
    /// indices of node `i`'s children. Returns the tree and, for each
    /// breadth-first index, the arena index it came from.
    pub fn from_arena(children: &[Option<[u32; 3]>], root: u32) -> (Self, Vec<u32>) {
        let mut order = Vec::with_capacity(children.len());
        let mut first_child = Vec::with_capacity(children.len());
        let mut queue = VecDeque::new();
        queue.push_back(root);
        let mut next = 1u32;
        while let Some(a) = queue.pop_front() {
            order.push(a);
            match children[a as usize] {
                None => first_child.push(NO_CHILD),
                Some(ch) => {
                    first_child.push(next);
                    next += 3;
                    queue.extend(ch);
                }
            }
        }
        let tree = Self::from_first_child_unchecked(first_child)
            .expect("arena traversal yields a breadth-first tree");
        (tree, order)
    }

    /// Build from a preorder sequence of arity flags (Łukasiewicz order).
    pub fn from_preorder(flags: &[bool]) -> Result<Self, TreeError> {
        let mut children: Vec<Option<[u32; 3]>> = vec![None; flags.len()];
        // Stack of (node, next child slot) awaiting children.
        let mut stack: Vec<(u32, usize)> = Vec::new();
        let mut slots: Vec<[u32; 3]> = vec![[0; 3]; flags.len()];
        for (i, &f) in flags.iter().enumerate() {
            let i = i as u32;
            if let Some((p, slot)) = stack.last_mut() {
                slots[*p as usize][*slot] = i;
                *slot += 1;
                if *slot == 3 {
                    let p = *p;
                    children[p as usize] = Some(slots[p as usize]);
                    stack.pop();
                }
            } else if i != 0 {
                return Err(TreeError::Malformed("preorder sequence ends early".into()));
            }
            if f {
                stack.push((i, 0));
            }
        }
        if !stack.is_empty() || flags.is_empty() {
            return Err(TreeError::Malformed("preorder sequence incomplete".into()));
        }
        Ok(Self::from_arena(&children, 0).0)
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.first_child.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_internal(&self) -> usize {
        (self.len() - 1) / 3
    }

    pub fn n_leaves(&self) -> usize {
        self.len() - self.n_internal()
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.first_child[id.index()] == NO_CHILD
    }

    pub fn children(&self, id: NodeId) -> Option<[NodeId; 3]> {
        let c = self.first_child[id.index()];
        (c != NO_CHILD).then(|| [NodeId(c), NodeId(c + 1), NodeId(c + 2)])
    }

    pub fn child(&self, id: NodeId, letter: u8) -> Option<NodeId> {
        debug_assert!((1..=3).contains(&letter));
        self.children(id).map(|c| c[letter as usize - 1])
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        let p = self.parent[id.index()];
        (p != NO_CHILD).then_some(NodeId(p))
    }

    /// Last letter of the node's address; `None` for the root.
    pub fn letter(&self, id: NodeId) -> Option<u8> {
        self.parent(id)
            .map(|p| (id.0 - self.first_child[p.index()]) as u8 + 1)
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.depth[id.index()] as usize
    }

    /// Maximum node height.
    pub fn height(&self) -> usize {
        // Breadth-first order: the last node is among the deepest.
        self.depth[self.len() - 1] as usize
    }

    pub fn word(&self, id: NodeId) -> NodeWord {
        let mut letters = Vec::with_capacity(self.depth(id));
        let mut cur = id;
        while let Some(l) = self.letter(cur) {
            letters.push(l);
            cur = self.parent(cur).expect("non-root has a parent");
        }
        letters.reverse();
        NodeWord(letters)
    }

    pub fn find(&self, word: &NodeWord) -> Option<NodeId> {
        let mut cur = NodeId::ROOT;
        for &l in word.letters() {
            cur = self.child(cur, l)?;
        }
        Some(cur)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.len() as u32).map(NodeId)
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(move |&u| !self.is_leaf(u))
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(move |&u| self.is_leaf(u))
    }

    pub fn shape_key(&self) -> ShapeKey {
        ShapeKey(
            self.first_child
                .iter()
                .map(|&c| if c == NO_CHILD { '0' } else { '1' })
                .collect(),
        )
    }

    /// Children array in the JSON layout.
    pub fn children_array(&self) -> Vec<Option<[u32; 3]>> {
        self.first_child
            .iter()
            .map(|&c| (c != NO_CHILD).then(|| [c, c + 1, c + 2]))
            .collect()
    }

    /// Number of internal nodes in the subtree rooted at each node.
    pub fn subtree_internal_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.len()];
        for i in (0..self.len()).rev() {
            let c = self.first_child[i];
            if c != NO_CHILD {
                let c = c as usize;
                counts[i] = 1 + counts[c] + counts[c + 1] + counts[c + 2];
            }
        }
        counts
    }

    /// `θ_u(t)`: the subtree rooted at `id`, re-rooted.
    pub fn subtree(&self, id: NodeId) -> TernaryTree {
        let mut flags = Vec::new();
        let mut queue = VecDeque::from([id]);
        while let Some(u) = queue.pop_front() {
            match self.children(u) {
                Some(ch) => {
                    flags.push(true);
                    queue.extend(ch);
                }
                None => flags.push(false),
            }
        }
        TernaryTree::from_bfs_flags(&flags).expect("subtree of a valid tree is valid")
    }

    /// `B_r(t)`: nodes of height at most `r`. Only `floor(r)` matters.
    pub fn ball(&self, radius: f64) -> TreeBall {
        let r = if radius.is_finite() {
            radius.max(0.0).floor() as usize
        } else {
            usize::MAX
        };
        let flags: Vec<bool> = self
            .nodes()
            .take_while(|&u| self.depth(u) <= r)
            .map(|u| !self.is_leaf(u) && self.depth(u) < r)
            .collect();
        TreeBall {
            tree: TernaryTree::from_bfs_flags(&flags).expect("prefix of breadth-first order"),
            radius,
        }
    }
}

/// `B_r(t)` together with the radius it was cut at. Nodes at height
/// `floor(r)` appear as leaves whether or not they have children in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeBall {
    pub tree: TernaryTree,
    pub radius: f64,
}

/// Check that a finite set of words is a ternary tree.
pub fn validate(words: &[NodeWord]) -> Result<TernaryTree, TreeError> {
    let set: BTreeSet<&NodeWord> = words.iter().collect();
    if !set.contains(&NodeWord::root()) {
        return Err(TreeError::MissingAncestor(NodeWord::root()));
    }
    for w in &set {
        if let Some(p) = w.parent() {
            if !set.contains(&p) {
                return Err(TreeError::MissingAncestor(p));
            }
        }
    }
    let mut flags = Vec::with_capacity(set.len());
    let mut queue = VecDeque::from([NodeWord::root()]);
    while let Some(u) = queue.pop_front() {
        let present: Vec<NodeWord> = (1..=3)
            .map(|l| u.child(l))
            .filter(|c| set.contains(c))
            .collect();
        match present.len() {
            0 => flags.push(false),
            3 => {
                flags.push(true);
                queue.extend(present);
            }
            count => return Err(TreeError::BadArity { node: u, count }),
        }
    }
    TernaryTree::from_bfs_flags(&flags)
}

/// A tree that may be a depth truncation of an infinite tree: node sets are
/// known exactly up to height `depth`, and the arity of nodes at height
/// `depth` is unknown.
#[derive(Clone, Copy, Debug)]
pub struct Truncated<'a> {
    pub tree: &'a TernaryTree,
    pub depth: Option<usize>,
}

impl<'a> Truncated<'a> {
    pub fn complete(tree: &'a TernaryTree) -> Self {
        Truncated { tree, depth: None }
    }

    pub fn at(tree: &'a TernaryTree, depth: usize) -> Self {
        // A truncation that never reaches its cut-off depth is the whole tree.
        let depth = (tree.height() >= depth).then_some(depth);
        Truncated { tree, depth }
    }
}

/// Smallest height at which the node sets of the two trees differ, or
/// `None` if they are identical.
pub fn first_difference_height(a: &TernaryTree, b: &TernaryTree) -> Option<usize> {
    // While the trees agree, breadth-first indices correspond.
    for i in 0..a.len().min(b.len()) {
        let u = NodeId(i as u32);
        if a.is_leaf(u) != b.is_leaf(u) {
            return Some(a.depth(u) + 1);
        }
    }
    None
}

/// Local distance `inf {1/(r+1) : B_r(t1) = B_r(t2)}` between finite trees.
pub fn local_distance(a: &TernaryTree, b: &TernaryTree) -> f64 {
    match first_difference_height(a, b) {
        Some(h) => 1.0 / (h as f64 + 1.0),
        None => 0.0,
    }
}

/// Local distance when either argument may be a truncation. Fails when the
/// trees agree on everything the truncations determine.
pub fn local_distance_truncated(a: Truncated<'_>, b: Truncated<'_>) -> Result<f64, TreeError> {
    let limit = match (a.depth, b.depth) {
        (None, None) => return Ok(local_distance(a.tree, b.tree)),
        (Some(x), None) | (None, Some(x)) => x,
        (Some(x), Some(y)) => x.min(y),
    };
    // Arity is known for nodes strictly above the limit.
    for i in 0..a.tree.len().min(b.tree.len()) {
        let u = NodeId(i as u32);
        let h = a.tree.depth(u);
        if h >= limit {
            break;
        }
        if a.tree.is_leaf(u) != b.tree.is_leaf(u) {
            return Ok(1.0 / (h as f64 + 2.0));
        }
    }
    Err(TreeError::TruncationTooShallow(limit))
}
