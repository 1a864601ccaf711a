//! Splitting laws and labelled trees.
//!
//! A fragmentation-labelled tree carries a splitting triplet `P(u)` at each
//! internal node. Its coordinate-labelled form adds, at every node, the
//! barycentric coordinates `C(u) = (C₁, C₂, C₃)` of the corners of the
//! triangle the node stands for.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore};
use statrs::function::gamma::digamma;
use thiserror::Error;

use crate::rng::{child_key, Purpose, Seed, ROOT_KEY};
use crate::sampling::dirichlet_sym;
use crate::tree::{NodeId, NodeWord, TernaryTree};

pub type Triplet = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabelError {
    #[error("splitting law produced {0:?}, not a positive triplet summing to 1")]
    InvalidLaw(Triplet),
    #[error("cannot parse splitting law {0:?} (expected `centroid` or `dirichlet:<alpha>`)")]
    UnknownLaw(String),
    #[error("node {0} is a leaf")]
    NotInternal(NodeWord),
    #[error("labels of node {node} are inconsistent: {reason}")]
    Corrupt { node: NodeWord, reason: String },
}

/// A point of the simplex V₂, as barycentric weights on (A, B, C).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bary(pub Triplet);

impl Bary {
    pub const A: Bary = Bary([1.0, 0.0, 0.0]);
    pub const B: Bary = Bary([0.0, 1.0, 0.0]);
    pub const C: Bary = Bary([0.0, 0.0, 1.0]);

    /// Rescale to sum exactly as close to 1 as floating point allows.
    pub fn normalized(v: Triplet) -> Bary {
        let s = v[0] + v[1] + v[2];
        Bary([v[0] / s, v[1] / s, v[2] / s])
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Corner coordinates of a triangle.
pub type Corners = [Bary; 3];

pub const ROOT_CORNERS: Corners = [Bary::A, Bary::B, Bary::C];

/// `C·P = P₁C₁ + P₂C₂ + P₃C₃`.
pub fn combine(c: &Corners, p: &Triplet) -> Bary {
    let mut v = [0.0; 3];
    for (j, vj) in v.iter_mut().enumerate() {
        *vj = p[0] * c[0].0[j] + p[1] * c[1].0[j] + p[2] * c[2].0[j];
    }
    Bary::normalized(v)
}

/// Rule (d): corners of child `letter` replace corner `letter` by `C·P`.
pub fn child_corners(c: &Corners, p: &Triplet, letter: u8) -> Corners {
    let mut out = *c;
    out[letter as usize - 1] = combine(c, p);
    out
}

/// Identity with row `i` replaced by `p`.
pub fn split_matrix(i: u8, p: &Triplet) -> [[f64; 3]; 3] {
    let mut m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    m[i as usize - 1] = *p;
    m
}

/// `M · Cᵀ`: rows of the result are the corners of the image triangle.
pub fn apply_matrix(m: &[[f64; 3]; 3], c: &Corners) -> Corners {
    let row = |r: &[f64; 3]| {
        let mut v = [0.0; 3];
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = r[0] * c[0].0[j] + r[1] * c[1].0[j] + r[2] * c[2].0[j];
        }
        Bary::normalized(v)
    };
    [row(&m[0]), row(&m[1]), row(&m[2])]
}

/// Signature of a user-supplied splitting law.
pub type CustomSampler = dyn Fn(&mut dyn RngCore) -> Triplet + Send + Sync;

#[derive(Clone)]
pub struct CustomLaw {
    pub name: String,
    pub sampler: Arc<CustomSampler>,
}

/// Law ν of the splitting triplets.
#[derive(Clone)]
pub enum SplittingLaw {
    Centroid,
    DirichletSym(f64),
    Custom(CustomLaw),
}

impl fmt::Debug for SplittingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SplittingLaw({self})")
    }
}

impl fmt::Display for SplittingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplittingLaw::Centroid => f.write_str("centroid"),
            SplittingLaw::DirichletSym(a) => write!(f, "dirichlet:{a}"),
            SplittingLaw::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

impl FromStr for SplittingLaw {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("centroid") {
            return Ok(SplittingLaw::Centroid);
        }
        if let Some(a) = s.strip_prefix("dirichlet:") {
            if let Ok(alpha) = a.parse::<f64>() {
                if alpha.is_finite() && alpha > 0.0 {
                    return Ok(SplittingLaw::DirichletSym(alpha));
                }
            }
        }
        Err(LabelError::UnknownLaw(s.to_string()))
    }
}

impl SplittingLaw {
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&mut dyn RngCore) -> Triplet + Send + Sync + 'static,
    ) -> Self {
        SplittingLaw::Custom(CustomLaw {
            name: name.into(),
            sampler: Arc::new(f),
        })
    }

    /// One draw, checked to be a positive triplet summing to 1.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Result<Triplet, LabelError> {
        match self {
            SplittingLaw::Centroid => Ok([1.0 / 3.0; 3]),
            SplittingLaw::DirichletSym(a) => Ok(dirichlet_sym(*a, rng)),
            SplittingLaw::Custom(c) => {
                let p = (c.sampler)(rng);
                let ok = p.iter().all(|x| x.is_finite() && *x > 0.0)
                    && (p.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
                if ok {
                    Ok(p)
                } else {
                    Err(LabelError::InvalidLaw(p))
                }
            }
        }
    }

    /// Splitting triplet at the node whose address key is `key`.
    pub fn draw_at(&self, seed: Seed, key: u64) -> Result<Triplet, LabelError> {
        match self {
            SplittingLaw::Centroid => Ok([1.0 / 3.0; 3]),
            _ => self.draw(&mut seed.keyed_rng(Purpose::Splits, key)),
        }
    }

    /// `E(P₁²)` in closed form, when known.
    pub fn second_moment(&self) -> Option<f64> {
        match self {
            SplittingLaw::Centroid => Some(1.0 / 9.0),
            // P₁ ~ Beta(α, 2α).
            SplittingLaw::DirichletSym(a) => Some((a + 1.0) / (3.0 * (3.0 * a + 1.0))),
            SplittingLaw::Custom(_) => None,
        }
    }

    /// `E(−log P₁)` in closed form, when known.
    pub fn neg_log_mean(&self) -> Option<f64> {
        match self {
            SplittingLaw::Centroid => Some(3f64.ln()),
            SplittingLaw::DirichletSym(a) => Some(digamma(3.0 * a) - digamma(*a)),
            SplittingLaw::Custom(_) => None,
        }
    }
}

/// Ternary tree with a splitting triplet at each internal node.
#[derive(Clone, Debug, PartialEq)]
pub struct FragLabelledTree {
    pub tree: TernaryTree,
    /// `Some(P(u))` for internal nodes, `None` for leaves.
    pub splits: Vec<Option<Triplet>>,
}

/// Address keys of all nodes, indexed by breadth-first id.
pub fn node_keys(t: &TernaryTree) -> Vec<u64> {
    let mut keys = vec![ROOT_KEY; t.len()];
    for u in t.internal_nodes() {
        let ch = t.children(u).expect("internal");
        for (j, c) in ch.into_iter().enumerate() {
            keys[c.index()] = child_key(keys[u.index()], j as u8 + 1);
        }
    }
    keys
}

/// Independent draws from `law` at every internal node. The draw at a node
/// depends only on the seed and the node's address.
pub fn attach_splits(
    t: &TernaryTree,
    law: &SplittingLaw,
    seed: Seed,
) -> Result<FragLabelledTree, LabelError> {
    let keys = node_keys(t);
    let mut splits = vec![None; t.len()];
    for u in t.internal_nodes() {
        splits[u.index()] = Some(law.draw_at(seed, keys[u.index()])?);
    }
    Ok(FragLabelledTree {
        tree: t.clone(),
        splits,
    })
}

/// Ternary tree with corner coordinates at every node and splitting
/// triplets at internal nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordLabelledTree {
    pub tree: TernaryTree,
    pub coords: Vec<Corners>,
    pub splits: Vec<Option<Triplet>>,
}

/// Fill in coordinates top-down from the root corners.
pub fn phi(ft: &FragLabelledTree) -> CoordLabelledTree {
    let t = &ft.tree;
    let mut coords = vec![ROOT_CORNERS; t.len()];
    for u in t.internal_nodes() {
        let p = ft.splits[u.index()].expect("internal node carries a triplet");
        let c = coords[u.index()];
        for (j, v) in t.children(u).expect("internal").into_iter().enumerate() {
            coords[v.index()] = child_corners(&c, &p, j as u8 + 1);
        }
    }
    CoordLabelledTree {
        tree: t.clone(),
        coords,
        splits: ft.splits.clone(),
    }
}

const RULE_TOL: f64 = 1e-12;

fn corners_gap(a: &Corners, b: &Corners) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.0.iter().zip(&y.0).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

impl CoordLabelledTree {
    /// Assemble from stored labels, checking that they are those of
    /// [`phi`] applied to the splitting triplets.
    pub fn from_parts(
        tree: TernaryTree,
        coords: Vec<Corners>,
        splits: Vec<Option<Triplet>>,
    ) -> Result<Self, LabelError> {
        let corrupt = |u: NodeId, reason: String| LabelError::Corrupt {
            node: tree.word(u),
            reason,
        };
        if coords.len() != tree.len() || splits.len() != tree.len() {
            return Err(corrupt(NodeId::ROOT, "label arrays do not match the tree".into()));
        }
        if coords[0] != ROOT_CORNERS {
            return Err(corrupt(NodeId::ROOT, "root corners are not A, B, C".into()));
        }
        for u in tree.nodes() {
            let c = &coords[u.index()];
            if c.iter().any(|b| {
                b.0.iter().any(|x| !x.is_finite() || *x < -RULE_TOL)
                    || (b.sum() - 1.0).abs() > RULE_TOL
            }) {
                return Err(corrupt(u, "corner outside the simplex".into()));
            }
            match (tree.children(u), splits[u.index()]) {
                (None, None) => {}
                (None, Some(_)) => return Err(corrupt(u, "leaf carries a triplet".into())),
                (Some(_), None) => return Err(corrupt(u, "internal node lacks a triplet".into())),
                (Some(ch), Some(p)) => {
                    if p.iter().any(|x| !x.is_finite() || *x <= 0.0)
                        || (p.iter().sum::<f64>() - 1.0).abs() > RULE_TOL
                    {
                        return Err(corrupt(u, format!("triplet {p:?} not in V₂*")));
                    }
                    for (j, v) in ch.into_iter().enumerate() {
                        let want = child_corners(c, &p, j as u8 + 1);
                        let gap = corners_gap(&want, &coords[v.index()]);
                        if !(gap <= RULE_TOL) {
                            return Err(corrupt(v, format!("off the child rule by {gap:e}")));
                        }
                    }
                }
            }
        }
        Ok(CoordLabelledTree {
            tree,
            coords,
            splits,
        })
    }

    /// Inverse of [`phi`]: forget the coordinates.
    pub fn drop_coordinates(&self) -> FragLabelledTree {
        FragLabelledTree {
            tree: self.tree.clone(),
            splits: self.splits.clone(),
        }
    }

    pub fn corners(&self, u: NodeId) -> &Corners {
        &self.coords[u.index()]
    }
}

/// Barycentric coordinates `C(u)·P(u)` of the vertex inserted at `u`.
pub fn vertex_coordinates(ct: &CoordLabelledTree, u: NodeId) -> Result<Bary, LabelError> {
    match ct.splits[u.index()] {
        Some(p) => Ok(combine(&ct.coords[u.index()], &p)),
        None => Err(LabelError::NotInternal(ct.tree.word(u))),
    }
}

/// 1 if the shapes differ, otherwise the sup-norm gap over corresponding
/// nodes of coordinates and splitting triplets, capped at 1.
pub fn label_distance(a: &CoordLabelledTree, b: &CoordLabelledTree) -> f64 {
    if a.tree != b.tree {
        return 1.0;
    }
    let mut d = 0.0f64;
    for u in a.tree.nodes() {
        d = d.max(corners_gap(&a.coords[u.index()], &b.coords[u.index()]));
        if let (Some(p), Some(q)) = (a.splits[u.index()], b.splits[u.index()]) {
            for j in 0..3 {
                d = d.max((p[j] - q[j]).abs());
            }
        }
    }
    d.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_increasing, sample_uniform_ternary};

    const THIRD: Triplet = [1.0 / 3.0; 3];

    #[test]
    fn root_coordinates() {
        let ct = phi(&attach_splits(&TernaryTree::root(), &SplittingLaw::Centroid, Seed::new(0)).unwrap());
        assert_eq!(ct.coords, vec![ROOT_CORNERS]);
    }

    #[test]
    fn centroid_child_rule() {
        let t = sample_increasing(1, Seed::new(0));
        let ct = phi(&attach_splits(&t, &SplittingLaw::Centroid, Seed::new(0)).unwrap());
        let c1 = ct.coords[1];
        for x in c1[0].0 {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(c1[1], Bary::B);
        assert_eq!(c1[2], Bary::C);
        let v = vertex_coordinates(&ct, NodeId::ROOT).unwrap();
        assert!(v.0.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert!(matches!(
            vertex_coordinates(&ct, NodeId(1)),
            Err(LabelError::NotInternal(_))
        ));
    }

    #[test]
    fn second_level_vertex() {
        // Node (1) has corners (G, B, C) with G the centroid, so its vertex
        // is (1/9, 4/9, 4/9).
        let t = crate::tree::validate(
            &["", "1", "2", "3", "11", "12", "13"]
                .map(|s| s.parse().unwrap()),
        )
        .unwrap();
        let ct = phi(&attach_splits(&t, &SplittingLaw::Centroid, Seed::new(0)).unwrap());
        let v = vertex_coordinates(&ct, NodeId(1)).unwrap();
        let want = [1.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0];
        for j in 0..3 {
            assert!((v.0[j] - want[j]).abs() < 1e-15);
        }
        // The same point as the row of M⁽¹⁾ applied to the root vertex.
        let m = split_matrix(1, &THIRD);
        let x = [1.0 / 3.0; 3];
        for j in 0..3 {
            let xm: f64 = (0..3).map(|k| x[k] * m[k][j]).sum();
            assert!((xm - want[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn split_matrix_shape() {
        let m = split_matrix(1, &THIRD);
        assert_eq!(m[0], THIRD);
        assert_eq!(m[1], [0.0, 1.0, 0.0]);
        assert_eq!(m[2], [0.0, 0.0, 1.0]);
        for i in 1..=3 {
            for row in split_matrix(i, &[0.2, 0.3, 0.5]) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn matrix_form_matches_child_rule() {
        use rand::Rng;
        let mut rng = Seed::new(3).rng(Purpose::Points);
        let law = SplittingLaw::DirichletSym(0.5);
        for _ in 0..1000 {
            let c: Corners = [0, 1, 2].map(|_| Bary(law.draw(&mut rng).unwrap()));
            let p = law.draw(&mut rng).unwrap();
            let i = rng.random_range(1..=3u8);
            let a = apply_matrix(&split_matrix(i, &p), &c);
            let b = child_corners(&c, &p, i);
            assert!(corners_gap(&a, &b) < 1e-15);
        }
    }

    #[test]
    fn labels_deterministic_and_roundtrip() {
        let law = SplittingLaw::DirichletSym(0.5);
        for s in 0..100 {
            let seed = Seed::new(8).with_stream(s);
            let t = sample_uniform_ternary((s % 50) as usize, seed);
            let ft = attach_splits(&t, &law, seed).unwrap();
            assert_eq!(ft, attach_splits(&t, &law, seed).unwrap());
            let ct = phi(&ft);
            assert_eq!(ct.drop_coordinates(), ft);
            for c in &ct.coords {
                for b in c {
                    assert!((b.sum() - 1.0).abs() < 1e-12);
                }
            }
            let back =
                CoordLabelledTree::from_parts(ct.tree.clone(), ct.coords.clone(), ct.splits.clone())
                    .unwrap();
            assert_eq!(back, ct);
            assert_eq!(label_distance(&ct, &ct), 0.0);
        }
    }

    #[test]
    fn label_distance_cases() {
        let seed = Seed::new(2);
        let t = sample_uniform_ternary(10, seed);
        let law = SplittingLaw::DirichletSym(0.5);
        let ct = phi(&attach_splits(&t, &law, seed).unwrap());
        let mut ft = ct.drop_coordinates();
        let p = ft.splits[0].unwrap();
        ft.splits[0] = Some(Bary::normalized([p[0] + 0.01, p[1], p[2]]).0);
        let d = label_distance(&ct, &phi(&ft));
        assert!(d > 0.0 && d <= 1.0);
        let other = phi(&attach_splits(&sample_increasing(10, Seed::new(99)), &law, seed).unwrap());
        if other.tree != ct.tree {
            assert_eq!(label_distance(&ct, &other), 1.0);
        }
    }

    #[test]
    fn custom_law_checked() {
        let bad = SplittingLaw::custom("bad", |_| [0.5, 0.5, 0.0]);
        let t = sample_increasing(3, Seed::new(1));
        assert!(matches!(
            attach_splits(&t, &bad, Seed::new(1)),
            Err(LabelError::InvalidLaw(_))
        ));
        let ok = SplittingLaw::custom("fixed", |_| [0.2, 0.3, 0.5]);
        assert!(attach_splits(&t, &ok, Seed::new(1)).is_ok());
    }

    #[test]
    fn corrupt_coordinates_rejected() {
        let t = sample_increasing(4, Seed::new(1));
        let ct = phi(&attach_splits(&t, &SplittingLaw::Centroid, Seed::new(1)).unwrap());
        let mut coords = ct.coords.clone();
        coords[2][0] = Bary([0.5, 0.25, 0.25]);
        assert!(CoordLabelledTree::from_parts(t.clone(), coords, ct.splits.clone()).is_err());
        let mut splits = ct.splits.clone();
        splits[0] = Some([0.0, 0.5, 0.5]);
        assert!(CoordLabelledTree::from_parts(t, ct.coords.clone(), splits).is_err());
    }

    #[test]
    fn law_parsing_and_moments() {
        assert!(matches!("centroid".parse(), Ok(SplittingLaw::Centroid)));
        assert!(matches!(
            "dirichlet:0.5".parse::<SplittingLaw>(),
            Ok(SplittingLaw::DirichletSym(a)) if a == 0.5
        ));
        assert!("dirichlet:-1".parse::<SplittingLaw>().is_err());
        assert!("uniform".parse::<SplittingLaw>().is_err());
        let d = SplittingLaw::DirichletSym(0.5);
        assert!((d.second_moment().unwrap() - 0.2).abs() < 1e-15);
        assert!((d.neg_log_mean().unwrap() - 2.0).abs() < 1e-12);
    }
}
