//! The `stackplane-tree-v1` file format.
//!
//! ```text
//! {
//!   "schema": "stackplane-tree-v1",
//!   "config": { ... },                  optional provenance
//!   "n_internal": 4,
//!   "children": [[1,2,3], null, ...],   breadth-first, canonical
//!   "law": "centroid",                  optional
//!   "P": [[p1,p2,p3], null, ...],       optional, one per node
//!   "C": [[[..],[..],[..]], ...],       optional, one per node, needs "P"
//!   "intervals": [[a,b], ...],          optional, one per node
//!   "overflowed": 0                     optional, truncated subtrees
//! }
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;
use thiserror::Error;

use crate::labeling::{phi, Bary, CoordLabelledTree, Corners, FragLabelledTree, LabelError, Triplet};
use crate::sampling::FragmentationTree;
use crate::tree::{TernaryTree, TreeError};

pub const TREE_SCHEMA: &str = "stackplane-tree-v1";

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("not valid JSON for this format: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema is {0:?}, expected \"stackplane-tree-v1\"")]
    Version(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("n_internal is {stated} but the tree has {actual} internal nodes")]
    Count { stated: usize, actual: usize },
    #[error("{field} has {got} entries for {nodes} nodes")]
    Length {
        field: &'static str,
        got: usize,
        nodes: usize,
    },
    #[error(transparent)]
    Labels(#[from] LabelError),
    #[error("\"C\" given without \"P\"")]
    CoordsWithoutSplits,
    #[error("intervals: {0}")]
    Intervals(String),
    #[error("file carries no splitting triplets")]
    Unlabelled,
}

/// A real written with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sig17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Sig17)
    }
}

fn sig3(t: &Triplet) -> [Sig17; 3] {
    t.map(Sig17)
}

fn unsig3(t: &[Sig17; 3]) -> Triplet {
    t.map(|x| x.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    pub n_internal: usize,
    pub children: Vec<Option<[u32; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<Vec<Option<[Sig17; 3]>>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[[Sig17; 3]; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<[Sig17; 2]>>,
    /// Subtrees cut to a leaf by a node budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overflowed: Option<usize>,
}

impl TreeDocument {
    pub fn from_tree(t: &TernaryTree) -> Self {
        TreeDocument {
            schema: TREE_SCHEMA.to_string(),
            config: None,
            n_internal: t.n_internal(),
            children: t.children_array(),
            law: None,
            splits: None,
            coords: None,
            intervals: None,
            overflowed: None,
        }
    }

    pub fn from_coord_labelled(ct: &CoordLabelledTree, law: &str) -> Self {
        let mut d = Self::from_tree(&ct.tree);
        d.law = Some(law.to_string());
        d.splits = Some(ct.splits.iter().map(|p| p.as_ref().map(sig3)).collect());
        d.coords = Some(ct.coords.iter().map(|c| c.map(|b| sig3(&b.0))).collect());
        d
    }

    pub fn with_intervals(mut self, f: &FragmentationTree) -> Self {
        self.intervals = Some(f.intervals_f64().iter().map(|iv| iv.map(Sig17)).collect());
        self
    }

    pub fn with_overflowed(mut self, count: usize) -> Self {
        self.overflowed = Some(count);
        self
    }

    pub fn with_config(mut self, config: Value) -> Self {
        self.config = Some(config);
        self
    }

    /// Compact JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("tree documents serialize");
        s.push('\n');
        s
    }

    /// Parse and [`validate`](Self::validate).
    pub fn parse(s: &str) -> Result<Self, SchemaError> {
        let d: TreeDocument = serde_json::from_str(s)?;
        d.validate()?;
        Ok(d)
    }

    pub fn tree(&self) -> Result<TernaryTree, SchemaError> {
        let t = TernaryTree::from_children(&self.children)?;
        if t.n_internal() != self.n_internal {
            return Err(SchemaError::Count {
                stated: self.n_internal,
                actual: t.n_internal(),
            });
        }
        Ok(t)
    }

    fn check_len(field: &'static str, got: usize, nodes: usize) -> Result<(), SchemaError> {
        if got == nodes {
            Ok(())
        } else {
            Err(SchemaError::Length { field, got, nodes })
        }
    }

    /// Every structural and label constraint of the format.
    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.schema != TREE_SCHEMA {
            return Err(SchemaError::Version(self.schema.clone()));
        }
        let t = self.tree()?;
        if self.splits.is_some() {
            self.coord_labelled()?;
        } else if self.coords.is_some() {
            return Err(SchemaError::CoordsWithoutSplits);
        }
        if let Some(iv) = &self.intervals {
            Self::check_len("intervals", iv.len(), t.len())?;
            check_intervals(&t, iv)?;
        }
        Ok(())
    }

    pub fn frag_labelled(&self) -> Result<FragLabelledTree, SchemaError> {
        let tree = self.tree()?;
        let splits = self.splits.as_ref().ok_or(SchemaError::Unlabelled)?;
        Self::check_len("P", splits.len(), tree.len())?;
        Ok(FragLabelledTree {
            splits: splits.iter().map(|p| p.as_ref().map(unsig3)).collect(),
            tree,
        })
    }

    /// Stored coordinates when present (checked against the triplets),
    /// otherwise coordinates computed from the triplets.
    pub fn coord_labelled(&self) -> Result<CoordLabelledTree, SchemaError> {
        let ft = self.frag_labelled()?;
        match &self.coords {
            Some(c) => {
                Self::check_len("C", c.len(), ft.tree.len())?;
                let coords: Vec<Corners> = c.iter().map(|k| k.map(|b| Bary(unsig3(&b)))).collect();
                Ok(CoordLabelledTree::from_parts(ft.tree, coords, ft.splits)?)
            }
            None => {
                for (i, p) in ft.splits.iter().enumerate() {
                    let internal = ft.tree.children(crate::tree::NodeId(i as u32)).is_some();
                    if internal != p.is_some() {
                        return Err(LabelError::Corrupt {
                            node: ft.tree.word(crate::tree::NodeId(i as u32)),
                            reason: "triplet presence does not match arity".into(),
                        }
                        .into());
                    }
                }
                let ct = phi(&ft);
                Ok(CoordLabelledTree::from_parts(ct.tree, ct.coords, ct.splits)?)
            }
        }
    }
}

fn check_intervals(t: &TernaryTree, iv: &[[Sig17; 2]]) -> Result<(), SchemaError> {
    let bad = |u: crate::tree::NodeId, why: &str| SchemaError::Intervals(format!("node {}: {why}", t.word(u)));
    if iv[0][0].0 != 0.0 || iv[0][1].0 != 1.0 {
        return Err(bad(crate::tree::NodeId::ROOT, "root interval is not [0,1)"));
    }
    for u in t.nodes() {
        let [a, b] = iv[u.index()].map(|x| x.0);
        if !(a <= b) {
            return Err(bad(u, "end before start"));
        }
        if let Some(ch) = t.children(u) {
            let c = ch.map(|v| iv[v.index()].map(|x| x.0));
            let tiles = c[0][0] == a && c[0][1] == c[1][0] && c[1][1] == c[2][0] && c[2][1] == b;
            if !tiles {
                return Err(bad(u, "children do not tile the parent"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::{attach_splits, SplittingLaw};
    use crate::rng::Seed;
    use crate::sampling::{sample_fragmentation, sample_uniform_ternary};

    fn labelled(n: usize, seed: u64) -> CoordLabelledTree {
        let s = Seed::new(seed);
        let t = sample_uniform_ternary(n, s);
        phi(&attach_splits(&t, &SplittingLaw::DirichletSym(0.5), s).unwrap())
    }

    #[test]
    fn round_trip_is_exact() {
        let ct = labelled(60, 3);
        let doc = TreeDocument::from_coord_labelled(&ct, "dirichlet:0.5");
        let s = doc.to_json();
        let back = TreeDocument::parse(&s).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.coord_labelled().unwrap(), ct);
        assert_eq!(back.to_json(), s);
    }

    #[test]
    fn seventeen_digits() {
        let t = sample_uniform_ternary(1, Seed::new(0));
        let ct = phi(&attach_splits(&t, &SplittingLaw::Centroid, Seed::new(0)).unwrap());
        let doc = TreeDocument::from_coord_labelled(&ct, "centroid");
        let s = doc.to_json();
        assert!(s.contains("3.3333333333333331e-1"), "{s}");
    }

    #[test]
    fn bare_and_interval_files() {
        let doc = TreeDocument::from_tree(&TernaryTree::root());
        assert_eq!(
            doc.to_json(),
            "{\"schema\":\"stackplane-tree-v1\",\"n_internal\":0,\"children\":[null]}\n"
        );
        let f = sample_fragmentation(30, Seed::new(2));
        let s = TreeDocument::from_tree(&f.tree).with_intervals(&f).to_json();
        TreeDocument::parse(&s).unwrap();
    }

    #[test]
    fn violations_are_reported() {
        let ct = labelled(5, 1);
        let good = TreeDocument::from_coord_labelled(&ct, "x");
        let mut d = good.clone();
        d.schema = "stackplane-tree-v0".into();
        assert!(matches!(d.validate(), Err(SchemaError::Version(_))));
        let mut d = good.clone();
        d.n_internal = 4;
        assert!(matches!(d.validate(), Err(SchemaError::Count { .. })));
        let mut d = good.clone();
        d.children[0] = Some([2, 1, 3]);
        assert!(matches!(d.validate(), Err(SchemaError::Tree(_))));
        let mut d = good.clone();
        d.coords.as_mut().unwrap()[1][0][0] = Sig17(0.9);
        assert!(matches!(d.validate(), Err(SchemaError::Labels(_))));
        let mut d = good.clone();
        d.splits = None;
        assert!(matches!(d.validate(), Err(SchemaError::CoordsWithoutSplits)));
        assert!(TreeDocument::parse("{\"schema\":").is_err());
        assert!(TreeDocument::parse("{\"schema\":\"stackplane-tree-v1\",\"n_internal\":0,\"children\":[null],\"extra\":1}").is_err());
    }
}
