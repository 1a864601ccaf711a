//! Planar drawings of coordinate-labelled trees.

mod hausdorff;
mod svg;

pub use hausdorff::{directed_hausdorff, hausdorff_distance, point_segment_distance, SegmentIndex};
pub use svg::{render_svg, vertices_csv, SvgOptions};

use thiserror::Error;

use crate::labeling::{
    attach_splits, combine, phi, Bary, CoordLabelledTree, Corners, LabelError, SplittingLaw,
    Triplet, ROOT_CORNERS,
};
use crate::rng::{word_key, Seed};
use crate::sampling::{sample_limit_tree, AssembledLimitTree, LimitTreeSample};
use crate::tree::{NodeId, NodeWord};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("face at node {0} is degenerate: labels are corrupt")]
    DegenerateFace(NodeWord),
    #[error(transparent)]
    Label(#[from] LabelError),
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

pub const CORNER_A: Point2 = Point2::new(0.0, 0.0);
pub const CORNER_B: Point2 = Point2::new(1.0, 0.0);
pub const CORNER_C: Point2 = Point2::new(0.5, SQRT3 / 2.0);

/// Area of the filled triangle T̃.
pub const ROOT_AREA: f64 = SQRT3 / 4.0;

/// `c₁A + c₂B + c₃C`.
pub fn to_cartesian(c: Bary) -> Point2 {
    let [_, b, g] = c.0;
    Point2::new(b + 0.5 * g, g * (SQRT3 / 2.0))
}

/// Barycentric coordinates of a point with respect to (A, B, C).
pub fn to_barycentric(p: Point2) -> Bary {
    let g = p.y * 2.0 / SQRT3;
    let b = p.x - 0.5 * g;
    Bary([1.0 - b - g, b, g])
}

/// Twice the signed area.
pub fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

pub fn triangle_area(t: &[Point2; 3]) -> f64 {
    0.5 * cross(t[0], t[1], t[2]).abs()
}

/// Closed-triangle membership with slack `tol` on each edge.
pub fn in_triangle(p: Point2, t: &[Point2; 3], tol: f64) -> bool {
    let s = cross(t[0], t[1], t[2]).signum();
    (0..3).all(|i| {
        let (a, b) = (t[i], t[(i + 1) % 3]);
        s * cross(a, b, p) >= -tol * a.dist(b)
    })
}

/// Largest side.
pub fn triangle_diameter(t: &[Point2; 3]) -> f64 {
    t[0].dist(t[1]).max(t[1].dist(t[2])).max(t[2].dist(t[0]))
}

/// Distance from the vertex opposite side `b` to the centroid,
/// `(1/3)√(2a² + 2c² − b²)`.
pub fn centroid_distance(a: f64, b: f64, c: f64) -> f64 {
    (2.0 * a * a + 2.0 * c * c - b * b).max(0.0).sqrt() / 3.0
}

pub fn corners_cartesian(c: &Corners) -> [Point2; 3] {
    [to_cartesian(c[0]), to_cartesian(c[1]), to_cartesian(c[2])]
}

/// Triangle `T(u)` of a node.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleOf {
    pub node: NodeWord,
    pub corners: [Point2; 3],
}

pub fn triangle_of(ct: &CoordLabelledTree, u: NodeId) -> TriangleOf {
    TriangleOf {
        node: ct.tree.word(u),
        corners: corners_cartesian(ct.corners(u)),
    }
}

/// Face `(A_f, B_f, C_f)` of a drawing together with its tree leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub corners: [Point2; 3],
    pub leaf: NodeId,
}

/// An embedded stack triangulation.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactTriangulation {
    /// Inserted vertices, one per internal tree node.
    pub vertices: Vec<Point2>,
    pub vertex_nodes: Vec<NodeId>,
    pub segments: Vec<[Point2; 2]>,
    pub faces: Vec<Face>,
}

impl CompactTriangulation {
    /// The bare triangle T.
    pub fn root_triangle() -> Self {
        CompactTriangulation {
            vertices: Vec::new(),
            vertex_nodes: Vec::new(),
            segments: outer_segments(),
            faces: vec![Face {
                corners: [CORNER_A, CORNER_B, CORNER_C],
                leaf: NodeId::ROOT,
            }],
        }
    }
}

fn outer_segments() -> Vec<[Point2; 2]> {
    vec![
        [CORNER_A, CORNER_B],
        [CORNER_B, CORNER_C],
        [CORNER_C, CORNER_A],
    ]
}

fn bary_det(c: &Corners) -> f64 {
    let [a, b, g] = [c[0].0, c[1].0, c[2].0];
    a[0] * (b[1] * g[2] - b[2] * g[1]) - a[1] * (b[0] * g[2] - b[2] * g[0])
        + a[2] * (b[0] * g[1] - b[1] * g[0])
}

fn in_open_simplex(p: &Triplet) -> bool {
    p.iter().all(|x| x.is_finite() && *x > 0.0)
}

/// The drawing encoded by a coordinate-labelled tree.
///
/// Fails with `DegenerateFace` when labels are corrupt: a splitting triplet
/// outside V₂*, non-finite coordinates, or a face whose corners are in
/// reversed orientation beyond rounding.
pub fn psi(ct: &CoordLabelledTree) -> Result<CompactTriangulation, GeomError> {
    let t = &ct.tree;
    let n = t.n_internal();
    let mut vertices = Vec::with_capacity(n);
    let mut vertex_nodes = Vec::with_capacity(n);
    let mut segments = outer_segments();
    segments.reserve(3 * n);
    for u in t.internal_nodes() {
        let p = ct.splits[u.index()].ok_or_else(|| GeomError::DegenerateFace(t.word(u)))?;
        if !in_open_simplex(&p) {
            return Err(GeomError::DegenerateFace(t.word(u)));
        }
        let c = ct.corners(u);
        let m = to_cartesian(combine(c, &p));
        if !(m.x.is_finite() && m.y.is_finite()) {
            return Err(GeomError::DegenerateFace(t.word(u)));
        }
        for corner in corners_cartesian(c) {
            segments.push([corner, m]);
        }
        vertices.push(m);
        vertex_nodes.push(u);
    }
    let mut faces = Vec::with_capacity(2 * n + 1);
    for l in t.leaves() {
        let c = ct.corners(l);
        let det = bary_det(c);
        if !(det > -1e-12) {
            return Err(GeomError::DegenerateFace(t.word(l)));
        }
        faces.push(Face {
            corners: corners_cartesian(c),
            leaf: l,
        });
    }
    Ok(CompactTriangulation {
        vertices,
        vertex_nodes,
        segments,
        faces,
    })
}

/// Reference embedding by repeated face insertion, working on Cartesian
/// points only: internal nodes are processed parents first, each replacing
/// its face `(A, B, C)` by `(M, B, C)`, `(A, M, C)`, `(A, B, M)` with
/// `M = P₁A + P₂B + P₃C`. Quadratic in the worst case; for testing.
pub fn psi_inductive(ct: &CoordLabelledTree) -> CompactTriangulation {
    let t = &ct.tree;
    let mut face_of = vec![None; t.len()];
    face_of[0] = Some([CORNER_A, CORNER_B, CORNER_C]);
    let mut out = CompactTriangulation::root_triangle();
    out.faces.clear();
    for u in t.internal_nodes() {
        let [a, b, c] = face_of[u.index()].take().expect("parent processed first");
        let p = ct.splits[u.index()].expect("internal");
        let m = Point2::new(
            p[0] * a.x + p[1] * b.x + p[2] * c.x,
            p[0] * a.y + p[1] * b.y + p[2] * c.y,
        );
        out.vertices.push(m);
        out.vertex_nodes.push(u);
        out.segments.extend([[a, m], [b, m], [c, m]]);
        let ch = t.children(u).expect("internal");
        face_of[ch[0].index()] = Some([m, b, c]);
        face_of[ch[1].index()] = Some([a, m, c]);
        face_of[ch[2].index()] = Some([a, b, m]);
    }
    for l in t.leaves() {
        out.faces.push(Face {
            corners: face_of[l.index()].expect("every leaf has a face"),
            leaf: l,
        });
    }
    out
}

/// Diameters of the nested triangles `T̃(u₀…u_k)` along a branch, starting
/// with the root triangle.
pub fn spine_triangle_decay(
    letters: &[u8],
    law: &SplittingLaw,
    seed: Seed,
) -> Result<Vec<f64>, LabelError> {
    let mut corners = ROOT_CORNERS;
    let mut key = crate::rng::ROOT_KEY;
    let mut out = Vec::with_capacity(letters.len() + 1);
    out.push(triangle_diameter(&corners_cartesian(&corners)));
    for &l in letters {
        let p = law.draw_at(seed, key)?;
        corners = crate::labeling::child_corners(&corners, &p, l);
        key = crate::rng::child_key(key, l);
        out.push(triangle_diameter(&corners_cartesian(&corners)));
    }
    Ok(out)
}

/// Depth-`R` approximation of the limit drawing.
#[derive(Clone, Debug)]
pub struct LimitDrawing {
    pub sample: LimitTreeSample,
    pub assembled: AssembledLimitTree,
    pub labelled: CoordLabelledTree,
    pub drawing: CompactTriangulation,
    /// Diameter of `T̃` at each spine node, root first.
    pub spine_diameters: Vec<f64>,
}

impl LimitDrawing {
    /// Off-spine subtrees cut short by the node budget.
    pub fn overflowed(&self) -> usize {
        self.assembled.overflowed
    }
}

/// Embed the depth-`R` local-limit tree. Splitting triplets are keyed by
/// node address, so samples at depths `R` and `R + k` with one seed agree on
/// everything drawn at depth `R`.
pub fn sample_limit_drawing(
    depth: usize,
    law: &SplittingLaw,
    node_cap: usize,
    seed: Seed,
) -> Result<LimitDrawing, GeomError> {
    let sample = sample_limit_tree(depth, node_cap, seed);
    let assembled = sample.assemble();
    let labelled = phi(&attach_splits(&assembled.tree, law, seed)?);
    let drawing = psi(&labelled)?;
    let spine_diameters = assembled
        .spine_nodes
        .iter()
        .map(|&u| triangle_diameter(&corners_cartesian(labelled.corners(u))))
        .collect();
    Ok(LimitDrawing {
        sample,
        assembled,
        labelled,
        drawing,
        spine_diameters,
    })
}

/// Splitting triplet at a node address, as drawn by [`attach_splits`].
pub fn split_at(law: &SplittingLaw, seed: Seed, word: &NodeWord) -> Result<Triplet, LabelError> {
    law.draw_at(seed, word_key(word.letters()))
}
