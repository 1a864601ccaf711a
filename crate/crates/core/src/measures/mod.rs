//! Occupation measures of drawings and the limit laws of the vertex cloud.

mod boxcount;
mod limit;

pub use boxcount::{box_counting, BoxCount};
pub use limit::{
    coupled_cell_masses, is_covering_family, limit_measure, CoupledCell, LimitCell, LimitMeasure,
    LimitMeasureApprox, MAX_LIMIT_DEPTH, MAX_MATERIALIZED_DEPTH,
};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    corners_cartesian, cross, to_barycentric, to_cartesian, triangle_diameter, CompactTriangulation,
    GeomError, Point2, SQRT3,
};
use crate::labeling::{
    attach_splits, child_corners, combine, phi, vertex_coordinates, Bary, CoordLabelledTree, Corners,
    LabelError,
    SplittingLaw, Triplet, ROOT_CORNERS,
};
use crate::rng::{child_key, Purpose, Seed, ROOT_KEY};
use crate::sampling::{dirichlet_sym, TreeModel};
use crate::stats::{mean_se, quantile, EnergyResult, EnergyTest};
use crate::tree::{NodeId, TernaryTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("the drawing has no inserted vertex")]
    EmptyVertexSet,
    #[error("rows still {gap:e} apart after {steps} steps")]
    NoConvergence { steps: usize, gap: f64 },
    #[error("box counting needs at least 4 distinct scales, got {0}")]
    InsufficientScales(usize),
    #[error("depth {depth} exceeds the limit {limit}")]
    DepthTooLarge { depth: usize, limit: usize },
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Uniform probability on a finite point set.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationMeasure {
    pub points: Vec<Point2>,
}

impl OccupationMeasure {
    pub fn from_points(points: Vec<Point2>) -> Result<Self, MeasureError> {
        if points.is_empty() {
            return Err(MeasureError::EmptyVertexSet);
        }
        Ok(OccupationMeasure { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.points.len() as f64 / self.n() as f64
    }

    /// Mass of the open triangle `t`. Points on its edges or corners are
    /// not counted.
    pub fn interior_mass(&self, t: &[Point2; 3]) -> f64 {
        let s = cross(t[0], t[1], t[2]).signum();
        let inside = self
            .points
            .iter()
            .filter(|&&p| (0..3).all(|i| s * cross(t[i], t[(i + 1) % 3], p) > 0.0))
            .count();
        inside as f64 / self.n() as f64
    }
}

/// `μ(m)`: weight `1/n` on each inserted vertex.
pub fn occupation_measure(m: &CompactTriangulation) -> Result<OccupationMeasure, MeasureError> {
    OccupationMeasure::from_points(m.vertices.clone())
}

/// `⟨f, μ⟩`.
pub fn integrate<F: Fn(Point2) -> f64>(f: F, mu: &OccupationMeasure) -> f64 {
    mu.points.iter().map(|&p| f(p)).sum::<f64>() / mu.n() as f64
}

/// Counts over the `k²` congruent sub-triangles obtained by cutting each
/// side of `T̃` into `k` pieces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridHistogram {
    pub k: usize,
    pub counts: Vec<u64>,
}

impl GridHistogram {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "resolution must be positive");
        GridHistogram {
            k,
            counts: vec![0; k * k],
        }
    }

    pub fn from_points<'a>(k: usize, points: impl IntoIterator<Item = &'a Point2>) -> Self {
        let mut h = GridHistogram::new(k);
        for &p in points {
            h.add(p);
        }
        h
    }

    /// Upward cell `(i, j)` with `i + j ≤ k−1` has index `i·k + j`; the
    /// downward cell `(i, j)` with `i + j ≤ k−2` takes the unused index
    /// `(k−1−i)·k + (k−1−j)`. Points outside `T̃` go to the nearest cell.
    pub fn cell_of(&self, p: Point2) -> usize {
        let k = self.k;
        let l = to_barycentric(p).0;
        let (b, c) = ((l[1] * k as f64).max(0.0), (l[2] * k as f64).max(0.0));
        let mut i = (b.floor() as usize).min(k - 1);
        let mut j = (c.floor() as usize).min(k - 1);
        while i + j > k - 1 {
            if i >= j {
                i -= 1;
            } else {
                j -= 1;
            }
        }
        let up = i + j == k - 1 || (b - i as f64) + (c - j as f64) < 1.0;
        if up {
            i * k + j
        } else {
            (k - 1 - i) * k + (k - 1 - j)
        }
    }

    pub fn add(&mut self, p: Point2) {
        let c = self.cell_of(p);
        self.counts[c] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn masses(&self) -> Vec<f64> {
        let t = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// Cell probabilities of the uniform law on `T̃`.
    pub fn uniform_probs(&self) -> Vec<f64> {
        vec![1.0 / (self.k * self.k) as f64; self.k * self.k]
    }
}

/// Running product `S_n = M_n ⋯ M_1` of splitting matrices, stored by rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixChain {
    pub rows: Corners,
    pub steps: usize,
}

impl Default for MatrixChain {
    fn default() -> Self {
        MatrixChain {
            rows: ROOT_CORNERS,
            steps: 0,
        }
    }
}

impl MatrixChain {
    /// Left-multiply by `M⁽ⁱ⁾` built from `p`.
    pub fn step(&mut self, i: u8, p: &Triplet) {
        self.rows[i as usize - 1] = combine(&self.rows, p);
        self.steps += 1;
    }

    /// Largest sup-norm distance between two rows.
    pub fn gap(&self) -> f64 {
        let r = &self.rows;
        let d = |a: &Bary, b: &Bary| (0..3).map(|j| (a.0[j] - b.0[j]).abs()).fold(0.0, f64::max);
        d(&r[0], &r[1]).max(d(&r[1], &r[2])).max(d(&r[0], &r[2]))
    }

    /// Diameter of the triangle spanned by the rows.
    pub fn diameter(&self) -> f64 {
        triangle_diameter(&corners_cartesian(&self.rows))
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// A draw of the limit point `U_∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitPoint {
    pub bary: Bary,
    pub point: Point2,
    pub steps: usize,
}

pub const LIMIT_TOL: f64 = 1e-9;
pub const LIMIT_MAX_STEPS: usize = 10_000;

/// Multiply i.i.d. splitting matrices until the rows agree within `tol`.
pub fn limit_point_sample(
    law: &SplittingLaw,
    tol: f64,
    max_steps: usize,
    seed: Seed,
) -> Result<LimitPoint, MeasureError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut rng = seed.rng(Purpose::Points);
    let mut chain = MatrixChain::default();
    while chain.gap() > tol {
        if chain.steps >= max_steps {
            return Err(MeasureError::NoConvergence {
                steps: chain.steps,
                gap: chain.gap(),
            });
        }
        let i = rng.random_range(1..=3u8);
        let p = law.draw(&mut rng)?;
        chain.step(i, &p);
    }
    let bary = combine(&chain.rows, &[1.0 / 3.0; 3]);
    Ok(LimitPoint {
        bary,
        point: to_cartesian(bary),
        steps: chain.steps,
    })
}

/// `count` independent limit points; draw `r` uses stream `r`.
pub fn limit_point_samples(
    law: &SplittingLaw,
    count: usize,
    seed: Seed,
) -> Result<Vec<LimitPoint>, MeasureError> {
    (0..count as u64)
        .into_par_iter()
        .map(|r| limit_point_sample(law, LIMIT_TOL, LIMIT_MAX_STEPS, seed.with_stream(r)))
        .collect()
}

/// Row vector times `M⁽ⁱ⁾`: `(xM)_j = x_i p_j + x_j [j ≠ i]`.
pub fn push_forward(x: &Bary, i: u8, p: &Triplet) -> Bary {
    let i = i as usize - 1;
    let mut out = [0.0; 3];
    for (j, o) in out.iter_mut().enumerate() {
        *o = x.0[i] * p[j] + if j == i { 0.0 } else { x.0[j] };
    }
    Bary::normalized(out)
}

/// Energy test between `X` and `X'·M` for independent limit points `X`, `X'`
/// and a fresh splitting matrix `M`.
pub fn fixed_point_test(
    law: &SplittingLaw,
    samples: usize,
    seed: Seed,
) -> Result<EnergyResult, MeasureError> {
    let pts = limit_point_samples(law, 2 * samples, seed)?;
    let moved: Vec<[f64; 2]> = pts[samples..]
        .par_iter()
        .enumerate()
        .map(|(r, x)| {
            let mut rng = seed.with_stream((samples + r) as u64).rng(Purpose::Picks);
            let i = rng.random_range(1..=3u8);
            let p = law.draw(&mut rng)?;
            let q = to_cartesian(push_forward(&x.bary, i, &p));
            Ok([q.x, q.y])
        })
        .collect::<Result<_, MeasureError>>()?;
    let fixed: Vec<[f64; 2]> = pts[..samples].iter().map(|x| [x.point.x, x.point.y]).collect();
    Ok(EnergyTest::default().run(&fixed, &moved, seed.derive("permutations")))
}

/// Monte Carlo check of the second-moment identity for `X ↦ XM`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContractionReport {
    pub samples: usize,
    /// `E|XM|²`.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `m₂(E|P|² + 2/3) + (4/3)m₁₁`, the printed right-hand side.
    pub rhs: f64,
    pub rhs_se: f64,
    pub z: f64,
    /// `m₂(E|P|² + 2) + (4/3)m₁₁`, from expanding `|XM⁽¹⁾|²` directly.
    pub rhs_expanded: f64,
    pub rhs_expanded_se: f64,
    pub z_expanded: f64,
    pub m2: f64,
    pub m11: f64,
    /// `a = 3E(P₁²)`.
    pub a: f64,
    /// `(a + 2)/3`.
    pub factor: f64,
}

impl ContractionReport {
    pub fn identity_holds(&self) -> bool {
        self.z.abs() <= 3.0
    }

    pub fn expanded_identity_holds(&self) -> bool {
        self.z_expanded.abs() <= 3.0
    }
}

/// Compare both sides of the identity with `X ~ Dir(source_alpha)` (a
/// symmetric law on V₂). The left side and the right side are estimated from
/// disjoint halves of the streams.
pub fn l2_contraction_check(
    law: &SplittingLaw,
    source_alpha: f64,
    samples: usize,
    seed: Seed,
) -> Result<ContractionReport, MeasureError> {
    let draw = |r: usize| -> Result<(Triplet, u8, Triplet), MeasureError> {
        let mut rng = seed.with_stream(r as u64).rng(Purpose::Points);
        let x = dirichlet_sym(source_alpha, &mut rng);
        let i = rng.random_range(1..=3u8);
        let p = law.draw(&mut rng)?;
        Ok((x, i, p))
    };
    let norm2 = |v: &Triplet| v.iter().map(|x| x * x).sum::<f64>();

    let lhs: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let (x, i, p) = draw(r)?;
            Ok(norm2(&push_forward(&Bary(x), i, &p).0))
        })
        .collect::<Result<_, MeasureError>>()?;
    let parts: Vec<[f64; 5]> = (samples..2 * samples)
        .into_par_iter()
        .map(|r| {
            let (x, _, p) = draw(r)?;
            let m2 = norm2(&x) / 3.0;
            let m11 = (x[0] * x[1] + x[0] * x[2] + x[1] * x[2]) / 3.0;
            let pp = norm2(&p);
            Ok([
                m2,
                m11,
                pp,
                m2 * (pp + 2.0 / 3.0) + 4.0 / 3.0 * m11,
                m2 * (pp + 2.0) + 4.0 / 3.0 * m11,
            ])
        })
        .collect::<Result<_, MeasureError>>()?;
    let col = |c: usize| parts.iter().map(|v| v[c]).collect::<Vec<f64>>();
    let (l, lse) = mean_se(&lhs);
    let (r, rse) = mean_se(&col(3));
    let (re, rese) = mean_se(&col(4));
    let a = match law.second_moment() {
        Some(m) => 3.0 * m,
        None => mean_se(&col(2)).0,
    };
    Ok(ContractionReport {
        samples,
        lhs: l,
        lhs_se: lse,
        rhs: r,
        rhs_se: rse,
        z: (l - r) / lse.hypot(rse),
        rhs_expanded: re,
        rhs_expanded_se: rese,
        z_expanded: (l - re) / lse.hypot(rese),
        m2: mean_se(&col(0)).0,
        m11: mean_se(&col(1)).0,
        a,
        factor: (a + 2.0) / 3.0,
    })
}

/// Barycentric position of the vertex of the internal node `u`, computed
/// along its branch only. Agrees with [`vertex_coordinates`] on the
/// labelled tree built with the same seed.
pub fn branch_vertex(
    t: &TernaryTree,
    u: NodeId,
    law: &SplittingLaw,
    seed: Seed,
) -> Result<Bary, LabelError> {
    let (mut corners, mut key) = (ROOT_CORNERS, ROOT_KEY);
    for &l in t.word(u).letters() {
        let p = law.draw_at(seed, key)?;
        corners = child_corners(&corners, &p, l);
        key = child_key(key, l);
    }
    Ok(combine(&corners, &law.draw_at(seed, key)?))
}

/// Distances between two vertices of independent model drawings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceSample {
    pub n: usize,
    pub distances: Vec<f64>,
}

impl DistanceSample {
    pub fn median(&self) -> f64 {
        quantile(&self.distances, 0.5)
    }

    pub fn quantile(&self, q: f64) -> f64 {
        quantile(&self.distances, q)
    }

    /// Empirical `P(D > eta)`.
    pub fn tail(&self, eta: f64) -> f64 {
        self.distances.iter().filter(|&&d| d > eta).count() as f64 / self.distances.len() as f64
    }
}

/// Per replica, the distance between two distinct uniformly chosen inserted
/// vertices of a size-`n` drawing.
pub fn two_vertex_distance(
    model: TreeModel,
    n: usize,
    replicas: usize,
    law: &SplittingLaw,
    seed: Seed,
) -> Result<DistanceSample, MeasureError> {
    assert!(n >= 2, "need two vertices");
    let distances = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let s = seed.with_stream(r);
            let t = model.sample(n, s);
            let internal: Vec<NodeId> = t.internal_nodes().collect();
            let mut rng = s.rng(Purpose::Picks);
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let pa = to_cartesian(branch_vertex(&t, internal[a], law, s)?);
            let pb = to_cartesian(branch_vertex(&t, internal[b], law, s)?);
            Ok(pa.dist(pb))
        })
        .collect::<Result<_, MeasureError>>()?;
    Ok(DistanceSample { n, distances })
}

/// Continuous test functions on `T̃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TestFunction {
    Constant(f64),
    X,
    Y,
    /// `x·y`.
    Product,
    /// `(1 − |p − c|²/r²)₊²`.
    Bump { cx: f64, cy: f64, r: f64 },
}

impl TestFunction {
    pub fn eval(&self, p: Point2) -> f64 {
        match *self {
            TestFunction::Constant(c) => c,
            TestFunction::X => p.x,
            TestFunction::Y => p.y,
            TestFunction::Product => p.x * p.y,
            TestFunction::Bump { cx, cy, r } => {
                let s = ((p.x - cx).powi(2) + (p.y - cy).powi(2)) / (r * r);
                (1.0 - s).max(0.0).powi(2)
            }
        }
    }

    /// `‖f‖∞` over `T̃`.
    pub fn sup_norm(&self) -> f64 {
        match *self {
            TestFunction::Constant(c) => c.abs(),
            TestFunction::X => 1.0,
            TestFunction::Y => SQRT3 / 2.0,
            TestFunction::Product => SQRT3 / 4.0,
            TestFunction::Bump { .. } => 1.0,
        }
    }

    /// A Lipschitz constant on `T̃`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            TestFunction::Constant(_) => 0.0,
            TestFunction::X | TestFunction::Y | TestFunction::Product => 1.0,
            TestFunction::Bump { r, .. } => 8.0 / (3.0 * SQRT3 * r),
        }
    }
}

/// Estimate of `Var(⟨f, μₙ⟩ − f(Uₙ))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub replicas: usize,
    pub variance: f64,
    pub std_error: f64,
}

/// Given a drawing, `⟨f, μₙ⟩ − f(Uₙ)` has mean 0 and conditional second
/// moment equal to the variance of `f` over the vertices, so the estimate is
/// the replica mean of that within-drawing variance.
pub fn occupation_concentration(
    model: TreeModel,
    n: usize,
    f: TestFunction,
    law: &SplittingLaw,
    replicas: usize,
    seed: Seed,
) -> Result<ConcentrationReport, MeasureError> {
    if n == 0 {
        return Err(MeasureError::EmptyVertexSet);
    }
    let vars: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let s = seed.with_stream(r);
            let ct = phi(&attach_splits(&model.sample(n, s), law, s)?);
            let (mut mean, mut m2, mut k) = (0.0f64, 0.0f64, 0.0f64);
            for u in ct.tree.internal_nodes() {
                let v = f.eval(to_cartesian(vertex_coordinates(&ct, u)?));
                k += 1.0;
                let d = v - mean;
                mean += d / k;
                m2 += d * (v - mean);
            }
            Ok(m2 / k)
        })
        .collect::<Result<_, MeasureError>>()?;
    let (variance, std_error) = mean_se(&vars);
    Ok(ConcentrationReport {
        n,
        replicas,
        variance,
        std_error,
    })
}

/// Smallest value over a grid of `η` of `‖f‖∞(Lη + 2‖f‖∞ P̂(D > η))`,
/// with `P̂` the empirical tail of `d` and `ε = Lη`.
pub fn concentration_bound(f: &TestFunction, d: &DistanceSample) -> (f64, f64) {
    let s = f.sup_norm();
    let l = f.lipschitz();
    (0..=400)
        .map(|k| {
            let eta = k as f64 / 400.0;
            (s * (l * eta + 2.0 * s * d.tail(eta)), eta)
        })
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
}

/// End point of a greedy max-mass descent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyTriangle {
    pub word: String,
    pub depth: usize,
    pub corners: [Point2; 3],
    pub diameter: f64,
    /// Internal nodes of the subtree, divided by `n`.
    pub tree_mass: f64,
}

/// From the root, step into the child whose subtree holds the most internal
/// nodes (first letter on ties) until the triangle's diameter is at most
/// `max_diameter` or a leaf is reached.
pub fn greedy_descent(ct: &CoordLabelledTree, max_diameter: f64) -> Result<GreedyTriangle, MeasureError> {
    let t = &ct.tree;
    let n = t.n_internal();
    if n == 0 {
        return Err(MeasureError::EmptyVertexSet);
    }
    let sizes = t.subtree_internal_counts();
    let diameter = |u: NodeId| triangle_diameter(&corners_cartesian(ct.corners(u)));
    let mut u = NodeId::ROOT;
    while diameter(u) > max_diameter {
        let Some(ch) = t.children(u) else { break };
        u = ch
            .into_iter()
            .fold(ch[0], |b, v| if sizes[v.index()] > sizes[b.index()] { v } else { b });
    }
    let corners = corners_cartesian(ct.corners(u));
    Ok(GreedyTriangle {
        word: t.word(u).to_string(),
        depth: t.depth(u),
        corners,
        diameter: diameter(u),
        tree_mass: f64::from(sizes[u.index()]) / n as f64,
    })
}

/// `(𝒫₁, 𝒫₂, 𝒫₃)`: internal nodes of each root subtree divided by `n`.
pub fn subtree_proportions(t: &TernaryTree) -> [f64; 3] {
    let n = t.n_internal();
    assert!(n >= 1, "tree has no internal node");
    let sizes = t.subtree_internal_counts();
    let ch = t.children(NodeId::ROOT).expect("root is internal");
    ch.map(|c| sizes[c.index()] as f64 / n as f64)
}

/// `Φ(θ) = 3E(𝒫₁^θ) = 3/(1 + 2θ)` for the Dir₂(½) masses.
pub fn kingman_phi(theta: f64) -> f64 {
    assert!(theta > 0.0, "θ must be positive");
    3.0 / (1.0 + 2.0 * theta)
}

/// Monte Carlo `E(Σᵢ 𝒫ᵢ^θ)` with its standard error.
pub fn kingman_phi_mc(theta: f64, samples: usize, seed: Seed) -> (f64, f64) {
    assert!(theta > 0.0, "θ must be positive");
    let mut rng = seed.rng(Purpose::Points);
    let v: Vec<f64> = (0..samples)
        .map(|_| dirichlet_sym(0.5, &mut rng).iter().map(|p| p.powf(theta)).sum())
        .collect();
    mean_se(&v)
}

/// Smallest `θ` with `Φ(θ) ≤ 1/(2e)`: `(6e − 1)/2`.
pub fn theta0() -> f64 {
    (6.0 * std::f64::consts::E - 1.0) / 2.0
}

/// `2/(3E(−log P₁))` for a splitting law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DimensionReport {
    pub value: f64,
    pub std_error: f64,
    pub exact: bool,
    pub neg_log_mean: f64,
    /// `2/(3 log 3)`, attained by the centroid law.
    pub bound: f64,
    pub closed_form: Option<f64>,
}

pub fn dimension_bound() -> f64 {
    2.0 / (3.0 * 3f64.ln())
}

/// Exact for the centroid law, Monte Carlo otherwise.
pub fn hausdorff_dim_formula(
    law: &SplittingLaw,
    samples: usize,
    seed: Seed,
) -> Result<DimensionReport, MeasureError> {
    let closed_form = law.neg_log_mean().map(|m| 2.0 / (3.0 * m));
    if let SplittingLaw::Centroid = law {
        return Ok(DimensionReport {
            value: dimension_bound(),
            std_error: 0.0,
            exact: true,
            neg_log_mean: 3f64.ln(),
            bound: dimension_bound(),
            closed_form,
        });
    }
    let mut rng = seed.rng(Purpose::Points);
    let mut v = Vec::with_capacity(samples);
    for _ in 0..samples {
        let p = law.draw(&mut rng)?;
        v.push(-(p[0].ln() + p[1].ln() + p[2].ln()) / 3.0);
    }
    let (m, se) = mean_se(&v);
    Ok(DimensionReport {
        value: 2.0 / (3.0 * m),
        std_error: 2.0 / (3.0 * m * m) * se,
        exact: false,
        neg_log_mean: m,
        bound: dimension_bound(),
        closed_form,
    })
}

#[cfg(test)]
mod tests;
