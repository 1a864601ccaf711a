//! Trees ↔ drawings, and the geometric bounds behind shrinking triangles.

use rand::Rng;
use rayon::prelude::*;

use super::{Budget, Check, SeedFor, VerifyError};
use crate::geometry::{
    centroid_distance, corners_cartesian, psi, psi_inductive, spine_triangle_decay, Point2,
};
use crate::labeling::{attach_splits, phi, SplittingLaw};
use crate::rng::Purpose;
use crate::sampling::TreeModel;

pub(super) fn run(budget: Budget, seed: SeedFor<'_>) -> Result<Vec<Check>, VerifyError> {
    Ok(vec![
        round_trip(budget, seed)?,
        centroid_bound(budget, seed),
        spine_decay(seed)?,
        block_decay(budget, seed)?,
    ])
}

#[derive(Default)]
struct Tally {
    count_errors: usize,
    corner_errors: usize,
    round_trip_errors: usize,
    inductive_gap: f64,
    max_n: usize,
}

fn round_trip(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "psi-phi-round-trip";
    let s = seed(name);
    let trees = budget.pick(200, 50);
    let tallies: Vec<Tally> = (0..trees as u64)
        .into_par_iter()
        .map(|k| {
            let sk = s.with_stream(k);
            let n = sk.rng(Purpose::Picks).random_range(0..=200usize);
            let model = if k % 2 == 0 { TreeModel::Uniform } else { TreeModel::Increasing };
            let law = if (k / 2) % 2 == 0 {
                SplittingLaw::Centroid
            } else {
                SplittingLaw::DirichletSym(0.5)
            };
            let t = model.sample(n, sk);
            let ct = phi(&attach_splits(&t, &law, sk)?);
            let m = psi(&ct)?;
            let mut tally = Tally {
                max_n: n,
                ..Tally::default()
            };
            if m.faces.len() != 2 * n + 1 || m.vertices.len() != n || m.segments.len() != 3 + 3 * n {
                tally.count_errors += 1;
            }
            tally.corner_errors += m
                .faces
                .iter()
                .filter(|f| f.corners != corners_cartesian(ct.corners(f.leaf)))
                .count();
            if phi(&ct.drop_coordinates()) != ct {
                tally.round_trip_errors += 1;
            }
            let alt = psi_inductive(&ct);
            tally.inductive_gap = m
                .vertices
                .iter()
                .zip(&alt.vertices)
                .map(|(a, b)| a.dist(*b))
                .fold(0.0, f64::max);
            Ok(tally)
        })
        .collect::<Result<_, VerifyError>>()?;
    let sum = |f: fn(&Tally) -> usize| tallies.iter().map(f).sum::<usize>();
    let (c, k, r) = (
        sum(|t| t.count_errors),
        sum(|t| t.corner_errors),
        sum(|t| t.round_trip_errors),
    );
    let gap = tallies.iter().map(|t| t.inductive_gap).fold(0.0, f64::max);
    Ok(Check::criterion(name, "1", s)
        .rule("2n+1 faces, n vertices, 3+3n segments; leaf corners equal face corners exactly; phi(drop(C)) = C exactly")
        .samples(trees)
        .value("count_errors", c as f64)
        .value("corner_errors", k as f64)
        .value("round_trip_errors", r as f64)
        .value("max_n", tallies.iter().map(|t| t.max_n).max().unwrap_or(0) as f64)
        .value("inductive_vertex_gap", gap)
        .pass(c == 0 && k == 0 && r == 0 && gap < 1e-12))
}

fn centroid_bound(budget: Budget, seed: SeedFor<'_>) -> Check {
    let name = "centroid-distance-bound";
    let s = seed(name);
    let count = budget.pick(10_000, 10_000);
    let mut rng = s.rng(Purpose::Points);
    let (mut violations, mut formula_gap) = (0usize, 0.0f64);
    for _ in 0..count {
        let v: [Point2; 3] = std::array::from_fn(|_| Point2::new(rng.random(), rng.random()));
        let g = Point2::new((v[0].x + v[1].x + v[2].x) / 3.0, (v[0].y + v[1].y + v[2].y) / 3.0);
        let side = |i: usize, j: usize| v[i].dist(v[j]);
        let longest = side(0, 1).max(side(1, 2)).max(side(0, 2));
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let d = centroid_distance(side(i, j), side(j, k), side(i, k));
            formula_gap = formula_gap.max((d - v[i].dist(g)).abs());
            if d > 2.0 / 3.0 * longest {
                violations += 1;
            }
        }
    }
    Check::criterion(name, "8", s)
        .rule("(1/3)√(2a²+2c²−b²) ≤ (2/3)·max side on every triangle")
        .samples(count)
        .value("violations", violations as f64)
        .value("formula_gap", formula_gap)
        .pass(violations == 0 && formula_gap < 1e-12)
}

fn spine_decay(seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "spine-decay-123";
    let s = seed(name);
    let blocks = 30;
    let letters: Vec<u8> = (0..3 * blocks).map(|i| (i % 3) as u8 + 1).collect();
    let d = spine_triangle_decay(&letters, &SplittingLaw::Centroid, s)?;
    let worst = (0..=blocks)
        .map(|k| d[3 * k] / (2f64 / 3.0).powi(k as i32))
        .fold(0.0, f64::max);
    Ok(Check::criterion(name, "8", s)
        .rule("centroid law, letters 1,2,3 repeated: diam after 3k steps ≤ (2/3)^k")
        .samples(blocks)
        .estimate(worst, None)
        .value("diam_3", d[3])
        .value("diam_30", d[30])
        .pass(worst <= 1.0))
}

/// Random branches: after the `l`-th block containing every letter, the
/// diameter is at most `(2/3)^l`.
fn block_decay(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "spine-decay-random-branches";
    let s = seed(name);
    let branches = budget.pick(2000, 200);
    let ratios: Vec<f64> = (0..branches as u64)
        .into_par_iter()
        .map(|b| {
            let sb = s.with_stream(b);
            let mut rng = sb.rng(Purpose::Spine);
            let letters: Vec<u8> = (0..60).map(|_| rng.random_range(1..=3u8)).collect();
            let d = spine_triangle_decay(&letters, &SplittingLaw::Centroid, sb)?;
            let (mut seen, mut l, mut worst) = ([false; 3], 0i32, 0.0f64);
            for (i, &x) in letters.iter().enumerate() {
                seen[x as usize - 1] = true;
                if seen.iter().all(|&v| v) {
                    l += 1;
                    seen = [false; 3];
                    worst = worst.max(d[i + 1] / (2f64 / 3.0).powi(l));
                }
            }
            Ok(worst)
        })
        .collect::<Result<_, VerifyError>>()?;
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    Ok(Check::property(name, s)
        .rule("centroid law: diam after the l-th complete block ≤ (2/3)^l")
        .samples(branches)
        .estimate(worst, None)
        .pass(worst <= 1.0))
}
