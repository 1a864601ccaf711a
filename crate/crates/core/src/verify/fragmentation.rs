//! Exactness of the tree samplers at small sizes.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{Budget, Check, SeedFor, VerifyError};
use crate::oracle::{increasing_shape_law, uniform_shape_law};
use crate::rng::Seed;
use crate::sampling::{sample_fragmentation, sample_increasing, sample_uniform_ternary};
use crate::stats::{chi_square_gof, chi_square_two_sample};
use crate::tree::{ShapeKey, TernaryTree};

const GATE: f64 = 0.001;

pub(super) fn run(budget: Budget, seed: SeedFor<'_>) -> Result<Vec<Check>, VerifyError> {
    let samples = budget.pick(100_000, 20_000);
    let mut out = Vec::new();
    for n in [2, 3, 4] {
        out.push(against_oracle(
            &format!("uniform-sampler-n{n}"),
            uniform_shape_law(n).expect("small n"),
            samples,
            seed,
            |s| sample_uniform_ternary(n, s),
        ));
    }
    for n in [2, 3, 4] {
        out.push(against_oracle(
            &format!("increasing-sampler-n{n}"),
            increasing_shape_law(n).expect("small n"),
            samples,
            seed,
            |s| sample_increasing(n, s),
        ));
    }
    for n in [2, 3] {
        out.push(frag_vs_increasing(n, samples, seed));
    }
    out.push(partition(budget, seed));
    Ok(out)
}

fn counts(
    index: &BTreeMap<ShapeKey, usize>,
    samples: usize,
    s: Seed,
    draw: impl Fn(Seed) -> TernaryTree + Sync,
) -> Vec<u64> {
    let hits: Vec<usize> = (0..samples as u64)
        .into_par_iter()
        .map(|r| index[&draw(s.with_stream(r)).shape_key()])
        .collect();
    let mut c = vec![0u64; index.len()];
    for h in hits {
        c[h] += 1;
    }
    c
}

fn against_oracle(
    name: &str,
    law: BTreeMap<ShapeKey, f64>,
    samples: usize,
    seed: SeedFor<'_>,
    draw: impl Fn(Seed) -> TernaryTree + Sync,
) -> Check {
    let s = seed(name);
    let index: BTreeMap<ShapeKey, usize> = law.keys().cloned().zip(0..).collect();
    let probs: Vec<f64> = law.values().copied().collect();
    let r = chi_square_gof(&counts(&index, samples, s, draw), &probs);
    Check::criterion(name, "2", s)
        .rule("chi-square goodness of fit against the exact shape law, p > 0.001")
        .samples(samples)
        .estimate(r.statistic, None)
        .p(r.p_value)
        .value("dof", r.dof)
        .pass(r.p_value > GATE)
}

fn frag_vs_increasing(n: usize, samples: usize, seed: SeedFor<'_>) -> Check {
    let name = format!("fragmentation-vs-increasing-n{n}");
    let s = seed(&name);
    let law = increasing_shape_law(n).expect("small n");
    let index: BTreeMap<ShapeKey, usize> = law.keys().cloned().zip(0..).collect();
    let a = counts(&index, samples, s.derive("fragmentation"), |x| sample_fragmentation(n, x).tree);
    let b = counts(&index, samples, s.derive("increasing"), |x| sample_increasing(n, x));
    let r = chi_square_two_sample(&a, &b);
    Check::criterion(&name, "2", s)
        .rule("two-sample chi-square between fragmentation shapes and increasing trees, p > 0.001")
        .samples(2 * samples)
        .estimate(r.statistic, None)
        .p(r.p_value)
        .value("dof", r.dof)
        .pass(r.p_value > GATE)
}

fn partition(budget: Budget, seed: SeedFor<'_>) -> Check {
    let name = "fragmentation-leaves-partition";
    let s = seed(name);
    let trees = budget.pick(200, 50);
    let bad = (0..trees as u64)
        .into_par_iter()
        .filter(|&r| {
            let f = sample_fragmentation(500, s.with_stream(r));
            !f.leaves_partition_unit() || f.leaf_width_sum() != crate::sampling::FIXED_ONE
        })
        .count();
    Check::property(name, s)
        .rule("leaf intervals of F(500) tile [0,1) exactly")
        .samples(trees)
        .value("failures", bad as f64)
        .pass(bad == 0)
}
