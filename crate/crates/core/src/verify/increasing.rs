//! Increasing model: the fragmentation coupling and its limit measure.

use rayon::prelude::*;

use super::{Budget, Check, SeedFor, VerifyError};
use crate::labeling::SplittingLaw;
use crate::measures::{
    coupled_cell_masses, is_covering_family, kingman_phi, kingman_phi_mc, subtree_proportions,
    theta0, two_vertex_distance, LimitMeasure,
};
use crate::sampling::{sample_uniform_ternary, TreeModel, FIXED_ONE};
use crate::stats::{ks_two_sample, mean_se};
use crate::tree::NodeWord;

pub(super) fn run(budget: Budget, seed: SeedFor<'_>) -> Result<Vec<Check>, VerifyError> {
    let mut out = vec![covering(budget, seed)?];
    for k in 1..=6 {
        out.push(fixed_address_mass(k, budget, seed));
    }
    out.extend(coupled_cells(budget, seed)?);
    out.extend(proportions(budget, seed));
    out.push(model_separation(budget, seed));
    out.push(max_mass_decay(budget, seed)?);
    out.push(two_vertex_stable(budget, seed)?);
    out.push(kingman(budget, seed));
    Ok(out)
}

fn covering(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "covering-identity";
    let s = seed(name);
    let measures = budget.pick(50, 10);
    let failures: Vec<usize> = (0..measures as u64)
        .into_par_iter()
        .map(|r| {
            let sr = s.with_stream(r);
            let lm = LimitMeasure::new(SplittingLaw::DirichletSym(0.5), sr);
            let mut bad = 0;
            for d in 0..=8 {
                if lm.level(d)?.total_width() != FIXED_ONE {
                    bad += 1;
                }
            }
            // Mixed-depth families: the leaves of finite trees.
            for m in [1, 5, 40, 300] {
                let t = sample_uniform_ternary(m, sr.derive(&format!("family{m}")));
                let fam: Vec<NodeWord> = t.leaves().map(|u| t.word(u)).collect();
                if !is_covering_family(&fam) || lm.family_width(&fam) != FIXED_ONE {
                    bad += 1;
                }
            }
            Ok(bad)
        })
        .collect::<Result<_, VerifyError>>()?;
    let bad: usize = failures.iter().sum();
    Ok(Check::criterion(name, "6", s)
        .rule("cell masses of every level 0..=8 and of leaf families of finite trees sum to exactly 1")
        .samples(measures)
        .value("failures", bad as f64)
        .pass(bad == 0))
}

fn fixed_address_mass(k: usize, budget: Budget, seed: SeedFor<'_>) -> Check {
    let name = format!("cell-mass-mean-depth{k}");
    let s = seed(&name);
    let samples = budget.pick(20_000, 4000);
    let letters: Vec<u8> = (0..k).map(|i| (i % 3) as u8 + 1).collect();
    let word = NodeWord::from_letters(&letters).expect("letters in 1..=3");
    let masses: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|r| {
            let lm = LimitMeasure::new(SplittingLaw::Centroid, s.with_stream(r));
            crate::sampling::Interval {
                lo: 0,
                hi: lm.cell_width(&word),
            }
            .length()
        })
        .collect();
    let (m, se) = mean_se(&masses);
    let target = 3f64.powi(-(k as i32));
    Check::criterion(&name, "6", s)
        .rule(format!("mean mass of cell {word} within 3 SE of 3^-{k}"))
        .samples(samples)
        .estimate(m, Some(se))
        .value("target", target)
        .value("z", (m - target) / se)
        .pass((m - target).abs() <= 3.0 * se)
}

/// The 5% rule, and the same cells judged against Binomial noise: the
/// count in a cell of mass `m` has standard deviation about `√(n m(1−m))`.
fn coupled_cells(budget: Budget, seed: SeedFor<'_>) -> Result<[Check; 2], VerifyError> {
    let name = "coupled-cell-masses-depth2";
    let s = seed(name);
    let n = budget.pick(100_000, 20_000);
    let cells = coupled_cell_masses(n, 2, &SplittingLaw::Centroid, s)?;
    let worst = cells.iter().map(|c| c.relative_error()).fold(0.0, f64::max);
    let tree_worst = cells
        .iter()
        .map(|c| (c.tree_mass - c.limit_mass).abs() / c.limit_mass)
        .fold(0.0, f64::max);
    let min_mass = cells.iter().map(|c| c.limit_mass).fold(1.0, f64::min);
    let nf = n as f64;
    let z = |c: &crate::measures::CoupledCell| {
        (c.occupation_mass - c.limit_mass) * nf / (nf * c.limit_mass * (1.0 - c.limit_mass)).sqrt()
    };
    let worst_z = cells.iter().map(|c| z(c).abs()).fold(0.0, f64::max);
    let mut rel = Check::criterion(name, "6", s)
        .rule("every depth-2 cell: |mu_n(cell) - |I^u|| / |I^u| < 5%")
        .samples(n)
        .estimate(worst, None)
        .value("tree_count_worst", tree_worst)
        .value("smallest_cell", min_mass);
    let mut noise = Check::property("coupled-cell-masses-binomial", s)
        .rule("every depth-2 cell: |n mu_n(cell) - n|I^u|| <= 4 sqrt(n|I^u|(1-|I^u|))")
        .samples(n)
        .estimate(worst_z, None);
    for cell in &cells {
        rel = rel.value(&format!("relative_error_{}", cell.word), cell.relative_error());
        noise = noise.value(&format!("z_{}", cell.word), z(cell));
    }
    Ok([rel.pass(worst < 0.05), noise.pass(worst_z <= 4.0)])
}

fn proportions(budget: Budget, seed: SeedFor<'_>) -> [Check; 2] {
    let name = "subtree-proportions-moments";
    let s = seed(name);
    let trees = budget.pick(10_000, 2000);
    let p1: Vec<f64> = (0..trees as u64)
        .into_par_iter()
        .map(|r| subtree_proportions(&TreeModel::Increasing.sample(1000, s.with_stream(r)))[0])
        .collect();
    let (m, se) = mean_se(&p1);
    let sq: Vec<f64> = p1.iter().map(|x| x * x).collect();
    let (m2, se2) = mean_se(&sq);
    [
        Check::property("subtree-proportions-mean", s)
            .rule("increasing trees, n=1000: E P1 within 0.01 of 1/3")
            .samples(trees)
            .estimate(m, Some(se))
            .pass((m - 1.0 / 3.0).abs() <= 0.01),
        Check::property("subtree-proportions-second-moment", s)
            .rule("increasing trees, n=1000: E P1^2 within 0.01 of 1/5")
            .samples(trees)
            .estimate(m2, Some(se2))
            .pass((m2 - 0.2).abs() <= 0.01),
    ]
}

fn model_separation(budget: Budget, seed: SeedFor<'_>) -> Check {
    let name = "subtree-proportions-model-separation";
    let s = seed(name);
    let trees = budget.pick(2000, 500);
    let draw = |model: TreeModel, label: &str| -> Vec<f64> {
        let sm = s.derive(label);
        (0..trees as u64)
            .into_par_iter()
            .map(|r| subtree_proportions(&model.sample(1000, sm.with_stream(r)))[0])
            .collect()
    };
    let r = ks_two_sample(&draw(TreeModel::Uniform, "uniform"), &draw(TreeModel::Increasing, "increasing"));
    Check::property(name, s)
        .rule("KS test separates P1 under the uniform and increasing models, p < 0.001")
        .samples(2 * trees)
        .estimate(r.statistic, None)
        .p(r.p_value)
        .pass(r.p_value < 0.001)
}

fn max_mass_decay(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "max-cell-mass-decay";
    let s = seed(name);
    let samples = budget.pick(100, 30);
    let rows: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|r| LimitMeasure::new(SplittingLaw::Centroid, s.with_stream(r)).max_cell_mass(5, 10))
        .collect::<Result<_, _>>()?;
    let monotone = rows.iter().all(|v| v.windows(2).all(|w| w[1] <= w[0]));
    let at = |i: usize| rows.iter().map(|v| v[i]).sum::<f64>() / samples as f64;
    let (d5, d10) = (at(0), at(5));
    Ok(Check::property(name, s)
        .rule("mean largest cell mass at depth 10 below depth 5, non-increasing per sample")
        .samples(samples)
        .estimate(d10 / d5, None)
        .value("mean_max_depth5", d5)
        .value("mean_max_depth10", d10)
        .pass(monotone && d10 < d5))
}

fn two_vertex_stable(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "two-vertex-distance-increasing";
    let s = seed(name);
    let replicas = budget.pick(1000, 200);
    let law = SplittingLaw::Centroid;
    let small = two_vertex_distance(TreeModel::Increasing, 100, replicas, &law, s.derive("n100"))?;
    let large = two_vertex_distance(TreeModel::Increasing, 10_000, replicas, &law, s.derive("n10000"))?;
    let ratio = large.median() / small.median();
    Ok(Check::property(name, s)
        .rule("increasing model: medians at n=10^2 and 10^4 within a factor of 2")
        .samples(2 * replicas)
        .estimate(ratio, None)
        .value("median_n100", small.median())
        .value("median_n10000", large.median())
        .pass((0.5..=2.0).contains(&ratio)))
}

fn kingman(budget: Budget, seed: SeedFor<'_>) -> Check {
    let name = "kingman-transform";
    let s = seed(name);
    let samples = budget.pick(100_000, 20_000);
    let mut c = Check::property(name, s)
        .rule("Monte Carlo E(sum P_i^theta) within 3 SE of 3/(1+2 theta); Phi(theta0) = 1/(2e)")
        .samples(3 * samples);
    let mut ok = (kingman_phi(theta0()) - 0.5 / std::f64::consts::E).abs() < 1e-12;
    for th in [0.5, 2.0, 8.0] {
        let (m, se) = kingman_phi_mc(th, samples, s.derive(&format!("theta{th}")));
        ok &= (m - kingman_phi(th)).abs() <= 3.0 * se;
        c = c.value(&format!("z_theta{th}"), (m - kingman_phi(th)) / se);
    }
    c.value("theta0", theta0()).pass(ok)
}
