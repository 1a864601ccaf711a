//! Uniform model: shrinking distances, concentration, and the limit point.

use super::{Budget, Check, SeedFor, VerifyError};
use crate::labeling::SplittingLaw;
use crate::measures::{
    concentration_bound, fixed_point_test, l2_contraction_check, limit_point_samples,
    occupation_concentration, two_vertex_distance, GridHistogram, TestFunction,
};
use crate::sampling::TreeModel;
use crate::stats::chi_square_gof;

pub(super) fn run(budget: Budget, seed: SeedFor<'_>) -> Result<Vec<Check>, VerifyError> {
    let mut out = vec![
        two_vertex(budget, seed)?,
        concentration(budget, seed)?,
        concentration_vs_bound(budget, seed)?,
        limit_point_uniform(budget, seed)?,
    ];
    for (name, law) in [
        ("fixed-point-centroid", SplittingLaw::Centroid),
        ("fixed-point-dirichlet-0.5", SplittingLaw::DirichletSym(0.5)),
    ] {
        out.push(fixed_point(name, &law, budget, seed)?);
    }
    for (name, law) in [
        ("contraction-identity-centroid", SplittingLaw::Centroid),
        ("contraction-identity-dirichlet-0.5", SplittingLaw::DirichletSym(0.5)),
    ] {
        out.push(contraction_identity(name, &law, budget, seed)?);
    }
    out.push(contraction_factor(budget, seed)?);
    Ok(out)
}

fn two_vertex(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "two-vertex-distance-uniform";
    let s = seed(name);
    let replicas = budget.pick(1000, 200);
    let law = SplittingLaw::Centroid;
    let small = two_vertex_distance(TreeModel::Uniform, 100, replicas, &law, s.derive("n100"))?;
    let large = two_vertex_distance(TreeModel::Uniform, 10_000, replicas, &law, s.derive("n10000"))?;
    let ratio = large.median() / small.median();
    Ok(Check::criterion(name, "3", s)
        .rule("median distance at n=10^4 below half the median at n=10^2")
        .samples(2 * replicas)
        .estimate(ratio, None)
        .value("median_n100", small.median())
        .value("median_n10000", large.median())
        .pass(ratio < 0.5))
}

const CONCENTRATION_SIZES: [usize; 3] = [100, 1000, 10_000];

fn concentration(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "concentration-x-uniform";
    let s = seed(name);
    let replicas = budget.pick(400, 100);
    let mut c = Check::criterion(name, "3", s)
        .rule("Var(<x, mu_n> - x(U_n)) strictly decreasing over n = 10^2, 10^3, 10^4")
        .samples(replicas * CONCENTRATION_SIZES.len());
    let mut vars = Vec::new();
    for n in CONCENTRATION_SIZES {
        let r = occupation_concentration(
            TreeModel::Uniform,
            n,
            TestFunction::X,
            &SplittingLaw::Centroid,
            replicas,
            s.derive(&format!("n{n}")),
        )?;
        c = c
            .value(&format!("variance_n{n}"), r.variance)
            .value(&format!("std_error_n{n}"), r.std_error);
        vars.push(r.variance);
    }
    Ok(c.pass(vars.windows(2).all(|w| w[1] < w[0])))
}

/// The variance never exceeds the two-vertex tail bound evaluated on an
/// independent distance sample of the same size.
fn concentration_vs_bound(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "concentration-bound-uniform";
    let s = seed(name);
    let replicas = budget.pick(400, 100);
    let law = SplittingLaw::Centroid;
    let f = TestFunction::Bump {
        cx: 0.5,
        cy: 0.3,
        r: 0.4,
    };
    let mut c = Check::property(name, s)
        .rule("bump test function: variance + 3 SE <= inf_eta |f|(L eta + 2|f| P(D > eta))")
        .samples(2 * replicas * 2);
    let mut ok = true;
    for n in [100, 1000] {
        let r = occupation_concentration(TreeModel::Uniform, n, f, &law, replicas, s.derive(&format!("var{n}")))?;
        let d = two_vertex_distance(TreeModel::Uniform, n, replicas, &law, s.derive(&format!("dist{n}")))?;
        let (bound, eta) = concentration_bound(&f, &d);
        ok &= r.variance - 3.0 * r.std_error <= bound;
        c = c
            .value(&format!("variance_n{n}"), r.variance)
            .value(&format!("bound_n{n}"), bound)
            .value(&format!("eta_n{n}"), eta);
    }
    Ok(c.pass(ok))
}

fn limit_point_uniform(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "limit-point-uniform-centroid";
    let s = seed(name);
    let samples = budget.pick(100_000, 20_000);
    let pts = limit_point_samples(&SplittingLaw::Centroid, samples, s)?;
    let hist = GridHistogram::from_points(8, pts.iter().map(|p| &p.point));
    let r = chi_square_gof(&hist.counts, &hist.uniform_probs());
    let mean_steps = pts.iter().map(|p| p.steps as f64).sum::<f64>() / samples as f64;
    Ok(Check::criterion(name, "4", s)
        .rule("centroid law: chi-square of limit points on 64 equal-area cells against uniform, p > 0.001")
        .samples(samples)
        .estimate(r.statistic, None)
        .p(r.p_value)
        .value("dof", r.dof)
        .value("mean_steps", mean_steps)
        .pass(r.p_value > 0.001))
}

fn fixed_point(
    name: &str,
    law: &SplittingLaw,
    budget: Budget,
    seed: SeedFor<'_>,
) -> Result<Check, VerifyError> {
    let s = seed(name);
    let samples = budget.pick(10_000, 2000);
    let r = fixed_point_test(law, samples, s)?;
    Ok(Check::criterion(name, "4", s)
        .rule("energy test between X and X'M, p > 0.01")
        .samples(2 * samples)
        .estimate(r.statistic, None)
        .p(r.p_value)
        .value("permutations", r.permutations as f64)
        .pass(r.p_value > 0.01))
}

fn contraction_identity(
    name: &str,
    law: &SplittingLaw,
    budget: Budget,
    seed: SeedFor<'_>,
) -> Result<Check, VerifyError> {
    let s = seed(name);
    let samples = budget.pick(100_000, 20_000);
    let r = l2_contraction_check(law, 1.0, samples, s)?;
    Ok(Check::criterion(name, "5", s)
        .rule("X uniform on the simplex: E|XM|^2 within 3 SE of m2(E|P|^2 + 2/3) + (4/3)m11")
        .samples(2 * samples)
        .estimate(r.lhs, Some(r.lhs_se))
        .value("rhs", r.rhs)
        .value("rhs_se", r.rhs_se)
        .value("z", r.z)
        .value("rhs_expanded", r.rhs_expanded)
        .value("z_expanded", r.z_expanded)
        .value("a", r.a)
        .value("factor", r.factor)
        .pass(r.identity_holds()))
}

fn contraction_factor(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "contraction-factor-centroid";
    let s = seed(name);
    let samples = budget.pick(100_000, 20_000);
    let r = l2_contraction_check(&SplittingLaw::Centroid, 1.0, samples, s)?;
    Ok(Check::criterion(name, "5", s)
        .rule("centroid law: (a + 2)/3 within 0.01 of 7/9")
        .samples(samples)
        .estimate(r.factor, None)
        .value("a", r.a)
        .pass((r.factor - 7.0 / 9.0).abs() <= 0.01))
}
