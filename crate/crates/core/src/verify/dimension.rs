//! The dimension formula and box-counting diagnostics.

use super::{Budget, Check, SeedFor, VerifyError};
use crate::geometry::{psi, to_cartesian};
use crate::labeling::{attach_splits, phi, Bary, SplittingLaw};
use crate::measures::{box_counting, dimension_bound, hausdorff_dim_formula, OccupationMeasure};
use crate::rng::Purpose;
use crate::sampling::{dirichlet_sym, TreeModel};

const BOX_LEVELS: [u32; 5] = [3, 4, 5, 6, 7];

pub(super) fn run(budget: Budget, seed: SeedFor<'_>) -> Result<Vec<Check>, VerifyError> {
    Ok(vec![
        centroid_exact(seed)?,
        dirichlet_half(budget, seed)?,
        bound_over_laws(budget, seed)?,
        box_uniform(budget, seed)?,
        box_increasing(budget, seed)?,
    ])
}

fn centroid_exact(seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "dimension-centroid";
    let s = seed(name);
    let r = hausdorff_dim_formula(&SplittingLaw::Centroid, 0, s)?;
    let exact = 2.0 / (3.0 * 3f64.ln());
    Ok(Check::criterion(name, "7", s)
        .rule("centroid law: formula equals 2/(3 log 3) exactly")
        .estimate(r.value, Some(0.0))
        .value("target", exact)
        .pass(r.exact && r.value == exact))
}

fn dirichlet_half(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "dimension-dirichlet-0.5";
    let s = seed(name);
    let samples = budget.pick(100_000, 20_000);
    let r = hausdorff_dim_formula(&SplittingLaw::DirichletSym(0.5), samples, s)?;
    Ok(Check::criterion(name, "7", s)
        .rule("Dir(1/2) law: Monte Carlo formula within 0.01 of 1/3")
        .samples(samples)
        .estimate(r.value, Some(r.std_error))
        .value("closed_form", r.closed_form.unwrap_or(f64::NAN))
        .pass((r.value - 1.0 / 3.0).abs() <= 0.01))
}

fn bound_over_laws(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "dimension-bound";
    let s = seed(name);
    let samples = budget.pick(100_000, 20_000);
    let mut c = Check::criterion(name, "7", s)
        .rule("every tested law: formula <= 2/(3 log 3) + 3 SE")
        .samples(samples * 5);
    let mut ok = true;
    for alpha in [0.25, 0.5, 1.0, 4.0, 50.0] {
        let law = SplittingLaw::DirichletSym(alpha);
        let r = hausdorff_dim_formula(&law, samples, s.derive(&law.to_string()))?;
        ok &= r.value <= dimension_bound() + 3.0 * r.std_error;
        c = c.value(&format!("dirichlet_{alpha}"), r.value);
    }
    Ok(c.value("bound", dimension_bound()).pass(ok))
}

fn box_uniform(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "box-counting-uniform-points";
    let s = seed(name);
    let n = budget.pick(100_000, 20_000);
    let mut rng = s.rng(Purpose::Points);
    let pts = (0..n)
        .map(|_| to_cartesian(Bary(dirichlet_sym(1.0, &mut rng))))
        .collect();
    let b = box_counting(&OccupationMeasure::from_points(pts)?, &BOX_LEVELS)?;
    Ok(Check::criterion(name, "7", s)
        .rule("uniform points on the triangle: box-counting slope over sides 2^-3..2^-7 within 0.15 of 2")
        .samples(n)
        .estimate(b.slope, None)
        .pass((b.slope - 2.0).abs() <= 0.15))
}

fn box_increasing(budget: Budget, seed: SeedFor<'_>) -> Result<Check, VerifyError> {
    let name = "box-counting-increasing-vertices";
    let s = seed(name);
    let n = budget.pick(100_000, 20_000);
    let law = SplittingLaw::Centroid;
    let t = TreeModel::Increasing.sample(n, s);
    let m = psi(&phi(&attach_splits(&t, &law, s)?))?;
    let b = box_counting(&OccupationMeasure::from_points(m.vertices)?, &BOX_LEVELS)?;
    Ok(Check::diagnostic(name, s)
        .rule("reported next to the formula value; finite-n slopes are not expected to match")
        .samples(n)
        .estimate(b.slope, None)
        .value("formula", dimension_bound()))
}
