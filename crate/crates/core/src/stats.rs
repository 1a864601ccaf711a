//! Goodness-of-fit tests and summary statistics.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::rng::{Purpose, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

fn chi2_sf(x: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(dof).expect("dof > 0").sf(x)
}

/// Pearson goodness of fit of `observed` counts to cell probabilities.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> TestResult {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let total: f64 = probs.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = n as f64 * p / total;
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else if o > 0 {
            stat = f64::INFINITY;
        }
    }
    let dof = cells.saturating_sub(1) as f64;
    TestResult {
        statistic: stat,
        dof,
        p_value: if stat.is_finite() { chi2_sf(stat, dof) } else { 0.0 },
    }
}

/// Chi-square test of homogeneity for two count vectors over the same
/// cells.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> TestResult {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = na + nb;
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        let (ea, eb) = (na * col / n, nb * col / n);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = cells.saturating_sub(1) as f64;
    TestResult {
        statistic: stat,
        dof,
        p_value: chi2_sf(stat, dof),
    }
}

/// Kolmogorov distribution tail `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        s += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    TestResult {
        statistic: d,
        dof: ne,
        p_value: kolmogorov_sf(lambda),
    }
}

/// Energy distance `2E|X−Y| − E|X−X'| − E|Y−Y'|` between two planar
/// samples, computed pairwise.
pub fn energy_distance_exact(x: &[[f64; 2]], y: &[[f64; 2]]) -> f64 {
    let d = |p: &[f64; 2], q: &[f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]);
    let mean_cross = |a: &[[f64; 2]], b: &[[f64; 2]]| {
        a.par_iter()
            .map(|p| b.iter().map(|q| d(p, q)).sum::<f64>())
            .sum::<f64>()
            / (a.len() * b.len()) as f64
    };
    2.0 * mean_cross(x, y) - mean_cross(x, x) - mean_cross(y, y)
}

/// Permutation test on the energy distance between two planar samples.
///
/// The statistic is evaluated through one-dimensional projections: for a
/// direction θ, the energy distance of the projected samples is
/// `2∫(F − G)²`, and averaging over directions and multiplying by π/2
/// recovers the planar energy distance. Each direction's pooled order is
/// sorted once, so a relabelling costs a linear sweep per direction.
#[derive(Clone, Copy, Debug)]
pub struct EnergyTest {
    pub directions: usize,
    pub permutations: usize,
}

impl Default for EnergyTest {
    fn default() -> Self {
        EnergyTest {
            directions: 32,
            permutations: 499,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyResult {
    pub statistic: f64,
    pub p_value: f64,
    pub permutations: usize,
}

struct Projection {
    order: Vec<u32>,
    gaps: Vec<f64>,
}

impl EnergyTest {
    fn projections(&self, pooled: &[[f64; 2]]) -> Vec<Projection> {
        (0..self.directions)
            .into_par_iter()
            .map(|d| {
                let th = (d as f64 + 0.5) * std::f64::consts::PI / self.directions as f64;
                let (c, s) = (th.cos(), th.sin());
                let z: Vec<f64> = pooled.iter().map(|p| c * p[0] + s * p[1]).collect();
                let mut order: Vec<u32> = (0..pooled.len() as u32).collect();
                order.sort_by(|&i, &j| z[i as usize].total_cmp(&z[j as usize]).then(i.cmp(&j)));
                let gaps = order
                    .windows(2)
                    .map(|w| z[w[1] as usize] - z[w[0] as usize])
                    .collect();
                Projection { order, gaps }
            })
            .collect()
    }

    fn statistic(projs: &[Projection], in_x: &[bool], n: usize, m: usize) -> f64 {
        let (wn, wm) = (1.0 / n as f64, 1.0 / m as f64);
        let total: f64 = projs
            .iter()
            .map(|p| {
                let (mut fx, mut fy, mut acc) = (0.0f64, 0.0f64, 0.0f64);
                for (k, &i) in p.order[..p.order.len() - 1].iter().enumerate() {
                    if in_x[i as usize] {
                        fx += wn;
                    } else {
                        fy += wm;
                    }
                    let diff = fx - fy;
                    acc += p.gaps[k] * diff * diff;
                }
                2.0 * acc
            })
            .sum();
        std::f64::consts::FRAC_PI_2 * total / projs.len() as f64
    }

    pub fn run(&self, x: &[[f64; 2]], y: &[[f64; 2]], seed: Seed) -> EnergyResult {
        let (n, m) = (x.len(), y.len());
        let pooled: Vec<[f64; 2]> = x.iter().chain(y).copied().collect();
        let projs = self.projections(&pooled);
        let labels: Vec<bool> = (0..n + m).map(|i| i < n).collect();
        let observed = Self::statistic(&projs, &labels, n, m);
        let exceed: usize = (0..self.permutations as u64)
            .into_par_iter()
            .map(|r| {
                let mut l = labels.clone();
                l.shuffle(&mut seed.with_stream(r).rng(Purpose::Permutation));
                usize::from(Self::statistic(&projs, &l, n, m) >= observed)
            })
            .sum();
        EnergyResult {
            statistic: observed,
            p_value: (1 + exceed) as f64 / (1 + self.permutations) as f64,
            permutations: self.permutations,
        }
    }

    /// The projected statistic without a permutation test.
    pub fn statistic_only(&self, x: &[[f64; 2]], y: &[[f64; 2]]) -> f64 {
        let pooled: Vec<[f64; 2]> = x.iter().chain(y).copied().collect();
        let labels: Vec<bool> = (0..pooled.len()).map(|i| i < x.len()).collect();
        Self::statistic(&self.projections(&pooled), &labels, x.len(), y.len())
    }
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chi_square_reference_values() {
        // Perfect fit.
        let r = chi_square_gof(&[25, 25, 25, 25], &[0.25; 4]);
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        // χ² = 4 with 1 dof has tail 0.0455.
        let r = chi_square_gof(&[60, 40], &[0.5, 0.5]);
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert!((r.p_value - 0.045_500_263_9).abs() < 1e-6);
        let r = chi_square_two_sample(&[10, 20, 0], &[10, 20, 0]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 1.0);
    }

    #[test]
    fn kolmogorov_tail() {
        // P(K > 1.36) ≈ 0.049.
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 1e-3);
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn projected_energy_matches_pairwise() {
        let mut rng = Seed::new(1).rng(Purpose::Points);
        let x: Vec<[f64; 2]> = (0..300).map(|_| [rng.random(), rng.random()]).collect();
        let y: Vec<[f64; 2]> = (0..300)
            .map(|_| [rng.random::<f64>() * 1.3, rng.random()])
            .collect();
        let exact = energy_distance_exact(&x, &y);
        let t = EnergyTest {
            directions: 720,
            permutations: 0,
        };
        let proj = t.statistic_only(&x, &y);
        assert!((proj - exact).abs() < 0.01 * exact, "{proj} vs {exact}");
    }

    #[test]
    fn energy_test_separates() {
        let mut rng = Seed::new(2).rng(Purpose::Points);
        let x: Vec<[f64; 2]> = (0..500).map(|_| [rng.random(), rng.random()]).collect();
        let y: Vec<[f64; 2]> = (0..500).map(|_| [rng.random(), rng.random()]).collect();
        let z: Vec<[f64; 2]> = (0..500)
            .map(|_| [rng.random::<f64>().powi(2), rng.random()])
            .collect();
        let t = EnergyTest::default();
        assert!(t.run(&x, &y, Seed::new(3)).p_value > 0.01);
        assert!(t.run(&x, &z, Seed::new(3)).p_value < 0.01);
    }

    #[test]
    fn summaries() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (1.666_666_666_666_666_7f64 / 4.0).sqrt()).abs() < 1e-12);
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        let (s, b) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }
}
