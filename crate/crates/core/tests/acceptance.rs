//! Acceptance criteria 1 to 9 at full budget with the fixed seed 1.
//!
//! Prints one PASS/FAIL line per criterion. The test fails on any
//! criterion not listed in `KNOWN_FAILURES`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use stackplane::parallel::with_threads;
use stackplane::verify::{run_suite, Budget, Check, Suite, SuiteReport};

const SEED: u64 = 1;

/// Checks whose stated target does not hold for a correct implementation,
/// with the reason. Their criterion still prints FAIL.
const KNOWN_FAILURES: &[(&str, &str)] = &[
    (
        "contraction-identity-centroid",
        "the printed right-hand side m2(E|P|^2 + 2/3) + (4/3)m11 loses 4/3 m2 in the expansion of |XM|^2; \
         the directly expanded m2(E|P|^2 + 2) + (4/3)m11 agrees with the left side (z_expanded in the report)",
    ),
    (
        "contraction-identity-dirichlet-0.5",
        "same printed identity as above",
    ),
    (
        "coupled-cell-masses-depth2",
        "a depth-2 cell of mass m holds about Binomial(n, m) vertices, so its relative error is about \
         1/sqrt(n m); Dir(1/2) cells are often below 1e-3, and a 5% bound on all nine cells holds for \
         roughly one seed in five at n = 1e5; coupled-cell-masses-binomial checks the same cells against that noise",
    ),
];

/// Wall-clock limits per criterion.
fn limit(criterion: &str) -> Option<Duration> {
    let secs = match criterion {
        "1" => 60,
        "2" | "4" => 300,
        "3" | "6" => 600,
        _ => return None,
    };
    Some(Duration::from_secs(secs))
}

fn timed(suite: Suite) -> (SuiteReport, Duration) {
    let t = Instant::now();
    let r = run_suite(suite, Budget::Full, SEED).expect("suite runs");
    (r, t.elapsed())
}

fn describe(c: &Check) -> String {
    let mut s = format!("{} [{}]", c.test_name, if c.passed { "ok" } else { "failed" });
    if let Some(e) = c.estimate {
        s += &format!(" estimate={e:.6}");
    }
    if let Some(se) = c.std_error {
        s += &format!(" se={se:.2e}");
    }
    if let Some(p) = c.p_value {
        s += &format!(" p={p:.4}");
    }
    s
}

#[test]
fn acceptance() {
    let mut by_criterion: BTreeMap<String, Vec<Check>> = BTreeMap::new();
    let mut elapsed: BTreeMap<String, Duration> = BTreeMap::new();
    let mut reports = Vec::new();
    for suite in Suite::ALL {
        let (r, dt) = timed(suite);
        for c in &r.checks {
            if let Some(k) = &c.criterion {
                by_criterion.entry(k.clone()).or_default().push(c.clone());
                // A criterion is charged the time of the suite that covers it.
                let e = elapsed.entry(k.clone()).or_default();
                *e = (*e).max(dt);
            }
        }
        reports.push(r);
    }

    // Criterion 9: identical bytes on one and four threads, and on a rerun.
    let mut repro_ok = true;
    let mut repro_notes = Vec::new();
    for suite in Suite::ALL {
        let one = with_threads(1, || run_suite(suite, Budget::Quick, SEED).unwrap().to_json());
        let four = with_threads(4, || run_suite(suite, Budget::Quick, SEED).unwrap().to_json());
        let again = with_threads(4, || run_suite(suite, Budget::Quick, SEED).unwrap().to_json());
        let same = one == four && four == again;
        repro_ok &= same;
        repro_notes.push(format!("{suite}:{}", if same { "identical" } else { "DIFFERENT" }));
    }
    let full_rerun = reports
        .iter()
        .filter(|r| r.suite == Suite::Bijection)
        .all(|r| with_threads(2, || run_suite(r.suite, Budget::Full, SEED).unwrap()).to_json() == r.to_json());
    repro_ok &= full_rerun;
    repro_notes.push(format!("bijection full rerun on 2 threads:{}", if full_rerun { "identical" } else { "DIFFERENT" }));

    let known = |c: &Check| KNOWN_FAILURES.iter().find(|(n, _)| *n == c.test_name).map(|(_, why)| *why);
    let mut unexpected = Vec::new();
    println!();
    for k in 1..=9 {
        let key = k.to_string();
        let (passed, detail) = if k == 9 {
            (repro_ok, repro_notes.join(", "))
        } else {
            let checks = by_criterion.get(&key).map(Vec::as_slice).unwrap_or(&[]);
            let mut ok = !checks.is_empty() && checks.iter().all(|c| c.passed);
            let mut parts: Vec<String> = checks.iter().map(describe).collect();
            if let (Some(lim), Some(dt)) = (limit(&key), elapsed.get(&key)) {
                ok &= *dt <= lim;
                if *dt > lim {
                    unexpected.push(format!("criterion {key} over time"));
                }
                parts.push(format!("suite time {:.1}s (limit {}s)", dt.as_secs_f64(), lim.as_secs()));
            }
            if checks.is_empty() {
                unexpected.push(format!("criterion {key} has no checks"));
            }
            for c in checks.iter().filter(|c| !c.passed) {
                match known(c) {
                    Some(why) => parts.push(format!("known failure {}: {why}", c.test_name)),
                    None => unexpected.push(c.test_name.clone()),
                }
            }
            (ok, parts.join("; "))
        };
        if k == 9 && !passed {
            unexpected.push("criterion 9".into());
        }
        println!("{} criterion {k}: {detail}", if passed { "PASS" } else { "FAIL" });
    }
    let others: Vec<&Check> = reports
        .iter()
        .flat_map(|r| &r.checks)
        .filter(|c| c.criterion.is_none())
        .collect();
    for c in &others {
        println!("     {}", describe(c));
        if !c.passed {
            unexpected.push(c.test_name.clone());
        }
    }
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:?}");
}
