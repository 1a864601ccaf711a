use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use stackplane::config::{ModelKind, RunConfig, CLI_NODE_CAP};
use stackplane::geometry::{psi, render_svg, sample_limit_drawing, vertices_csv, SvgOptions};
use stackplane::json::{SchemaError, TreeDocument};
use stackplane::labeling::{attach_splits, phi, SplittingLaw};
use stackplane::measures::{
    box_counting, greedy_descent, hausdorff_dim_formula, occupation_concentration,
    occupation_measure, subtree_proportions, two_vertex_distance, TestFunction,
};
use stackplane::rng::Seed;
use stackplane::sampling::{sample_limit_tree, TreeModel};
use stackplane::stats::mean_se;
use stackplane::verify::run_suite;
use stackplane::TernaryTree;

use crate::error::CliError;
use crate::output::{emit, read, write_atomic};
use crate::{DrawArgs, ModelArgs, SampleArgs, StatsArgs, VerifyArgs};

pub const STATS_SCHEMA: &str = "stackplane-stats-v1";
const DEFAULT_REPLICAS: usize = 100;
const GREEDY_DIAMETER: f64 = 0.1;
const BOX_LEVELS: [u32; 5] = [3, 4, 5, 6, 7];

fn model_config(command: &str, m: &ModelArgs, seed: Option<u64>) -> Result<(RunConfig, SplittingLaw), CliError> {
    let mut c = RunConfig {
        command: command.to_string(),
        model: m.model,
        n: m.n,
        depth: m.depth,
        law: Some(m.law.clone()),
        seed,
        node_cap: m.node_cap,
        ..RunConfig::default()
    };
    let law = c.law()?;
    c.law = Some(law.to_string());
    c.model = Some(c.validate_model()?);
    Ok((c, law))
}

pub fn sample(a: SampleArgs) -> Result<(), CliError> {
    let (mut config, law) = model_config("sample", &a.model, Some(a.seed))?;
    let seed = Seed::new(a.seed);
    let cap = config.node_cap.unwrap_or(CLI_NODE_CAP);
    let model = config.model.expect("validated");
    let law_name = law.to_string();
    let doc = match model {
        ModelKind::Uniform | ModelKind::Increasing => {
            let t = model.finite().expect("finite model").sample(config.n.expect("validated"), seed);
            TreeDocument::from_coord_labelled(&phi(&attach_splits(&t, &law, seed)?), &law_name)
        }
        ModelKind::LimitTree => {
            let assembled = sample_limit_tree(config.depth.expect("validated"), cap, seed).assemble();
            TreeDocument::from_tree(&assembled.tree).with_overflowed(assembled.overflowed)
        }
        ModelKind::LimitDrawing => {
            let d = sample_limit_drawing(config.depth.expect("validated"), &law, cap, seed)?;
            TreeDocument::from_coord_labelled(&d.labelled, &law_name).with_overflowed(d.overflowed())
        }
    };
    config.outputs = vec![a.out.display().to_string()];
    write_atomic(&a.out, &doc.with_config(config.provenance()).to_json())
}

fn load(path: &Path) -> Result<TreeDocument, CliError> {
    let schema = |source: SchemaError| CliError::Schema {
        path: path.to_path_buf(),
        source,
    };
    TreeDocument::parse(&read(path)?).map_err(schema)
}

pub fn draw(a: DrawArgs) -> Result<(), CliError> {
    let doc = load(&a.input)?;
    let ct = doc.coord_labelled().map_err(|source| CliError::Schema {
        path: a.input.clone(),
        source,
    })?;
    let config = RunConfig {
        command: "draw".into(),
        input: Some(a.input.display().to_string()),
        source: doc.config.clone(),
        ..RunConfig::default()
    };
    let provenance = serde_json::to_string(&config.provenance()).expect("configs serialize");
    let m = psi(&ct)?;
    let opts = SvgOptions {
        width: a.width,
        height: (f64::from(a.width) * 0.867).ceil() as u32,
        vertex_radius: a.vertex_radius,
        metadata: Some(provenance.clone()),
        ..SvgOptions::default()
    };
    let svg = render_svg(&m, &opts);
    if let Some(csv) = &a.csv {
        write_atomic(csv, &vertices_csv(&m, Some(&provenance)))?;
    }
    write_atomic(&a.out, &svg)
}

fn law_summary(law: &SplittingLaw, seed: Seed) -> Result<Value, CliError> {
    let d = hausdorff_dim_formula(law, 100_000, seed.derive("dimension"))?;
    let m2 = law.second_moment();
    Ok(json!({
        "name": law.to_string(),
        "second_moment": m2,
        "contraction_factor": m2.map(|m| (3.0 * m + 2.0) / 3.0),
        "dimension": d.value,
        "dimension_std_error": d.std_error,
        "dimension_exact": d.exact,
        "dimension_bound": d.bound,
    }))
}

fn finite_stats(model: TreeModel, n: usize, law: &SplittingLaw, replicas: usize, seed: Seed) -> Result<Value, CliError> {
    let mut out = serde_json::Map::new();
    if n >= 2 {
        let d = two_vertex_distance(model, n, replicas, law, seed.derive("distance"))?;
        out.insert(
            "two_vertex_distance".into(),
            json!({ "median": d.median(), "q10": d.quantile(0.1), "q90": d.quantile(0.9) }),
        );
    }
    if n >= 1 {
        let c = occupation_concentration(model, n, TestFunction::X, law, replicas, seed.derive("concentration"))?;
        out.insert(
            "concentration_x".into(),
            json!({ "variance": c.variance, "std_error": c.std_error }),
        );
        let sp = seed.derive("proportions");
        let props: Vec<[f64; 3]> = (0..replicas as u64)
            .into_par_iter()
            .map(|r| subtree_proportions(&model.sample(n, sp.with_stream(r))))
            .collect();
        let mean: Vec<f64> = (0..3)
            .map(|i| mean_se(&props.iter().map(|p| p[i]).collect::<Vec<_>>()).0)
            .collect();
        let (sq, sq_se) = mean_se(&props.iter().map(|p| p[0] * p[0]).collect::<Vec<_>>());
        out.insert(
            "subtree_proportions".into(),
            json!({ "mean": mean, "p1_second_moment": sq, "p1_second_moment_std_error": sq_se }),
        );
    }
    Ok(Value::Object(out))
}

fn limit_stats(kind: ModelKind, depth: usize, cap: usize, law: &SplittingLaw, replicas: usize, seed: Seed) -> Result<Value, CliError> {
    let rows: Vec<(usize, usize, Vec<f64>)> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let s = seed.with_stream(r);
            if kind == ModelKind::LimitDrawing {
                let d = sample_limit_drawing(depth, law, cap, s)?;
                Ok((d.assembled.tree.n_internal(), d.overflowed(), d.spine_diameters))
            } else {
                let a = sample_limit_tree(depth, cap, s).assemble();
                Ok((a.tree.n_internal(), a.overflowed, Vec::new()))
            }
        })
        .collect::<Result<_, CliError>>()?;
    let internal: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let overflowed: usize = rows.iter().map(|r| r.1).sum();
    let mut out = json!({
        "internal_nodes_median": stackplane::stats::quantile(&internal, 0.5),
        "overflowed_subtrees": overflowed,
    });
    if kind == ModelKind::LimitDrawing {
        let diam: Vec<f64> = (0..=depth)
            .map(|k| rows.iter().map(|r| r.2[k].ln()).sum::<f64>() / replicas as f64)
            .collect();
        out["spine_log_diameter_mean"] = json!(diam);
    }
    Ok(out)
}

fn file_stats(doc: &TreeDocument, path: &Path) -> Result<Value, CliError> {
    let schema = |source: SchemaError| CliError::Schema {
        path: path.to_path_buf(),
        source,
    };
    let t: TernaryTree = doc.tree().map_err(schema)?;
    let mut out = json!({
        "n_internal": t.n_internal(),
        "leaves": t.n_leaves(),
        "height": t.height(),
    });
    if t.n_internal() >= 1 {
        out["subtree_proportions"] = json!(subtree_proportions(&t));
    }
    if doc.splits.is_some() && t.n_internal() >= 1 {
        let ct = doc.coord_labelled().map_err(schema)?;
        let m = psi(&ct)?;
        let mu = occupation_measure(&m).expect("at least one vertex");
        let n = mu.n() as f64;
        let mean = [
            mu.points.iter().map(|p| p.x).sum::<f64>() / n,
            mu.points.iter().map(|p| p.y).sum::<f64>() / n,
        ];
        out["occupation_mean"] = json!(mean);
        let g = greedy_descent(&ct, GREEDY_DIAMETER).expect("at least one vertex");
        out["greedy_triangle"] = json!({
            "word": g.word,
            "depth": g.depth,
            "diameter": g.diameter,
            "max_diameter": GREEDY_DIAMETER,
            "vertex_mass": mu.interior_mass(&g.corners),
        });
        if let Ok(b) = box_counting(&mu, &BOX_LEVELS) {
            out["box_counting"] = json!({ "levels": b.levels, "occupied": b.occupied, "slope": b.slope });
        }
    }
    Ok(out)
}

pub fn stats(a: StatsArgs) -> Result<(), CliError> {
    let report = match &a.input {
        Some(path) => {
            let doc = load(path)?;
            let config = RunConfig {
                command: "stats".into(),
                input: Some(path.display().to_string()),
                source: doc.config.clone(),
                ..RunConfig::default()
            };
            let body = file_stats(&doc, path)?;
            json!({ "schema": STATS_SCHEMA, "config": config.provenance(), "tree": body })
        }
        None => {
            let (mut config, law) = model_config("stats", &a.model, a.seed)?;
            let replicas = a.replicas.unwrap_or(DEFAULT_REPLICAS);
            config.replicas = Some(replicas);
            config.validate_model()?;
            let seed = Seed::new(config.seed.expect("required by the parser"));
            let kind = config.model.expect("validated");
            let body = match kind.finite() {
                Some(m) => finite_stats(m, config.n.expect("validated"), &law, replicas, seed)?,
                None => limit_stats(
                    kind,
                    config.depth.expect("validated"),
                    config.node_cap.unwrap_or(CLI_NODE_CAP),
                    &law,
                    replicas,
                    seed,
                )?,
            };
            json!({
                "schema": STATS_SCHEMA,
                "config": config.provenance(),
                "law": law_summary(&law, seed)?,
                "model": body,
            })
        }
    };
    let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
    s.push('\n');
    emit(a.out.as_deref(), &s)
}

pub fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let report = run_suite(a.suite, a.budget, a.seed)?;
    emit(a.out.as_deref(), &report.to_json())?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed {
            suite: a.suite.to_string(),
            failing: report.failing,
        })
    }
}
