use super::*;
use crate::geometry::{psi, CORNER_A, CORNER_B, CORNER_C};
use crate::labeling::split_matrix;
use crate::sampling::{sample_fragmentation, sample_increasing, sample_uniform_ternary, FIXED_ONE};
use crate::stats::chi_square_gof;
use crate::tree::NodeWord;

fn drawing(t: &TernaryTree, law: &SplittingLaw, seed: Seed) -> CompactTriangulation {
    psi(&phi(&attach_splits(t, law, seed).unwrap())).unwrap()
}

#[test]
fn single_vertex_measure() {
    let m = drawing(&sample_increasing(1, Seed::new(0)), &SplittingLaw::Centroid, Seed::new(0));
    let mu = occupation_measure(&m).unwrap();
    assert_eq!(mu.total_mass(), 1.0);
    assert!((mu.points[0].x - 0.5).abs() < 1e-15);
    assert!((mu.points[0].y - SQRT3 / 6.0).abs() < 1e-15);
    assert!((integrate(|p| p.x, &mu) - 0.5).abs() < 1e-15);
    assert_eq!(integrate(|_| 1.0, &mu), 1.0);
    let empty = CompactTriangulation::root_triangle();
    assert_eq!(occupation_measure(&empty), Err(MeasureError::EmptyVertexSet));
}

#[test]
fn linear_functions_integrate_at_barycenter() {
    let seed = Seed::new(3);
    let m = drawing(&sample_increasing(500, seed), &SplittingLaw::DirichletSym(0.5), seed);
    let mu = occupation_measure(&m).unwrap();
    let f = |p: Point2| 2.0 * p.x - 3.0 * p.y + 0.25;
    let n = mu.n() as f64;
    let bx = mu.points.iter().map(|p| p.x).sum::<f64>() / n;
    let by = mu.points.iter().map(|p| p.y).sum::<f64>() / n;
    assert!((integrate(f, &mu) - f(Point2::new(bx, by))).abs() < 1e-12);
}

#[test]
fn subtree_mass_matches_point_counting() {
    for (s, law) in [(1, SplittingLaw::Centroid), (2, SplittingLaw::DirichletSym(0.5))] {
        let seed = Seed::new(s);
        let t = sample_increasing(2000, seed);
        let ct = phi(&attach_splits(&t, &law, seed).unwrap());
        let mu = occupation_measure(&psi(&ct).unwrap()).unwrap();
        let sizes = t.subtree_internal_counts();
        for u in t.internal_nodes().take(200) {
            let tri = corners_cartesian(ct.corners(u));
            let by_tree = f64::from(sizes[u.index()]) / 2000.0;
            assert_eq!(mu.interior_mass(&tri), by_tree, "node {}", t.word(u));
        }
    }
}

#[test]
fn grid_cells_are_distinct() {
    for k in [1usize, 2, 3, 8] {
        let h = GridHistogram::new(k);
        let kf = k as f64;
        let mut seen = vec![false; k * k];
        for i in 0..k {
            for j in 0..k {
                // Upward cell (i, j) has centroid weights (i+1/3, j+1/3)/k
                // on (B, C); the downward one (i+2/3, j+2/3)/k.
                for (off, ok) in [(1.0 / 3.0, i + j < k), (2.0 / 3.0, i + j + 1 < k)] {
                    if !ok {
                        continue;
                    }
                    let (b, c) = ((i as f64 + off) / kf, (j as f64 + off) / kf);
                    let p = to_cartesian(Bary([1.0 - b - c, b, c]));
                    let cell = h.cell_of(p);
                    assert!(!seen[cell], "k={k} cell {cell} hit twice");
                    seen[cell] = true;
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
    let h = GridHistogram::from_points(8, &[CORNER_A, CORNER_B, CORNER_C]);
    assert_eq!(h.total(), 3);
    assert!((h.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn matrix_chain_stays_stochastic_and_nests() {
    let law = SplittingLaw::DirichletSym(0.5);
    let mut rng = Seed::new(8).rng(Purpose::Points);
    let mut chain = MatrixChain::default();
    let mut last = chain.diameter();
    for _ in 0..300 {
        let i = rng.random_range(1..=3u8);
        chain.step(i, &law.draw(&mut rng).unwrap());
        assert!(chain.max_row_sum_error() <= 1e-12);
        let d = chain.diameter();
        assert!(d <= last + 1e-15);
        last = d;
    }
}

#[test]
fn limit_points_converge() {
    for law in [SplittingLaw::Centroid, SplittingLaw::DirichletSym(0.5)] {
        let pts = limit_point_samples(&law, 200, Seed::new(5)).unwrap();
        assert!(pts.iter().all(|p| p.steps > 0 && p.steps < LIMIT_MAX_STEPS));
    }
    let err = limit_point_sample(&SplittingLaw::Centroid, 1e-9, 3, Seed::new(1)).unwrap_err();
    assert!(matches!(err, MeasureError::NoConvergence { steps: 3, .. }));
}

#[test]
fn centroid_limit_point_is_roughly_uniform() {
    let pts = limit_point_samples(&SplittingLaw::Centroid, 8000, Seed::new(12)).unwrap();
    let h = GridHistogram::from_points(4, pts.iter().map(|p| &p.point));
    assert!(chi_square_gof(&h.counts, &h.uniform_probs()).p_value > 0.001);
}

#[test]
fn push_forward_is_row_times_matrix() {
    let x = Bary([0.2, 0.5, 0.3]);
    let p = [0.1, 0.6, 0.3];
    for i in 1..=3u8 {
        let m = split_matrix(i, &p);
        let want: Vec<f64> = (0..3).map(|j| (0..3).map(|k| x.0[k] * m[k][j]).sum()).collect();
        let got = push_forward(&x, i, &p);
        for j in 0..3 {
            assert!((got.0[j] - want[j]).abs() < 1e-15);
        }
    }
    // Centroid law, X = (1/3, 1/3, 1/3): |XM⁽¹⁾|² = |(1/9, 4/9, 4/9)|² = 11/27.
    let y = push_forward(&Bary([1.0 / 3.0; 3]), 1, &[1.0 / 3.0; 3]);
    let n2: f64 = y.0.iter().map(|v| v * v).sum();
    assert!((n2 - 11.0 / 27.0).abs() < 1e-15);
}

#[test]
fn contraction_report() {
    let r = l2_contraction_check(&SplittingLaw::Centroid, 1.0, 20_000, Seed::new(4)).unwrap();
    assert!((r.a - 1.0 / 3.0).abs() < 1e-15);
    assert!((r.factor - 7.0 / 9.0).abs() < 1e-15);
    // X uniform on V₂: m₂ = 1/6, m₁₁ = 1/12.
    assert!((r.m2 - 1.0 / 6.0).abs() < 0.005);
    assert!((r.m11 - 1.0 / 12.0).abs() < 0.005);
    assert!(r.expanded_identity_holds(), "{r:?}");
    assert!(!r.identity_holds(), "{r:?}");
    for law in [SplittingLaw::DirichletSym(0.5), SplittingLaw::DirichletSym(4.0)] {
        let r = l2_contraction_check(&law, 1.0, 10_000, Seed::new(4)).unwrap();
        assert!(r.a < 1.0 && r.factor < 1.0);
    }
}

#[test]
fn branch_vertex_agrees_with_labels() {
    let seed = Seed::new(6);
    let law = SplittingLaw::DirichletSym(0.5);
    let t = sample_increasing(300, seed);
    let ct = phi(&attach_splits(&t, &law, seed).unwrap());
    for u in t.internal_nodes() {
        assert_eq!(branch_vertex(&t, u, &law, seed).unwrap(), vertex_coordinates(&ct, u).unwrap());
    }
}

#[test]
fn two_vertices_are_distinct() {
    for model in [TreeModel::Uniform, TreeModel::Increasing] {
        let d = two_vertex_distance(model, 2, 500, &SplittingLaw::Centroid, Seed::new(1)).unwrap();
        assert!(d.distances.iter().all(|&x| x > 0.0));
        assert_eq!(d.tail(0.0), 1.0);
    }
}

#[test]
fn constant_function_has_no_fluctuation() {
    let r = occupation_concentration(
        TreeModel::Uniform,
        200,
        TestFunction::Constant(0.3),
        &SplittingLaw::Centroid,
        20,
        Seed::new(2),
    )
    .unwrap();
    assert_eq!(r.variance, 0.0);
}

#[test]
fn concentration_respects_bound() {
    let law = SplittingLaw::Centroid;
    let seed = Seed::new(7);
    let f = TestFunction::X;
    let r = occupation_concentration(TreeModel::Uniform, 300, f, &law, 200, seed).unwrap();
    let d = two_vertex_distance(TreeModel::Uniform, 300, 400, &law, seed).unwrap();
    let (bound, _) = concentration_bound(&f, &d);
    assert!(r.variance <= bound, "{} > {bound}", r.variance);
}

#[test]
fn bump_lipschitz_constant() {
    let f = TestFunction::Bump { cx: 0.5, cy: 0.3, r: 0.2 };
    let l = f.lipschitz();
    let mut worst = 0.0f64;
    for k in 0..2000 {
        let a = Point2::new(0.5 + k as f64 * 1e-4, 0.3);
        let b = Point2::new(a.x + 1e-6, 0.3);
        worst = worst.max((f.eval(b) - f.eval(a)).abs() / 1e-6);
    }
    assert!(worst <= l * (1.0 + 1e-6) && worst > 0.99 * l);
}

#[test]
fn proportions_miss_the_root() {
    let t = sample_increasing(1000, Seed::new(3));
    let p = subtree_proportions(&t);
    assert!((p.iter().sum::<f64>() - 999.0 / 1000.0).abs() < 1e-12);
}

#[test]
fn kingman_transform() {
    assert_eq!(kingman_phi(1.0), 1.0);
    let t0 = theta0();
    assert!((t0 - 7.654_845_485).abs() < 1e-8);
    assert!((kingman_phi(t0) - 1.0 / (2.0 * std::f64::consts::E)).abs() < 1e-15);
    for th in [0.5, 2.0, 8.0] {
        let (m, se) = kingman_phi_mc(th, 100_000, Seed::new(9));
        assert!((m - kingman_phi(th)).abs() <= 3.0 * se, "θ={th}");
    }
}

#[test]
fn dimension_values() {
    let c = hausdorff_dim_formula(&SplittingLaw::Centroid, 0, Seed::new(0)).unwrap();
    assert_eq!(c.value, 2.0 / (3.0 * 3f64.ln()));
    assert!((c.value - 0.606_826).abs() < 1e-6);
    let d = hausdorff_dim_formula(&SplittingLaw::DirichletSym(0.5), 200_000, Seed::new(1)).unwrap();
    assert!((d.value - 1.0 / 3.0).abs() < 0.01);
    assert!((d.closed_form.unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!(d.value <= d.bound + 3.0 * d.std_error);
}

#[test]
fn box_counting_edge_cases() {
    let mu = OccupationMeasure::from_points(vec![Point2::new(0.3, 0.2); 50]).unwrap();
    assert_eq!(box_counting(&mu, &[1, 2, 3, 4]).unwrap().slope, 0.0);
    assert_eq!(
        box_counting(&mu, &[1, 2, 2, 3]),
        Err(MeasureError::InsufficientScales(3))
    );
}

#[test]
fn limit_levels_cover_exactly() {
    let lm = LimitMeasure::new(SplittingLaw::DirichletSym(0.5), Seed::new(11));
    for d in 0..=6 {
        let lv = lm.level(d).unwrap();
        assert_eq!(lv.cells.len(), 3usize.pow(d as u32));
        assert_eq!(lv.total_width(), FIXED_ONE);
        let words: Vec<NodeWord> = lv.cells.iter().map(|c| c.word.clone()).collect();
        assert!(is_covering_family(&words));
        let area: f64 = lv.cells.iter().map(|c| crate::geometry::triangle_area(&c.triangle())).sum();
        assert!((area - crate::geometry::ROOT_AREA).abs() < 1e-9);
    }
    // Replace one node by its children.
    let mut fam: Vec<NodeWord> = lm.level(2).unwrap().cells.iter().map(|c| c.word.clone()).collect();
    let w = fam.remove(4);
    fam.extend((1..=3).map(|l| w.child(l)));
    assert!(is_covering_family(&fam));
    assert_eq!(lm.family_width(&fam), FIXED_ONE);
    fam.pop();
    assert!(!is_covering_family(&fam));
    assert!(!is_covering_family(&[NodeWord::root(), "1".parse().unwrap()]));
    assert!(lm.level(MAX_MATERIALIZED_DEPTH + 1).is_err());
}

#[test]
fn limit_cells_match_fragmentation() {
    let seed = Seed::new(21);
    let lm = LimitMeasure::new(SplittingLaw::Centroid, seed);
    let f = sample_fragmentation(400, seed);
    for u in f.tree.nodes().filter(|&u| f.tree.depth(u) <= 6) {
        let c = lm.cell(&f.tree.word(u)).unwrap();
        assert_eq!(c.interval, f.interval(u));
        assert_eq!(lm.cell_width(&c.word), c.interval.width());
    }
    let deep = NodeWord::from_letters(&[1; 26]).unwrap();
    assert!(lm.cell(&deep).is_err());
}

#[test]
fn max_mass_by_depth() {
    let lm = LimitMeasure::new(SplittingLaw::Centroid, Seed::new(2));
    let m = lm.max_cell_mass(0, 8).unwrap();
    assert_eq!(m[0], 1.0);
    assert!(m.windows(2).all(|w| w[1] <= w[0] && w[1] > 0.0));
    for d in 1..=5 {
        let lv = lm.level(d).unwrap();
        let brute = lv.masses().into_iter().fold(0.0, f64::max);
        assert_eq!(m[d], brute);
    }
    assert_eq!(lm.max_cell_mass(3, 5).unwrap(), m[3..=5].to_vec());
}

#[test]
fn coupled_cells_small() {
    let cells = coupled_cell_masses(3000, 1, &SplittingLaw::Centroid, Seed::new(5)).unwrap();
    assert_eq!(cells.len(), 3);
    for c in &cells {
        assert_eq!(c.tree_mass, c.occupation_mass);
        assert!((c.occupation_mass - c.limit_mass).abs() < 0.05);
    }
}

#[test]
fn greedy_descent_matches_point_counts() {
    let s = Seed::new(7);
    let ct = phi(&attach_splits(&sample_uniform_ternary(10_000, s), &SplittingLaw::Centroid, s).unwrap());
    let g = greedy_descent(&ct, 0.1).unwrap();
    let mu = occupation_measure(&psi(&ct).unwrap()).unwrap();
    assert_eq!(mu.interior_mass(&g.corners), g.tree_mass);
    assert!(g.diameter <= 0.1);
    // Most of the cloud sits in a triangle a tenth the size of the root.
    assert!(g.tree_mass > 0.9, "{g:?}");

    let one = phi(&attach_splits(&sample_uniform_ternary(1, s), &SplittingLaw::Centroid, s).unwrap());
    let g = greedy_descent(&one, 0.1).unwrap();
    assert_eq!((g.depth, g.tree_mass), (1, 0.0));
    let root = phi(&attach_splits(&sample_uniform_ternary(0, s), &SplittingLaw::Centroid, s).unwrap());
    assert!(greedy_descent(&root, 0.1).is_err());
}
