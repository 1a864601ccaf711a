use proptest::prelude::*;

use stackplane::geometry::{psi, psi_inductive, triangle_area, CompactTriangulation};
use stackplane::json::TreeDocument;
use stackplane::labeling::{attach_splits, phi, SplittingLaw};
use stackplane::sampling::{sample_fragmentation, TreeModel};
use stackplane::tree::common_ancestor;
use stackplane::{NodeWord, Seed, TernaryTree};

fn model() -> impl Strategy<Value = TreeModel> {
    prop_oneof![Just(TreeModel::Uniform), Just(TreeModel::Increasing)]
}

fn law() -> impl Strategy<Value = SplittingLaw> {
    prop_oneof![
        Just(SplittingLaw::Centroid),
        (0.05f64..20.0).prop_map(SplittingLaw::DirichletSym),
    ]
}

fn face_area(m: &CompactTriangulation) -> f64 {
    m.faces.iter().map(|f| triangle_area(&f.corners)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_counts(m in model(), n in 0usize..400, s in any::<u64>()) {
        let t = m.sample(n, Seed::new(s));
        prop_assert_eq!(t.n_internal(), n);
        prop_assert_eq!(t.n_leaves(), 2 * n + 1);
        prop_assert_eq!(t.len(), 3 * n + 1);
        prop_assert_eq!(&TernaryTree::from_children(&t.children_array()).unwrap(), &t);
        prop_assert_eq!(&m.sample(n, Seed::new(s)), &t);
    }

    #[test]
    fn words_round_trip(m in model(), n in 1usize..200, s in any::<u64>()) {
        let t = m.sample(n, Seed::new(s));
        for u in t.nodes() {
            let w = t.word(u);
            prop_assert_eq!(t.find(&w), Some(u));
            prop_assert_eq!(t.depth(u), w.len());
        }
        let leaves: Vec<_> = t.leaves().map(|l| t.word(l)).collect();
        let a = common_ancestor(&leaves[0], &leaves[leaves.len() - 1]);
        prop_assert!(a.is_prefix_of(&leaves[0]) && a.is_prefix_of(&leaves[leaves.len() - 1]));
        prop_assert!(t.find(&a).is_some_and(|x| !t.is_leaf(x)));
    }

    #[test]
    fn drawing_invariants(m in model(), n in 0usize..300, law in law(), s in any::<u64>()) {
        let seed = Seed::new(s);
        let ct = phi(&attach_splits(&m.sample(n, seed), &law, seed).unwrap());
        let d = psi(&ct).unwrap();
        prop_assert_eq!(d.vertices.len(), n);
        prop_assert_eq!(d.faces.len(), 2 * n + 1);
        prop_assert_eq!(d.segments.len(), 3 * n + 3);
        let whole = 3f64.sqrt() / 4.0;
        prop_assert!((face_area(&d) - whole).abs() < 1e-9);
        let alt = psi_inductive(&ct);
        prop_assert_eq!(alt.vertices.len(), n);
        for (p, q) in d.vertices.iter().zip(&alt.vertices) {
            prop_assert!(p.dist(*q) < 1e-9);
        }
        prop_assert_eq!(&ct.drop_coordinates().tree, &ct.tree);
    }

    #[test]
    fn documents_round_trip(m in model(), n in 0usize..150, law in law(), s in any::<u64>()) {
        let seed = Seed::new(s);
        let ct = phi(&attach_splits(&m.sample(n, seed), &law, seed).unwrap());
        let json = TreeDocument::from_coord_labelled(&ct, &law.to_string()).to_json();
        let back = TreeDocument::parse(&json).unwrap();
        prop_assert_eq!(&back.coord_labelled().unwrap(), &ct);
        prop_assert_eq!(back.to_json(), json);
    }

    #[test]
    fn fragmentation_partitions(n in 0usize..300, s in any::<u64>()) {
        let f = sample_fragmentation(n, Seed::new(s));
        prop_assert!(f.leaves_partition_unit());
        prop_assert_eq!(f.tree.n_internal(), n);
    }

    #[test]
    fn word_prefixes(letters in proptest::collection::vec(1u8..=3, 0..30)) {
        let w = NodeWord::from_letters(&letters).unwrap();
        prop_assert_eq!(w.prefixes().count(), letters.len() + 1);
        for p in w.prefixes() {
            prop_assert!(p.is_prefix_of(&w));
            prop_assert_eq!(&common_ancestor(&p, &w), &p);
        }
    }
}
