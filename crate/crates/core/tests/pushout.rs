mod common;

use katetov::classes::k_object;
use katetov::pushout::{free_amalgam, generic_k, mixed_pushout, one_point_pushout, realized_types, realizes_all_extensions};
use katetov::structures::{all_morphisms, enumerate_one_point_extensions, ClassTag, FiniteStructure, Morphism, MorphismKind};
use katetov::Error;
use proptest::prelude::*;

use common::{arc, reps};

#[test]
fn free_amalgam_of_two_edges_over_a_vertex() {
    let v = arc(FiniteStructure::graph(1, &[]).unwrap());
    let e = arc(FiniteStructure::graph(2, &[(0, 1)]).unwrap());
    let j = Morphism::points(v, e, vec![0], MorphismKind::Embedding).unwrap();
    let am = free_amalgam(&j, &j).unwrap();
    assert_eq!(am.object.len(), 3);
    assert_eq!(am.object.pairs().len(), 2);
    assert_eq!(j.then(&am.left).unwrap(), j.then(&am.right).unwrap());
    assert!(am.left.with_kind(MorphismKind::Embedding).is_ok());
}

#[test]
fn pushout_size_is_a1_plus_one() {
    for a0 in reps(ClassTag::Graph, 2) {
        for a1 in reps(ClassTag::Graph, 3) {
            for f in all_morphisms(&a0, &a1, MorphismKind::Homomorphism) {
                for g in enumerate_one_point_extensions(&a0).unwrap() {
                    let sq = one_point_pushout(&f, &g).unwrap();
                    assert_eq!(sq.b.len(), a1.len() + 1);
                    assert_eq!(f.then(&sq.p).unwrap(), g.inclusion().then(&sq.q).unwrap());
                }
            }
        }
    }
}

#[test]
fn mixed_pushouts_compose_one_point_squares() {
    let a0 = arc(FiniteStructure::graph(1, &[]).unwrap());
    let a1 = arc(FiniteStructure::graph(2, &[(0, 1)]).unwrap());
    let a2 = arc(FiniteStructure::graph(3, &[(0, 1), (0, 2)]).unwrap());
    let f = Morphism::points(a0.clone(), a1, vec![1], MorphismKind::Homomorphism).unwrap();
    let g = Morphism::points(a0, a2, vec![0], MorphismKind::Embedding).unwrap();
    let sq = mixed_pushout(&f, &g).unwrap();
    assert_eq!(sq.b.len(), 4);
    assert!(sq.universality_certificate().unwrap().passed());
}

#[test]
fn generic_k_only_for_graphs() {
    let p = arc(FiniteStructure::poset(2, &[(0, 1)]).unwrap());
    assert!(matches!(generic_k(&p), Err(Error::Unsupported { .. } | Error::Contract(_))));
}

#[test]
fn generic_and_handcrafted_k_agree_on_graphs() {
    for a in reps(ClassTag::Graph, 4) {
        let g = generic_k(&a).unwrap();
        let h = k_object(&a).unwrap();
        assert_eq!(realized_types(&g), realized_types(&h));
        assert_eq!(realized_types(&g).len(), 1 << a.len());
        assert!(realizes_all_extensions(&g).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_point_pushouts_are_universal(i in 0usize..4, j in 0usize..8, pf in any::<prop::sample::Index>(), pg in any::<prop::sample::Index>()) {
        let a0s = reps(ClassTag::Graph, 2);
        let a1s = reps(ClassTag::Graph, 3);
        let (a0, a1) = (&a0s[i % a0s.len()], &a1s[j % a1s.len()]);
        let fs = all_morphisms(a0, a1, MorphismKind::Homomorphism);
        prop_assume!(!fs.is_empty());
        let gs = enumerate_one_point_extensions(a0).unwrap();
        let sq = one_point_pushout(&fs[pf.index(fs.len())], &gs[pg.index(gs.len())]).unwrap();
        prop_assert!(sq.p_one_point().is_ok());
        let rep = sq.universality_certificate().unwrap();
        prop_assert!(rep.passed(), "{:?}", rep.failure);
        prop_assert!(rep.largest_cocone <= sq.b.len());
    }
}
