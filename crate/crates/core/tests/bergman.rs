mod common;

use katetov::bergman::{
    build_chain, encode_word, graph_retraction, jep, jep_retractions, verify_distortion, EndoSequence, Generator,
    MAX_CHAIN_DEPTH,
};
use katetov::structures::{all_morphisms, ClassTag, FiniteStructure, Morphism, MorphismKind};
use katetov::tower::{TowerAddress, TowerHandle};
use katetov::Error;
use proptest::prelude::*;

use common::arc;

#[test]
fn chain_levels_are_disjoint_copies() {
    let mut t = TowerHandle::new(arc(FiniteStructure::poset(2, &[(0, 1)]).unwrap())).unwrap();
    let c = build_chain(&mut t, 0, 4).unwrap();
    assert_eq!(c.level_sizes(), [2, 4, 6, 8]);
    let b = arc(FiniteStructure::boolean_algebra(2));
    let mut t = TowerHandle::new(b).unwrap();
    let c = build_chain(&mut t, 0, 3).unwrap();
    assert_eq!(c.level_sizes(), [2, 4, 8]);
}

#[test]
fn chain_depth_is_capped() {
    let mut t = TowerHandle::new(arc(FiniteStructure::graph(1, &[]).unwrap())).unwrap();
    assert!(matches!(build_chain(&mut t, 0, MAX_CHAIN_DEPTH + 1), Err(Error::Capacity { .. })));
    assert!(build_chain(&mut t, 0, 0).is_err());
}

#[test]
fn retractions_fold_the_coproduct() {
    for c in [
        arc(FiniteStructure::graph(3, &[(0, 1)]).unwrap()),
        arc(FiniteStructure::poset(3, &[(0, 1)]).unwrap()),
        arc(FiniteStructure::discrete_metric(2, 2)),
    ] {
        let (pair, ls, rs) = jep_retractions(&c).unwrap();
        let id = Morphism::identity(c.clone());
        assert_eq!(pair.left.then(&ls).unwrap(), id);
        assert_eq!(pair.right.then(&rs).unwrap(), id);
        assert!(pair.left.with_kind(MorphismKind::Embedding).is_ok());
    }
    let k1 = arc(FiniteStructure::graph(1, &[]).unwrap());
    assert_eq!(jep(&k1, &k1).unwrap().object.len(), 2);
}

#[test]
fn words_spell_the_sequence() {
    let w = encode_word(3).unwrap();
    assert_eq!(w.to_string(), "β̃τ̃τ̃φ̃σ̃σ̃α̃");
    assert_eq!(w.letters.first(), Some(&Generator::Beta));
    assert!(encode_word(0).is_err());
}

#[test]
fn graph_retraction_fixes_the_old_level() {
    let mut t = TowerHandle::new(arc(FiniteStructure::graph(2, &[(0, 1)]).unwrap())).unwrap();
    let r = graph_retraction(&mut t, 1).unwrap();
    let top = r.target_level().max(2);
    t.expand_to(top).unwrap();
    let lvl = t.level(top).unwrap().clone();
    let image = |x: usize| t.resolve(r.table[x], top).unwrap();
    for x in 0..t.level(1).unwrap().len() {
        assert_eq!(r.table[x], t.canonical(TowerAddress::new(1, x as u32)).unwrap());
    }
    let l2 = t.level(2).unwrap().clone();
    for (x, y) in l2.pairs() {
        assert!(lvl.related(image(x as usize), image(y as usize)));
    }
    let mut p = TowerHandle::new(arc(FiniteStructure::poset(1, &[]).unwrap())).unwrap();
    assert!(matches!(graph_retraction(&mut p, 0), Err(Error::Unsupported { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn distortion_identities_hold(which in 0usize..3, picks in prop::collection::vec(any::<prop::sample::Index>(), 3)) {
        let seed = [
            arc(FiniteStructure::graph(2, &[(0, 1)]).unwrap()),
            arc(FiniteStructure::poset(2, &[]).unwrap()),
            arc(FiniteStructure::discrete_metric(2, 2)),
        ][which].clone();
        let mut t = TowerHandle::new(seed).unwrap();
        let c = build_chain(&mut t, 0, 3).unwrap();
        let ends = all_morphisms(c.base(), c.base(), MorphismKind::Homomorphism);
        let maps = picks.iter().map(|i| ends[i.index(ends.len())].clone()).collect();
        let fs = EndoSequence::new(c.base(), maps).unwrap();
        let rep = verify_distortion(&c, &fs, 2).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep.mismatches);
        prop_assert!(rep.counts.iter().all(|k| k.checked > 0 && k.failed == 0));
    }
}

#[test]
fn classes_without_a_retractive_jep_functor_are_refused() {
    for seed in [FiniteStructure::chain(1), FiniteStructure::empty(ClassTag::Tournament)] {
        let mut t = TowerHandle::new(arc(seed)).unwrap();
        assert!(matches!(build_chain(&mut t, 0, 2), Err(Error::Unsupported { .. })));
    }
}
