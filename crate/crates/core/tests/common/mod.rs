#![allow(dead_code)]

use std::sync::Arc;

use katetov::structures::{enumerate_structures, ClassTag, ElemId, FiniteStructure, MorphismKind};
use num_rational::Rational64;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Res<T> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn arc(s: FiniteStructure) -> Arc<FiniteStructure> {
    Arc::new(s)
}

/// Isomorphism representatives of every size up to `max` (Boolean algebras start at one atom).
pub fn reps(class: ClassTag, max: usize) -> Vec<Arc<FiniteStructure>> {
    let lo = usize::from(class == ClassTag::BooleanAlgebra);
    (lo..=max).flat_map(|n| enumerate_structures(class, n).unwrap()).collect()
}

/// The morphisms K acts on in `class`.
pub fn kind_for(class: ClassTag) -> MorphismKind {
    if class.allows_homomorphisms() {
        MorphismKind::Homomorphism
    } else {
        MorphismKind::Embedding
    }
}

/// A random partial map `dom -> img` of `k` points of `level`: link-preserving when
/// `hom` is false, relation-preserving otherwise.
pub fn random_partial(
    rng: &mut ChaCha8Rng,
    level: &FiniteStructure,
    k: usize,
    hom: bool,
) -> Option<(Vec<ElemId>, Vec<ElemId>)> {
    let ids: Vec<ElemId> = level.elements().collect();
    if ids.len() < k {
        return None;
    }
    let dom: Vec<ElemId> = ids.choose_multiple(rng, k).copied().collect();
    for _ in 0..4000 {
        let img: Vec<ElemId> = if hom {
            (0..k).map(|_| ids[rng.gen_range(0..ids.len())]).collect()
        } else {
            ids.choose_multiple(rng, k).copied().collect()
        };
        let ok = (0..k).all(|a| {
            (0..k).all(|b| {
                let (x, y, u, v) = (dom[a], dom[b], img[a], img[b]);
                if hom {
                    !level.related(x, y) || level.related(u, v)
                } else {
                    level.link(x, y) == level.link(u, v)
                }
            })
        });
        if ok {
            return Some((dom, img));
        }
    }
    None
}

/// Number of one-point extensions of `a` fixing `a` pointwise, counted from the definition.
pub fn extension_oracle(a: &FiniteStructure) -> usize {
    let n = a.len();
    let subsets = |pred: &dyn Fn(&[ElemId]) -> bool| -> Vec<Vec<ElemId>> {
        (0..1usize << n)
            .map(|m| (0..n as ElemId).filter(|&x| m >> x & 1 == 1).collect::<Vec<_>>())
            .filter(|s| pred(s))
            .collect()
    };
    match a.class() {
        ClassTag::Graph | ClassTag::Tournament => 1 << n,
        ClassTag::KnFreeGraph(3) => subsets(&|s| s.iter().all(|&x| s.iter().all(|&y| !a.related(x, y)))).len(),
        ClassTag::Digraph => 3usize.pow(n as u32),
        ClassTag::LinearOrder => n + 1,
        ClassTag::Poset => {
            let down = subsets(&|s| s.iter().all(|&x| a.elements().all(|y| !a.related(y, x) || s.contains(&y))));
            let up = subsets(&|s| s.iter().all(|&x| a.elements().all(|y| !a.related(x, y) || s.contains(&y))));
            let mut count = 0;
            for d in &down {
                for u in &up {
                    if d.iter().all(|x| !u.contains(x)) && d.iter().all(|&x| u.iter().all(|&y| a.related(x, y))) {
                        count += 1;
                    }
                }
            }
            count
        }
        ClassTag::RationalMetric(q) => {
            let mut count = 0;
            for code in 0..(q as usize).pow(n as u32) {
                let mut c = code;
                let v: Vec<Rational64> = (0..n)
                    .map(|_| {
                        let r = Rational64::new((c % q as usize) as i64 + 1, q as i64);
                        c /= q as usize;
                        r
                    })
                    .collect();
                let ok = a.elements().all(|x| {
                    a.elements().all(|y| {
                        let d = a.dist(x, y);
                        (v[x as usize] - v[y as usize]).abs() <= d && d <= v[x as usize] + v[y as usize]
                    })
                });
                count += usize::from(ok);
            }
            count
        }
        _ => unreachable!(),
    }
}
