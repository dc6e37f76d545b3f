use super::{charge, KElement, Payload};
use crate::error::Result;
use crate::structures::{ElemId, FiniteStructure, Morphism};

/// The `n + 1` cuts (below, above) of a linear order.
pub(super) fn cut_payloads(a: &FiniteStructure, budget: usize) -> Result<Vec<Payload>> {
    charge(a.len() + 1, budget)?;
    let listing = a.order_listing().expect("linear order");
    Ok((0..=listing.len())
        .map(|k| {
            let mut below = listing[..k].to_vec();
            let mut above = listing[k..].to_vec();
            below.sort_unstable();
            above.sort_unstable();
            Payload::Pair(below, above)
        })
        .collect())
}

pub(super) fn cut_old_new(_: &FiniteStructure, x: ElemId, p: &Payload) -> (bool, bool) {
    let Payload::Pair(below, above) = p else { unreachable!() };
    (below.binary_search(&x).is_ok(), above.binary_search(&x).is_ok())
}

/// `(U1, V1) <= (U2, V2)` iff some element lies above the first cut and below the second.
pub(super) fn cut_new_new(_: &FiniteStructure, p: &Payload, q: &Payload) -> bool {
    let (Payload::Pair(_, above), Payload::Pair(below, _)) = (p, q) else { unreachable!() };
    above.iter().any(|x| below.binary_search(x).is_ok())
}

/// A cut goes to the cut below the up-closure of the image of its upper part.
pub(super) fn map_cut(f: &Morphism, above: &[ElemId]) -> KElement {
    let b = f.target();
    let images: Vec<ElemId> = above.iter().map(|&v| f.at(v)).collect();
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for y in b.elements() {
        if images.iter().any(|&w| b.related(w, y)) {
            hi.push(y);
        } else {
            lo.push(y);
        }
    }
    KElement::New(Payload::Pair(lo, hi))
}

/// Pairs `(U, V)` of disjoint sets with every element of `U` below every element of `V`.
pub(super) fn poset_payloads(a: &FiniteStructure, budget: usize) -> Result<Vec<Payload>> {
    let mut out = Vec::new();
    let mut u = Vec::new();
    grow_lower(a, 0, &mut u, &mut out, budget)?;
    Ok(out)
}

fn grow_lower(
    a: &FiniteStructure,
    from: ElemId,
    u: &mut Vec<ElemId>,
    out: &mut Vec<Payload>,
    budget: usize,
) -> Result<()> {
    let cands: Vec<ElemId> = a
        .elements()
        .filter(|v| u.binary_search(v).is_err() && u.iter().all(|&x| a.related(x, *v)))
        .collect();
    let mut v = Vec::new();
    grow_upper(&cands, 0, u, &mut v, out, budget)?;
    for x in from..a.len() as ElemId {
        u.push(x);
        grow_lower(a, x + 1, u, out, budget)?;
        u.pop();
    }
    Ok(())
}

fn grow_upper(
    cands: &[ElemId],
    from: usize,
    u: &[ElemId],
    v: &mut Vec<ElemId>,
    out: &mut Vec<Payload>,
    budget: usize,
) -> Result<()> {
    out.push(Payload::Pair(u.to_vec(), v.clone()));
    charge(out.len(), budget)?;
    for i in from..cands.len() {
        v.push(cands[i]);
        grow_upper(cands, i + 1, u, v, out, budget)?;
        v.pop();
    }
    Ok(())
}

pub(super) fn poset_old_new(a: &FiniteStructure, x: ElemId, p: &Payload) -> (bool, bool) {
    let Payload::Pair(u, v) = p else { unreachable!() };
    (u.iter().any(|&y| a.related(x, y)), v.iter().any(|&y| a.related(y, x)))
}

pub(super) fn poset_new_new(a: &FiniteStructure, p: &Payload, q: &Payload) -> bool {
    let (Payload::Pair(_, v1), Payload::Pair(u2, _)) = (p, q) else { unreachable!() };
    v1.iter().any(|&x| u2.iter().any(|&y| a.related(x, y)))
}

/// `(f(U), f(V))`, or the old element both sides were collapsed onto.
pub(super) fn map_poset_pair(u: Vec<ElemId>, v: Vec<ElemId>) -> KElement {
    match u.iter().find(|x| v.binary_search(x).is_ok()) {
        Some(&c) => KElement::Old(c),
        None => KElement::New(Payload::Pair(u, v)),
    }
}
