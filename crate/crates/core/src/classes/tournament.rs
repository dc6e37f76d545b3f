use super::{charge, Payload};
use crate::error::Result;
use crate::structures::{ElemId, FiniteStructure};

/// All sequences over the vertices of length at most their number, repetitions allowed.
pub(super) fn payloads(a: &FiniteStructure, budget: usize) -> Result<Vec<Payload>> {
    let n = a.len();
    let mut total: usize = 0;
    let mut layer: usize = 1;
    for _ in 0..=n {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(n);
    }
    charge(total, budget)?;
    let mut out = Vec::with_capacity(total);
    let mut frontier: Vec<Vec<ElemId>> = vec![Vec::new()];
    for _ in 0..=n {
        let mut next = Vec::new();
        for s in &frontier {
            if s.len() < n {
                for v in a.elements() {
                    let mut t = s.clone();
                    t.push(v);
                    next.push(t);
                }
            }
        }
        out.extend(frontier.drain(..).map(Payload::Sequence));
        frontier = next;
    }
    Ok(out)
}

pub(super) fn old_new(_: &FiniteStructure, x: ElemId, p: &Payload) -> (bool, bool) {
    let Payload::Sequence(s) = p else { unreachable!() };
    let hit = s.contains(&x);
    (hit, !hit)
}

/// Shorter sequences point to longer ones; equal lengths compare at the first difference.
pub(super) fn new_new(a: &FiniteStructure, p: &Payload, q: &Payload) -> bool {
    let (Payload::Sequence(s), Payload::Sequence(t)) = (p, q) else { unreachable!() };
    if s.len() != t.len() {
        return s.len() < t.len();
    }
    match s.iter().zip(t).find(|(x, y)| x != y) {
        Some((&x, &y)) => a.related(x, y),
        None => false,
    }
}
