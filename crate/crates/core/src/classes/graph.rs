use super::{charge, Payload};
use crate::error::Result;
use crate::structures::{ClassTag, ElemId, FiniteStructure};

/// Neighbourhoods of new vertices. For `Kn`-free graphs only sets spanning no
/// `K(n-1)` qualify; they are grown in increasing element order, pruning at the first clique.
pub(super) fn payloads(a: &FiniteStructure, budget: usize) -> Result<Vec<Payload>> {
    let limit = match a.class() {
        ClassTag::KnFreeGraph(n) => Some(n as usize - 1),
        _ => {
            if a.len() >= usize::BITS as usize - 1 || (1usize << a.len()) > budget {
                charge(usize::MAX, budget)?;
            }
            None
        }
    };
    let mut out = Vec::new();
    let mut cur = Vec::new();
    grow(a, limit, 0, &mut cur, &mut out, budget)?;
    Ok(out)
}

/// Whether `cur ∪ {v}` has a clique of size `limit` through `v`.
fn clique_through(a: &FiniteStructure, cur: &[ElemId], v: ElemId, limit: usize) -> bool {
    let nbrs: Vec<ElemId> = cur.iter().copied().filter(|&u| a.related(u, v)).collect();
    fn go(a: &FiniteStructure, cands: &[ElemId], need: usize) -> bool {
        if need == 0 {
            return true;
        }
        for (i, &u) in cands.iter().enumerate() {
            let rest: Vec<ElemId> = cands[i + 1..].iter().copied().filter(|&w| a.related(u, w)).collect();
            if go(a, &rest, need - 1) {
                return true;
            }
        }
        false
    }
    go(a, &nbrs, limit - 1)
}

fn grow(
    a: &FiniteStructure,
    limit: Option<usize>,
    from: ElemId,
    cur: &mut Vec<ElemId>,
    out: &mut Vec<Payload>,
    budget: usize,
) -> Result<()> {
    out.push(Payload::Set(cur.clone()));
    charge(out.len(), budget)?;
    for v in from..a.len() as ElemId {
        if let Some(k) = limit {
            if clique_through(a, cur, v, k) {
                continue;
            }
        }
        cur.push(v);
        grow(a, limit, v + 1, cur, out, budget)?;
        cur.pop();
    }
    Ok(())
}

pub(super) fn old_new(_: &FiniteStructure, x: ElemId, p: &Payload) -> (bool, bool) {
    let Payload::Set(s) = p else { unreachable!() };
    let hit = s.binary_search(&x).is_ok();
    (hit, hit)
}

/// Disjoint (in, out) pairs.
pub(super) fn digraph_payloads(a: &FiniteStructure, budget: usize) -> Result<Vec<Payload>> {
    let n = a.len() as u32;
    let total = 3usize.checked_pow(n).unwrap_or(usize::MAX);
    charge(total, budget)?;
    Ok((0..total)
        .map(|mut code| {
            let (mut ins, mut outs) = (Vec::new(), Vec::new());
            for v in 0..n {
                match code % 3 {
                    1 => ins.push(v),
                    2 => outs.push(v),
                    _ => {}
                }
                code /= 3;
            }
            Payload::Pair(ins, outs)
        })
        .collect())
}

pub(super) fn digraph_old_new(_: &FiniteStructure, x: ElemId, p: &Payload) -> (bool, bool) {
    let Payload::Pair(ins, outs) = p else { unreachable!() };
    (ins.binary_search(&x).is_ok(), outs.binary_search(&x).is_ok())
}
