use std::sync::Arc;

use num_rational::Rational64;

use super::{ClassTag, ElemId, FiniteStructure, MapData, Morphism, MorphismKind};
use crate::error::{Error, Result};

/// Largest structure the permutation search accepts.
pub const ISO_SIZE_CAP: usize = 9;

/// Per-element isomorphism invariant used to prune the search.
fn signature(s: &FiniteStructure, x: ElemId) -> Vec<Rational64> {
    if s.class().is_relational() {
        let out = s.elements().filter(|&y| y != x && s.related(x, y)).count();
        let inc = s.elements().filter(|&y| y != x && s.related(y, x)).count();
        vec![Rational64::from_integer(out as i64), Rational64::from_integer(inc as i64)]
    } else {
        let mut d: Vec<_> = s.elements().map(|y| s.dist(x, y)).collect();
        d.sort_unstable();
        d
    }
}

/// Visits every link-preserving bijection `a -> b` that agrees with `fixed`, in
/// lexicographic order of the image table. Stops when `visit` returns false.
pub(crate) fn for_each_isomorphism(
    a: &FiniteStructure,
    b: &FiniteStructure,
    fixed: &[Option<ElemId>],
    visit: &mut dyn FnMut(&[ElemId]) -> bool,
) {
    let n = a.len();
    if n != b.len() {
        return;
    }
    let sig_a: Vec<_> = a.elements().map(|x| signature(a, x)).collect();
    let sig_b: Vec<_> = b.elements().map(|y| signature(b, y)).collect();
    let mut table = vec![0 as ElemId; n];
    let mut used = vec![false; n];

    fn go(
        x: usize,
        a: &FiniteStructure,
        b: &FiniteStructure,
        fixed: &[Option<ElemId>],
        sig_a: &[Vec<Rational64>],
        sig_b: &[Vec<Rational64>],
        table: &mut [ElemId],
        used: &mut [bool],
        visit: &mut dyn FnMut(&[ElemId]) -> bool,
    ) -> bool {
        if x == a.len() {
            return visit(table);
        }
        let candidates: Vec<ElemId> = match fixed.get(x).copied().flatten() {
            Some(y) => vec![y],
            None => b.elements().collect(),
        };
        for y in candidates {
            if used[y as usize] || sig_a[x] != sig_b[y as usize] {
                continue;
            }
            let ok = (0..x).all(|p| {
                let py = table[p];
                a.link(x as ElemId, p as ElemId) == b.link(y, py)
                    && a.link(p as ElemId, x as ElemId) == b.link(py, y)
            });
            if !ok {
                continue;
            }
            table[x] = y;
            used[y as usize] = true;
            let keep_going = go(x + 1, a, b, fixed, sig_a, sig_b, table, used, visit);
            used[y as usize] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }

    go(0, a, b, fixed, &sig_a, &sig_b, &mut table, &mut used, visit);
}

fn check_cap(a: &FiniteStructure, b: &FiniteStructure) -> Result<()> {
    let n = a.len().max(b.len());
    if n > ISO_SIZE_CAP {
        return Err(Error::capacity("isomorphism search", n, ISO_SIZE_CAP));
    }
    Ok(())
}

/// First isomorphism `a -> b` in lexicographic order of the image table, if any.
pub fn find_isomorphism(a: &Arc<FiniteStructure>, b: &Arc<FiniteStructure>) -> Result<Option<Morphism>> {
    if a.class() != b.class() {
        return Ok(None);
    }
    check_cap(a, b)?;
    if a.class() == ClassTag::BooleanAlgebra {
        if a.len() != b.len() {
            return Ok(None);
        }
        let map = MapData::Atoms(a.elements().map(|x| vec![x]).collect());
        return Morphism::new(a.clone(), b.clone(), map, MorphismKind::Isomorphism).map(Some);
    }
    let mut found = None;
    for_each_isomorphism(a, b, &[], &mut |t| {
        found = Some(t.to_vec());
        false
    });
    found
        .map(|t| Morphism::points(a.clone(), b.clone(), t, MorphismKind::Isomorphism))
        .transpose()
}

/// Alias of [`find_isomorphism`].
pub fn iso_test(a: &Arc<FiniteStructure>, b: &Arc<FiniteStructure>) -> Result<Option<Morphism>> {
    find_isomorphism(a, b)
}

/// All automorphisms as permutation tables (atom permutations for Boolean algebras).
pub fn automorphisms(a: &FiniteStructure) -> Result<Vec<Vec<ElemId>>> {
    check_cap(a, a)?;
    let mut out = Vec::new();
    if a.class() == ClassTag::BooleanAlgebra {
        let free = FiniteStructure::unchecked_binary(ClassTag::Graph, a.len(), &[])?;
        for_each_isomorphism(&free, &free, &[], &mut |t| {
            out.push(t.to_vec());
            true
        });
    } else {
        for_each_isomorphism(a, a, &[], &mut |t| {
            out.push(t.to_vec());
            true
        });
    }
    Ok(out)
}
