use std::sync::Arc;

use super::{
    enumerate_one_point_extensions, find_isomorphism, ClassTag, ElemId, FiniteStructure, MapData, Morphism,
    MorphismKind, ISO_SIZE_CAP,
};
use crate::error::{Error, Result};

/// One representative of every isomorphism class of size `n`, grown one point at a time
/// from smaller representatives (every class here is hereditary).
pub fn enumerate_structures(class: ClassTag, n: usize) -> Result<Vec<Arc<FiniteStructure>>> {
    if n > ISO_SIZE_CAP {
        return Err(Error::capacity("structure enumeration", n, ISO_SIZE_CAP));
    }
    if class == ClassTag::BooleanAlgebra {
        if n == 0 {
            return Ok(Vec::new());
        }
        return Ok(vec![Arc::new(FiniteStructure::boolean_algebra(n))]);
    }
    let mut level = vec![Arc::new(FiniteStructure::empty(class))];
    for _ in 0..n {
        let mut next: Vec<Arc<FiniteStructure>> = Vec::new();
        for s in &level {
            for e in enumerate_one_point_extensions(s)? {
                let cand = e.extension().clone();
                let mut fresh = true;
                for rep in &next {
                    if find_isomorphism(rep, &cand)?.is_some() {
                        fresh = false;
                        break;
                    }
                }
                if fresh {
                    next.push(cand);
                }
            }
        }
        level = next;
    }
    Ok(level)
}

/// Every element table from `a` to `b`, well-formed but not checked for any kind.
///
/// For Boolean algebras a homomorphism `B(A) -> B(A')` is the preimage map of a function
/// `A' -> A`, so the tables are those preimage partitions.
pub fn all_maps(a: &FiniteStructure, b: &FiniteStructure) -> Vec<MapData> {
    let (m, n) = (a.len(), b.len());
    let (digits, base) = if a.class() == ClassTag::BooleanAlgebra { (n, m) } else { (m, n) };
    if base == 0 {
        return if digits == 0 { vec![empty_map(a.class(), m)] } else { Vec::new() };
    }
    let total = base.pow(digits as u32);
    (0..total)
        .map(|mut code| {
            let mut f = Vec::with_capacity(digits);
            for _ in 0..digits {
                f.push((code % base) as ElemId);
                code /= base;
            }
            if a.class() == ClassTag::BooleanAlgebra {
                let mut blocks = vec![Vec::new(); m];
                for (t, &s) in f.iter().enumerate() {
                    blocks[s as usize].push(t as ElemId);
                }
                MapData::Atoms(blocks)
            } else {
                MapData::Points(f)
            }
        })
        .collect()
}

fn empty_map(class: ClassTag, m: usize) -> MapData {
    if class == ClassTag::BooleanAlgebra {
        MapData::Atoms(vec![Vec::new(); m])
    } else {
        MapData::Points(Vec::new())
    }
}

/// Every morphism `a -> b` satisfying `kind`, labelled with that kind.
pub fn all_morphisms(
    a: &Arc<FiniteStructure>,
    b: &Arc<FiniteStructure>,
    kind: MorphismKind,
) -> Vec<Morphism> {
    all_maps(a, b)
        .into_iter()
        .filter_map(|map| Morphism::new(a.clone(), b.clone(), map, kind).ok())
        .collect()
}
