use std::sync::Arc;

use super::{charge, KElement, KImage, KObjectResult, Payload};
use crate::error::{Error, Result};
use crate::structures::{ElemId, Element, FiniteStructure, MapData, Morphism, MorphismKind, OnePointExtension};

/// `K(B(A)) = B({0,1} × A)`; atom `⟨i, a⟩` sits at index `i·|A| + a`.
pub(super) fn k_object(a: &Arc<FiniteStructure>, budget: usize) -> Result<KObjectResult> {
    let n = a.len();
    charge(2 * n, budget)?;
    let index = (0..2u8)
        .flat_map(|bit| a.elements().map(move |atom| KElement::New(Payload::Split { bit, atom })))
        .collect();
    KObjectResult::assemble(a, FiniteStructure::boolean_algebra(2 * n), index)
}

/// `K(f)(⟨i, a⟩) = ⋁ ({i} × S(a))` where `f(a) = ⋁ S(a)`.
pub(super) fn map_element(f: &Morphism, e: &KElement) -> Result<KImage> {
    let KElement::New(Payload::Split { bit, atom }) = e else {
        return Err(Error::Contract(format!("{e:?} is not an atom of K(B(A))")));
    };
    let table = f.atom_table().expect("Boolean morphism");
    let block = table
        .get(*atom as usize)
        .ok_or_else(|| Error::Structural(format!("atom {atom} outside the source")))?;
    Ok(KImage::Join(
        block
            .iter()
            .map(|&b| KElement::New(Payload::Split { bit: *bit, atom: b }))
            .collect(),
    ))
}

/// Atoms of `B(A')` inside an unsplit `j(a)` go to `⟨0,a⟩ ∨ ⟨1,a⟩`; a split `j(a)` sends
/// `x ∧ j(a)` to `⟨0,a⟩` and `x̄ ∧ j(a)` to `⟨1,a⟩`.
pub(super) fn resolve(e: &OnePointExtension, ka: &KObjectResult) -> Result<Morphism> {
    let n = e.base().len() as ElemId;
    let blocks = e.inclusion().atom_table().expect("Boolean inclusion");
    let Element::Join(x) = e.new_element() else { unreachable!() };
    let mut g = vec![Vec::new(); e.extension().len()];
    for (a, block) in blocks.iter().enumerate() {
        let a = a as ElemId;
        match block.as_slice() {
            [only] => g[*only as usize] = vec![a, n + a],
            [p, q] => {
                let (inside, outside) = if x.binary_search(p).is_ok() { (p, q) } else { (q, p) };
                g[*inside as usize] = vec![a];
                g[*outside as usize] = vec![n + a];
            }
            _ => {
                return Err(Error::Contract(
                    "an atom of a one-point Boolean extension splits into at most two".into(),
                ))
            }
        }
    }
    Morphism::new(
        e.extension().clone(),
        ka.object().clone(),
        MapData::Atoms(g),
        MorphismKind::Embedding,
    )
}
