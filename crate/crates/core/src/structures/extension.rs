use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use super::{
    automorphisms, find_clique, ClassTag, ElemId, Element, FiniteStructure, Link, MapData, Morphism,
    MorphismKind, SIZE_CAP,
};
use crate::error::{Error, Result};

/// A one-point extension `A ↪· B`: `B` is generated by the image of `A` and one element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OnePointExtension {
    inclusion: Morphism,
    new_element: Element,
}

impl OnePointExtension {
    /// Checks that `inclusion` is an embedding and that its image together with
    /// `new_element` generates the target.
    pub fn new(inclusion: Morphism, new_element: Element) -> Result<Self> {
        let inclusion = if inclusion.kind() == MorphismKind::Homomorphism {
            inclusion.with_kind(MorphismKind::Embedding)?
        } else {
            inclusion
        };
        let base = inclusion.source();
        let ext = inclusion.target();
        match (&new_element, inclusion.map()) {
            (Element::Point(x), MapData::Points(t)) => {
                if *x as usize >= ext.len() {
                    return Err(Error::Structural(format!("new element {x} outside the extension")));
                }
                if ext.len() != base.len() + 1 || t.contains(x) {
                    return Err(Error::Contract(
                        "a relational one-point extension adds exactly one element".into(),
                    ));
                }
            }
            (Element::Join(x), MapData::Atoms(blocks)) => {
                if x.iter().any(|&a| a as usize >= ext.len()) {
                    return Err(Error::Structural("new element uses an unknown atom".into()));
                }
                let inside: BTreeSet<ElemId> = x.iter().copied().collect();
                let generated: usize = blocks
                    .iter()
                    .map(|b| {
                        let hit = b.iter().filter(|a| inside.contains(a)).count();
                        usize::from(hit > 0) + usize::from(hit < b.len())
                    })
                    .sum();
                if generated != ext.len() {
                    return Err(Error::Contract(
                        "the extension is not generated by the image and the new element".into(),
                    ));
                }
            }
            _ => return Err(Error::Contract("new element shape does not match the class".into())),
        }
        Ok(OnePointExtension {
            inclusion,
            new_element,
        })
    }

    pub fn base(&self) -> &Arc<FiniteStructure> {
        self.inclusion.source()
    }

    pub fn extension(&self) -> &Arc<FiniteStructure> {
        self.inclusion.target()
    }

    pub fn inclusion(&self) -> &Morphism {
        &self.inclusion
    }

    pub fn new_element(&self) -> &Element {
        &self.new_element
    }

    /// The new point for point classes.
    pub fn new_point(&self) -> Option<ElemId> {
        match self.new_element {
            Element::Point(x) => Some(x),
            Element::Join(_) => None,
        }
    }

    /// How the new point relates to each base element, in base order. For Boolean
    /// algebras: which base atoms the new element splits.
    pub fn point_type(&self) -> Vec<Link> {
        match (&self.new_element, self.inclusion.map()) {
            (Element::Point(x), MapData::Points(t)) => {
                t.iter().map(|&a| self.extension().link(a, *x)).collect()
            }
            (Element::Join(_), MapData::Atoms(blocks)) => blocks
                .iter()
                .map(|b| Link::Rel {
                    forward: b.len() > 1,
                    backward: false,
                })
                .collect(),
            _ => unreachable!("checked at construction"),
        }
    }
}

/// Every one-point extension of `a`, one per isomorphism class over `a`.
///
/// Isomorphism over `a` fixes `a` pointwise, so for point classes the list is indexed by
/// the new point's relations to the base; for Boolean algebras by the set of atoms split
/// (including the trivial extension that splits none). The extension always lists the
/// base elements first, unchanged, and the new point last.
pub fn enumerate_one_point_extensions(a: &Arc<FiniteStructure>) -> Result<Vec<OnePointExtension>> {
    let n = a.len();
    if n > SIZE_CAP {
        return Err(Error::capacity("one-point extension enumeration", n, SIZE_CAP));
    }
    a.validate().map_err(Error::InvalidStructure)?;
    let class = a.class();
    let new = n as ElemId;
    let mut out = Vec::new();
    let mut push_pairs = |extra: Vec<(ElemId, ElemId)>| -> Result<()> {
        let mut pairs = a.pairs();
        if class.is_order() {
            pairs.extend(a.elements().map(|x| (x, x)));
        }
        pairs.extend(extra);
        let ext = FiniteStructure::from_pairs(class, n + 1, &pairs)?;
        out.push(point_extension(a, ext)?);
        Ok(())
    };
    match class {
        ClassTag::Graph | ClassTag::KnFreeGraph(_) => {
            for mask in 0u32..(1 << n) {
                let nbhd: Vec<ElemId> = a.elements().filter(|&v| mask >> v & 1 == 1).collect();
                if let ClassTag::KnFreeGraph(k) = class {
                    let sub = a.induced(&nbhd)?;
                    if find_clique(&sub, k as usize - 1).is_some() {
                        continue;
                    }
                }
                push_pairs(nbhd.iter().map(|&v| (v, new)).collect())?;
            }
        }
        ClassTag::Digraph => {
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                let mut arcs = Vec::new();
                for v in a.elements() {
                    match c % 3 {
                        1 => arcs.push((v, new)),
                        2 => arcs.push((new, v)),
                        _ => {}
                    }
                    c /= 3;
                }
                push_pairs(arcs)?;
            }
        }
        ClassTag::Tournament => {
            for mask in 0u32..(1 << n) {
                let arcs = a
                    .elements()
                    .map(|v| if mask >> v & 1 == 1 { (v, new) } else { (new, v) })
                    .collect();
                push_pairs(arcs)?;
            }
        }
        ClassTag::LinearOrder => {
            let listing = a.order_listing().expect("linear order");
            for cut in 0..=n {
                let mut pairs: Vec<_> = listing[..cut].iter().map(|&v| (v, new)).collect();
                pairs.extend(listing[cut..].iter().map(|&v| (new, v)));
                pairs.push((new, new));
                push_pairs(pairs)?;
            }
        }
        ClassTag::Poset => {
            let closed = |mask: u32, down: bool| {
                a.elements().all(|x| {
                    mask >> x & 1 == 0
                        || a.elements().all(|y| {
                            let below = if down { a.related(y, x) } else { a.related(x, y) };
                            !below || mask >> y & 1 == 1
                        })
                })
            };
            let downs: Vec<u32> = (0u32..(1 << n)).filter(|&m| closed(m, true)).collect();
            let ups: Vec<u32> = (0u32..(1 << n)).filter(|&m| closed(m, false)).collect();
            for &d in &downs {
                for &u in &ups {
                    if d & u != 0 {
                        continue;
                    }
                    let compatible = a.elements().all(|x| {
                        d >> x & 1 == 0 || a.elements().all(|y| u >> y & 1 == 0 || a.related(x, y))
                    });
                    if !compatible {
                        continue;
                    }
                    let mut pairs = vec![(new, new)];
                    pairs.extend(a.elements().filter(|&x| d >> x & 1 == 1).map(|x| (x, new)));
                    pairs.extend(a.elements().filter(|&x| u >> x & 1 == 1).map(|x| (new, x)));
                    push_pairs(pairs)?;
                }
            }
        }
        ClassTag::BooleanAlgebra => {
            for mask in 0u32..(1 << n) {
                let mut blocks = Vec::with_capacity(n);
                let mut x = Vec::new();
                let mut next = 0;
                for atom in a.elements() {
                    if mask >> atom & 1 == 1 {
                        blocks.push(vec![next, next + 1]);
                        x.push(next);
                        next += 2;
                    } else {
                        blocks.push(vec![next]);
                        next += 1;
                    }
                }
                let ext = Arc::new(FiniteStructure::boolean_algebra(next as usize));
                let inc = Morphism::new(a.clone(), ext, MapData::Atoms(blocks), MorphismKind::Embedding)?;
                out.push(OnePointExtension::new(inc, Element::Join(x))?);
            }
        }
        ClassTag::RationalMetric(q) => {
            for values in katetov_grid(a, q, false, usize::MAX).expect("no limit") {
                let mut rows: Vec<Vec<Rational64>> =
                    a.elements().map(|x| a.elements().map(|y| a.dist(x, y)).collect()).collect();
                for (row, &v) in rows.iter_mut().zip(&values) {
                    row.push(v);
                }
                let mut last = values.clone();
                last.push(Rational64::zero());
                rows.push(last);
                let ext = FiniteStructure::rational_metric(q, rows)?;
                out.push(point_extension(a, ext)?);
            }
        }
    }
    Ok(out)
}

fn point_extension(a: &Arc<FiniteStructure>, ext: FiniteStructure) -> Result<OnePointExtension> {
    let n = a.len();
    let inc = Morphism::points(
        a.clone(),
        Arc::new(ext),
        a.elements().collect(),
        MorphismKind::Embedding,
    )?;
    OnePointExtension::new(inc, Element::Point(n as ElemId))
}

/// Value vectors on the `1/q` grid satisfying both Katětov inequalities, in
/// lexicographic order. With `allow_zero` false, zero values are skipped. Gives up with
/// `None` once more than `limit` vectors have been found.
pub(crate) fn katetov_grid(a: &FiniteStructure, q: u32, allow_zero: bool, limit: usize) -> Option<Vec<Vec<Rational64>>> {
    let n = a.len();
    let lo = if allow_zero { 0 } else { 1 };
    let steps: Vec<Rational64> = (lo..=q).map(|k| Rational64::new(k as i64, q as i64)).collect();
    let mut out = Vec::new();
    let mut cur: Vec<Rational64> = Vec::with_capacity(n);

    fn go(
        a: &FiniteStructure,
        steps: &[Rational64],
        cur: &mut Vec<Rational64>,
        out: &mut Vec<Vec<Rational64>>,
        limit: usize,
    ) -> bool {
        let x = cur.len();
        if x == a.len() {
            out.push(cur.clone());
            return out.len() <= limit;
        }
        for &v in steps {
            let ok = (0..x).all(|y| {
                let d = a.dist(x as ElemId, y as ElemId);
                let w = cur[y];
                (v - w).abs() <= d && d <= v + w
            });
            if ok {
                cur.push(v);
                let more = go(a, steps, cur, out, limit);
                cur.pop();
                if !more {
                    return false;
                }
            }
        }
        true
    }

    go(a, &steps, &mut cur, &mut out, limit).then_some(out)
}

fn link_key(l: &Link) -> (u8, Rational64) {
    match *l {
        Link::Rel { forward, backward } => (u8::from(forward) * 2 + u8::from(backward), Rational64::zero()),
        Link::Dist(d) => (4, d),
    }
}

/// Number of extensions in `exts` up to isomorphisms that restrict to an automorphism
/// of the base (rather than to the identity).
pub fn extension_orbit_count(base: &FiniteStructure, exts: &[OnePointExtension]) -> Result<usize> {
    let autos = automorphisms(base)?;
    let mut seen = BTreeSet::new();
    for e in exts {
        let ty: Vec<_> = e.point_type().iter().map(link_key).collect();
        let canon = autos
            .iter()
            .map(|sigma| {
                let mut moved = ty.clone();
                for (x, &sx) in sigma.iter().enumerate() {
                    moved[sx as usize] = ty[x];
                }
                moved
            })
            .min()
            .unwrap_or(ty);
        seen.insert(canon);
    }
    Ok(seen.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(s: FiniteStructure) -> usize {
        enumerate_one_point_extensions(&Arc::new(s)).unwrap().len()
    }

    #[test]
    fn small_counts() {
        assert_eq!(count(FiniteStructure::graph(0, &[]).unwrap()), 1);
        assert_eq!(count(FiniteStructure::graph(1, &[]).unwrap()), 2);
        assert_eq!(count(FiniteStructure::kn_free_graph(3, 2, &[(0, 1)]).unwrap()), 3);
        assert_eq!(count(FiniteStructure::chain(3)), 4);
        assert_eq!(count(FiniteStructure::digraph(2, &[]).unwrap()), 9);
        assert_eq!(count(FiniteStructure::tournament(2, &[(0, 1)]).unwrap()), 4);
        assert_eq!(count(FiniteStructure::boolean_algebra(2)), 4);
        // Over an antichain of two the new point has a down-set or an up-set, not both.
        assert_eq!(count(FiniteStructure::poset(2, &[]).unwrap()), 4 + 3);
    }

    #[test]
    fn metric_extensions_of_a_unit_pair() {
        let pair = FiniteStructure::grid_metric(2, &[vec![0, 2], vec![2, 0]]).unwrap();
        let exts = enumerate_one_point_extensions(&Arc::new(pair)).unwrap();
        // Nonzero pairs (u, v) on the half grid with |u - v| <= 1 <= u + v.
        assert_eq!(exts.len(), 4);
    }

    #[test]
    fn orbit_count_merges_symmetric_neighbourhoods() {
        let edge = Arc::new(FiniteStructure::graph(2, &[(0, 1)]).unwrap());
        let exts = enumerate_one_point_extensions(&edge).unwrap();
        assert_eq!(exts.len(), 4);
        assert_eq!(extension_orbit_count(&edge, &exts).unwrap(), 3);
    }
}
