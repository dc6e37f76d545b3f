//! The hand-built Katětov functors: `K` on objects and morphisms, the natural embedding
//! `η: A ↪ K(A)`, and the map realizing a one-point extension inside `K(A)`.
//!
//! Point classes list the old elements first, in their original order, so `η` is the
//! identity on ids; new elements follow in lexicographic order of their payloads. For
//! Boolean algebras `K(B(A)) = B({0,1} × A)` with atom `⟨i, a⟩` at index `i·|A| + a`.

mod boolean;
mod graph;
mod order;
mod tournament;

use std::collections::HashMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric;
use crate::structures::{
    empty_rows, ClassTag, ElemId, Element, FiniteStructure, MapData, Morphism, MorphismKind,
    OnePointExtension,
};

/// Largest `K(A)` materialized by default, in elements (atoms for Boolean algebras).
pub const DEFAULT_ELEMENT_BUDGET: usize = 50_000;

/// What a new element of `K(A)` stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Payload {
    /// Graphs: the neighbourhood among the old vertices.
    Set(Vec<ElemId>),
    /// Digraphs: (in-neighbours, out-neighbours). Linear orders: the cut (below, above).
    /// Posets: (elements it lies above, elements it lies below).
    Pair(Vec<ElemId>, Vec<ElemId>),
    /// Tournaments: a sequence over the old vertices of length at most their number.
    Sequence(Vec<ElemId>),
    /// Boolean algebras: the atom `⟨bit, atom⟩`.
    Split { bit: u8, atom: ElemId },
    /// Metric spaces: a Katětov function with no zero value.
    Katetov(Vec<Rational64>),
}

/// Descriptor of an element of `K(A)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KElement {
    Old(ElemId),
    New(Payload),
}

/// Image of a `K(A)` element under `K(f)`: one element, or a join of atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KImage {
    One(KElement),
    Join(Vec<KElement>),
}

/// `K(A)` together with `η_A` and the descriptor of every element.
#[derive(Clone, Debug)]
pub struct KObjectResult {
    object: Arc<FiniteStructure>,
    eta: Morphism,
    index: Vec<KElement>,
    lookup: HashMap<KElement, ElemId>,
}

impl KObjectResult {
    pub(crate) fn assemble(base: &Arc<FiniteStructure>, object: FiniteStructure, index: Vec<KElement>) -> Result<Self> {
        let object = Arc::new(object);
        let lookup: HashMap<_, _> = index
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as ElemId))
            .collect();
        debug_assert_eq!(lookup.len(), index.len(), "duplicate payloads");
        let map = if base.class() == ClassTag::BooleanAlgebra {
            let n = base.len() as ElemId;
            MapData::Atoms(base.elements().map(|a| vec![a, n + a]).collect())
        } else {
            MapData::Points(base.elements().map(|a| lookup[&KElement::Old(a)]).collect())
        };
        let eta = Morphism::new(base.clone(), object.clone(), map, MorphismKind::Embedding)?;
        Ok(KObjectResult {
            object,
            eta,
            index,
            lookup,
        })
    }

    pub fn base(&self) -> &Arc<FiniteStructure> {
        self.eta.source()
    }

    pub fn object(&self) -> &Arc<FiniteStructure> {
        &self.object
    }

    pub fn eta(&self) -> &Morphism {
        &self.eta
    }

    pub fn index(&self) -> &[KElement] {
        &self.index
    }

    pub fn element(&self, id: ElemId) -> &KElement {
        &self.index[id as usize]
    }

    pub fn id_of(&self, e: &KElement) -> Option<ElemId> {
        self.lookup.get(e).copied()
    }

    fn require(&self, e: &KElement) -> Result<ElemId> {
        self.id_of(e)
            .ok_or_else(|| Error::Structural(format!("{e:?} is not an element of K(A)")))
    }
}

/// `K(A)` with the default element budget.
pub fn k_object(a: &Arc<FiniteStructure>) -> Result<KObjectResult> {
    k_object_with_budget(a, DEFAULT_ELEMENT_BUDGET)
}

/// `K(A)`, failing with a capacity error before materializing more than `budget` elements.
pub fn k_object_with_budget(a: &Arc<FiniteStructure>, budget: usize) -> Result<KObjectResult> {
    a.validate().map_err(Error::InvalidStructure)?;
    let class = a.class();
    if class == ClassTag::BooleanAlgebra {
        return boolean::k_object(a, budget);
    }
    if let ClassTag::RationalMetric(_) = class {
        return metric::sphere_k_object_with_budget(a, budget);
    }
    let budget_new = budget.saturating_sub(a.len());
    let mut payloads = match class {
        ClassTag::Graph | ClassTag::KnFreeGraph(_) => graph::payloads(a, budget_new)?,
        ClassTag::Digraph => graph::digraph_payloads(a, budget_new)?,
        ClassTag::LinearOrder => order::cut_payloads(a, budget_new)?,
        ClassTag::Poset => order::poset_payloads(a, budget_new)?,
        ClassTag::Tournament => tournament::payloads(a, budget_new)?,
        _ => unreachable!(),
    };
    payloads.sort_unstable();
    build_relational(a, payloads)
}

/// The substructure of `K(A)` on the old elements followed by the given new payloads, in
/// that order.
pub fn k_restricted(a: &Arc<FiniteStructure>, payloads: Vec<Payload>) -> Result<KObjectResult> {
    let class = a.class();
    match class {
        ClassTag::BooleanAlgebra => Err(Error::Unsupported {
            class,
            what: "restricted K objects",
        }),
        ClassTag::RationalMetric(q) => {
            let news = payloads
                .into_iter()
                .map(|p| match p {
                    Payload::Katetov(v)
                        if v.len() == a.len()
                            && v.iter().all(|t| *t > Rational64::from_integer(0) && *t <= Rational64::from_integer(1))
                            && metric::is_katetov(a, &v) =>
                    {
                        Ok(v)
                    }
                    other => Err(Error::Contract(format!("{other:?} is not a sphere point over the base"))),
                })
                .collect::<Result<Vec<_>>>()?;
            metric::sphere_build(a, q, news)
        }
        _ => build_relational(a, payloads),
    }
}

fn build_relational(a: &Arc<FiniteStructure>, payloads: Vec<Payload>) -> Result<KObjectResult> {
    let class = a.class();
    let old_new: fn(&FiniteStructure, ElemId, &Payload) -> (bool, bool) = match class {
        ClassTag::Graph | ClassTag::KnFreeGraph(_) => graph::old_new,
        ClassTag::Digraph => graph::digraph_old_new,
        ClassTag::LinearOrder => order::cut_old_new,
        ClassTag::Poset => order::poset_old_new,
        _ => tournament::old_new,
    };
    // Graph-like payloads are never related to each other.
    let new_new: Option<fn(&FiniteStructure, &Payload, &Payload) -> bool> = match class {
        ClassTag::Graph | ClassTag::KnFreeGraph(_) | ClassTag::Digraph => None,
        ClassTag::LinearOrder => Some(order::cut_new_new),
        ClassTag::Poset => Some(order::poset_new_new),
        _ => Some(tournament::new_new),
    };
    let n = a.len();
    let total = n + payloads.len();
    let mut rows: Vec<FixedBitSet> = empty_rows(total);
    for x in a.elements() {
        for y in a.elements() {
            if a.related(x, y) {
                rows[x as usize].insert(y as usize);
            }
        }
    }
    for (j, p) in payloads.iter().enumerate() {
        let pj = n + j;
        for x in a.elements() {
            let (to, from) = old_new(a, x, p);
            if to {
                rows[x as usize].insert(pj);
            }
            if from {
                rows[pj].insert(x as usize);
            }
        }
        if class.is_order() {
            rows[pj].insert(pj);
        }
        if let Some(new_new) = new_new {
            for (k, p2) in payloads.iter().enumerate() {
                if k != j && new_new(a, p, p2) {
                    rows[pj].insert(n + k);
                }
            }
        }
    }
    let object = FiniteStructure::from_rows(class, rows);
    debug_assert!(object.validate().is_ok(), "{:?}", object.validate());
    let mut index: Vec<KElement> = a.elements().map(KElement::Old).collect();
    index.extend(payloads.into_iter().map(KElement::New));
    KObjectResult::assemble(a, object, index)
}

/// Fails with a capacity error once `count` exceeds `budget`.
pub(crate) fn charge(count: usize, budget: usize) -> Result<()> {
    if count > budget {
        Err(Error::capacity("new elements of K(A)", format!("more than {budget}"), budget))
    } else {
        Ok(())
    }
}

/// Checks that the class's category contains `f`.
pub fn check_kind_allowed(class: ClassTag, kind: MorphismKind) -> Result<()> {
    if kind == MorphismKind::Homomorphism && !class.allows_homomorphisms() {
        return Err(Error::Contract(format!(
            "the Katětov functor on {class} acts on embeddings only; homomorphisms are not in its category"
        )));
    }
    Ok(())
}

/// Image of one `K(A)` descriptor under `K(f)`.
pub fn map_k_element(f: &Morphism, e: &KElement) -> Result<KImage> {
    let class = f.source().class();
    if class == ClassTag::BooleanAlgebra {
        return boolean::map_element(f, e);
    }
    let image = |xs: &[ElemId]| -> Vec<ElemId> {
        let mut out: Vec<ElemId> = xs.iter().map(|&x| f.at(x)).collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let out = match e {
        KElement::Old(x) => KElement::Old(f.at(*x)),
        KElement::New(p) => match (class, p) {
            (ClassTag::Graph | ClassTag::KnFreeGraph(_), Payload::Set(s)) => KElement::New(Payload::Set(image(s))),
            (ClassTag::Digraph, Payload::Pair(i, o)) => KElement::New(Payload::Pair(image(i), image(o))),
            (ClassTag::LinearOrder, Payload::Pair(_, v)) => order::map_cut(f, v),
            (ClassTag::Poset, Payload::Pair(u, v)) => order::map_poset_pair(image(u), image(v)),
            (ClassTag::Tournament, Payload::Sequence(s)) => {
                KElement::New(Payload::Sequence(s.iter().map(|&x| f.at(x)).collect()))
            }
            (ClassTag::RationalMetric(_), Payload::Katetov(values)) => metric::map_katetov_payload(f, values)?,
            _ => return Err(Error::Contract(format!("payload {p:?} does not belong to class {class}"))),
        },
    };
    Ok(KImage::One(out))
}

/// `K(f): K(A) -> K(B)` given both `K` objects.
pub fn k_morphism(f: &Morphism, ka: &KObjectResult, kb: &KObjectResult) -> Result<Morphism> {
    let class = f.source().class();
    check_kind_allowed(class, f.kind())?;
    if ka.base() != f.source() || kb.base() != f.target() {
        return Err(Error::Contract("K objects do not match the morphism's ends".into()));
    }
    let map = if class == ClassTag::BooleanAlgebra {
        let mut blocks = Vec::with_capacity(ka.index.len());
        for e in &ka.index {
            let KImage::Join(parts) = map_k_element(f, e)? else {
                unreachable!("Boolean images are joins")
            };
            blocks.push(parts.iter().map(|p| kb.require(p)).collect::<Result<Vec<_>>>()?);
        }
        MapData::Atoms(blocks)
    } else {
        let mut table = Vec::with_capacity(ka.index.len());
        for e in &ka.index {
            let KImage::One(img) = map_k_element(f, e)? else {
                unreachable!("point images are single elements")
            };
            table.push(kb.require(&img)?);
        }
        MapData::Points(table)
    };
    Morphism::new(ka.object.clone(), kb.object.clone(), map, f.kind())
}

/// `K(f)` together with freshly built `K(A)` and `K(B)`.
pub fn k_map(f: &Morphism) -> Result<(KObjectResult, KObjectResult, Morphism)> {
    let ka = k_object(f.source())?;
    let kb = if Arc::ptr_eq(f.source(), f.target()) {
        ka.clone()
    } else {
        k_object(f.target())?
    };
    let kf = k_morphism(f, &ka, &kb)?;
    Ok((ka, kb, kf))
}

/// The embedding `g: B ↪ K(A)` of a one-point extension `A ↪· B` with `g ∘ j = η_A`.
pub fn resolve_extension(e: &OnePointExtension, ka: &KObjectResult) -> Result<Morphism> {
    if ka.base() != e.base() {
        return Err(Error::Contract("K(A) was built over a different base".into()));
    }
    let g = if e.base().class() == ClassTag::BooleanAlgebra {
        boolean::resolve(e, ka)?
    } else {
        let table = e.inclusion().table().expect("point class");
        let x = e.new_point().expect("point class");
        let payload = new_point_payload(e.base(), e.extension(), table, x)?;
        let mut g = vec![0; e.extension().len()];
        for (a, &ja) in table.iter().enumerate() {
            g[ja as usize] = ka.require(&KElement::Old(a as ElemId))?;
        }
        g[x as usize] = ka.require(&KElement::New(payload))?;
        Morphism::points(e.extension().clone(), ka.object.clone(), g, MorphismKind::Embedding)?
    };
    if e.inclusion().then(&g)? != *ka.eta() {
        return Err(Error::Structural("realizing embedding does not commute with η".into()));
    }
    Ok(g)
}

/// The payload describing how `x` sits over the image `table` of the base in `ext`.
pub(crate) fn new_point_payload(
    base: &FiniteStructure,
    ext: &FiniteStructure,
    table: &[ElemId],
    x: ElemId,
) -> Result<Payload> {
    let pick = |pred: &dyn Fn(ElemId) -> bool| -> Vec<ElemId> {
        base.elements().filter(|&a| pred(table[a as usize])).collect()
    };
    Ok(match base.class() {
        ClassTag::Graph | ClassTag::KnFreeGraph(_) => Payload::Set(pick(&|y| ext.related(y, x))),
        ClassTag::Digraph => Payload::Pair(pick(&|y| ext.related(y, x)), pick(&|y| ext.related(x, y))),
        ClassTag::LinearOrder => Payload::Pair(pick(&|y| ext.related(y, x)), pick(&|y| ext.related(x, y))),
        ClassTag::Poset => Payload::Pair(pick(&|y| ext.related(y, x)), pick(&|y| ext.related(x, y))),
        ClassTag::Tournament => Payload::Sequence(pick(&|y| ext.related(y, x))),
        ClassTag::RationalMetric(_) => {
            Payload::Katetov(base.elements().map(|a| ext.dist(table[a as usize], x)).collect())
        }
        ClassTag::BooleanAlgebra => {
            return Err(Error::Contract("Boolean extensions have no single new point".into()))
        }
    })
}

/// The carrier element of `K(A)` an [`Element`] of `A` goes to under `η`.
pub fn eta_element(ka: &KObjectResult, e: &Element) -> Result<Element> {
    ka.eta.apply(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::enumerate_one_point_extensions;

    fn arc(s: FiniteStructure) -> Arc<FiniteStructure> {
        Arc::new(s)
    }

    #[test]
    fn graph_on_one_vertex() {
        let k = k_object(&arc(FiniteStructure::graph(1, &[]).unwrap())).unwrap();
        assert_eq!(
            k.index(),
            &[
                KElement::Old(0),
                KElement::New(Payload::Set(vec![])),
                KElement::New(Payload::Set(vec![0]))
            ]
        );
        assert_eq!(k.object().pairs(), vec![(0, 2)]);
    }

    #[test]
    fn graph_on_nothing() {
        let k = k_object(&arc(FiniteStructure::graph(0, &[]).unwrap())).unwrap();
        assert_eq!(k.object().len(), 1);
        assert!(k.object().pairs().is_empty());
    }

    #[test]
    fn triangle_free_over_an_edge() {
        let k = k_object(&arc(FiniteStructure::kn_free_graph(3, 2, &[(0, 1)]).unwrap())).unwrap();
        assert_eq!(k.object().len(), 5);
        let news: Vec<_> = k.index()[2..].to_vec();
        assert_eq!(
            news,
            vec![
                KElement::New(Payload::Set(vec![])),
                KElement::New(Payload::Set(vec![0])),
                KElement::New(Payload::Set(vec![1]))
            ]
        );
    }

    #[test]
    fn graph_map_between_points() {
        let a = arc(FiniteStructure::graph(1, &[]).unwrap());
        let b = arc(FiniteStructure::graph(2, &[]).unwrap());
        let f = Morphism::points(a, b, vec![1], MorphismKind::Embedding).unwrap();
        let (ka, kb, kf) = k_map(&f).unwrap();
        assert_eq!(ka.object().len(), 3);
        let img = |e: KElement| kb.element(kf.at(ka.id_of(&e).unwrap())).clone();
        assert_eq!(img(KElement::Old(0)), KElement::Old(1));
        assert_eq!(img(KElement::New(Payload::Set(vec![]))), KElement::New(Payload::Set(vec![])));
        assert_eq!(img(KElement::New(Payload::Set(vec![0]))), KElement::New(Payload::Set(vec![1])));
    }

    #[test]
    fn tournament_homomorphisms_are_rejected() {
        let t = arc(FiniteStructure::tournament(1, &[]).unwrap());
        let f = Morphism::identity(t).with_kind(MorphismKind::Homomorphism).unwrap();
        assert!(matches!(k_map(&f), Err(Error::Contract(_))));
    }

    #[test]
    fn poset_over_a_point_adds_three() {
        let k = k_object(&arc(FiniteStructure::poset(1, &[]).unwrap())).unwrap();
        assert_eq!(k.object().len(), 4);
    }

    #[test]
    fn every_extension_resolves_over_small_bases() {
        for class in ClassTag::defaults() {
            let bases: Vec<Arc<FiniteStructure>> = match class {
                ClassTag::BooleanAlgebra => (1..=3).map(|n| arc(FiniteStructure::boolean_algebra(n))).collect(),
                _ => crate::structures::enumerate_structures(class, 2).unwrap(),
            };
            for a in bases {
                let ka = k_object(&a).unwrap();
                for e in enumerate_one_point_extensions(&a).unwrap() {
                    resolve_extension(&e, &ka).unwrap();
                }
            }
        }
    }

    #[test]
    fn poset_resolution_above_a_point() {
        let a = arc(FiniteStructure::poset(1, &[]).unwrap());
        let ka = k_object(&a).unwrap();
        let ext = enumerate_one_point_extensions(&a)
            .unwrap()
            .into_iter()
            .find(|e| e.extension().related(0, 1))
            .unwrap();
        let g = resolve_extension(&ext, &ka).unwrap();
        assert_eq!(ka.element(g.at(1)), &KElement::New(Payload::Pair(vec![0], vec![])));
        assert!(ka.object().related(0, g.at(1)));
    }

    #[test]
    fn payloads_serialize_as_tagged_json() {
        let v = serde_json::to_value(KElement::Old(3)).unwrap();
        assert_eq!(v, serde_json::json!({"old": 3}));
        let v = serde_json::to_value(KElement::New(Payload::Set(vec![1]))).unwrap();
        assert_eq!(v, serde_json::json!({"new": {"set": [1]}}));
    }
}
