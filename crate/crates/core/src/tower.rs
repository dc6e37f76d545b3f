//! Towers `C ↪ K(C) ↪ K²(C) ↪ …` expanded lazily, with addresses into their levels, the
//! iterated action of `K` on morphisms, and the extension-property verifier.
//!
//! Levels are kept disjoint and joined by the links `η`. Because `K(A)` lists the old
//! elements first, a link is the identity on ids for point classes: an address `(ℓ, x)`
//! denotes the same limit point as `(m, x)` for every `m >= ℓ`, and its canonical form is
//! the least level that already contains `x`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classes::{k_morphism, k_object_with_budget, resolve_extension, KObjectResult, DEFAULT_ELEMENT_BUDGET};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::structures::{
    enumerate_one_point_extensions, ClassTag, ElemId, Element, FiniteStructure, MapData, Morphism, MorphismKind,
    OnePointExtension,
};

/// A point of some level of a tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TowerAddress {
    pub level: usize,
    pub id: ElemId,
}

impl TowerAddress {
    pub fn new(level: usize, id: ElemId) -> Self {
        TowerAddress { level, id }
    }
}

/// A lazily expanded tower over a seed.
#[derive(Clone, Debug)]
pub struct TowerHandle {
    seed: Arc<FiniteStructure>,
    levels: Vec<Arc<FiniteStructure>>,
    expansions: Vec<Arc<KObjectResult>>,
    budget: usize,
    /// The first level that did not fit the budget.
    blocked: Option<usize>,
}

impl TowerHandle {
    /// A tower holding only its seed, with the default per-level element budget.
    pub fn new(seed: Arc<FiniteStructure>) -> Result<Self> {
        Self::with_budget(seed, DEFAULT_ELEMENT_BUDGET)
    }

    pub fn with_budget(seed: Arc<FiniteStructure>, budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::Contract("the element budget must be positive".into()));
        }
        seed.validate().map_err(Error::InvalidStructure)?;
        Ok(TowerHandle {
            levels: vec![seed.clone()],
            seed,
            expansions: Vec::new(),
            budget,
            blocked: None,
        })
    }

    /// The tower over `seed` expanded to depth `n`.
    pub fn iterate(seed: Arc<FiniteStructure>, n: usize) -> Result<Self> {
        let mut t = Self::new(seed)?;
        t.expand_to(n)?;
        Ok(t)
    }

    /// Expands through level `depth`. Existing levels are never recomputed.
    pub fn expand_to(&mut self, depth: usize) -> Result<()> {
        while self.depth() < depth {
            let i = self.depth();
            let what = format!("level {} of the {} tower", i + 1, self.class());
            let over = || Error::capacity(what.clone(), format!("more than {} elements", self.budget), self.budget);
            if self.blocked.is_some() {
                return Err(over());
            }
            let k = match k_object_with_budget(&self.levels[i], self.budget) {
                Ok(k) => k,
                Err(Error::Capacity { .. }) => {
                    let e = over();
                    self.blocked = Some(i + 1);
                    return Err(e);
                }
                Err(e) => return Err(e),
            };
            self.levels.push(k.object().clone());
            self.expansions.push(Arc::new(k));
        }
        Ok(())
    }

    pub fn class(&self) -> ClassTag {
        self.seed.class()
    }

    pub fn seed(&self) -> &Arc<FiniteStructure> {
        &self.seed
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Highest expanded level.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, i: usize) -> Result<&Arc<FiniteStructure>> {
        self.levels.get(i).ok_or_else(|| Error::BudgetExhausted {
            depth: self.depth(),
            what: format!("level {i} has not been expanded"),
        })
    }

    pub fn levels(&self) -> &[Arc<FiniteStructure>] {
        &self.levels
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    /// `K(level i)` with its descriptors; its object is level `i + 1`.
    pub fn expansion(&self, i: usize) -> Result<&Arc<KObjectResult>> {
        self.expansions.get(i).ok_or_else(|| Error::BudgetExhausted {
            depth: self.depth(),
            what: format!("level {} has not been expanded", i + 1),
        })
    }

    /// The link `η: level i ↪ level i+1`.
    pub fn link(&self, i: usize) -> Result<&Morphism> {
        Ok(self.expansion(i)?.eta())
    }

    /// The composed link `η^(to - from)` from level `from` to level `to`.
    pub fn eta_power(&self, from: usize, to: usize) -> Result<Morphism> {
        if from > to {
            return Err(Error::Contract(format!("no link from level {from} down to level {to}")));
        }
        let mut m = Morphism::identity(self.level(from)?.clone());
        for i in from..to {
            m = m.then(self.link(i)?)?;
        }
        Ok(m)
    }

    /// Image of a carrier element of level `from` in level `to`.
    pub fn push_element(&self, from: usize, e: &Element, to: usize) -> Result<Element> {
        let mut cur = e.clone();
        if from > to {
            return Err(Error::Contract(format!("no link from level {from} down to level {to}")));
        }
        for i in from..to {
            cur = self.link(i)?.apply(&cur)?;
        }
        Ok(cur)
    }

    /// The id a point address has at `target` (point classes).
    pub fn resolve(&self, a: TowerAddress, target: usize) -> Result<ElemId> {
        if self.class() == ClassTag::BooleanAlgebra {
            return Err(Error::Unsupported {
                class: self.class(),
                what: "point addresses",
            });
        }
        let lvl = self.level(a.level)?;
        if a.id as usize >= lvl.len() {
            return Err(Error::Structural(format!("unknown address {a:?}")));
        }
        match self.push_element(a.level, &Element::Point(a.id), target)? {
            Element::Point(y) => Ok(y),
            Element::Join(_) => unreachable!(),
        }
    }

    /// [`TowerHandle::resolve`], expanding the tower first if needed.
    pub fn address_resolve(&mut self, a: TowerAddress, target: usize) -> Result<ElemId> {
        if a.level > target {
            return Err(Error::Contract(format!(
                "address at level {} cannot be resolved down to level {target}",
                a.level
            )));
        }
        self.expand_to(target)?;
        self.resolve(a, target)
    }

    /// Least level at which the point already exists.
    pub fn canonical(&self, a: TowerAddress) -> Result<TowerAddress> {
        self.resolve(a, a.level)?;
        let first = (0..=a.level)
            .find(|&l| (a.id as usize) < self.levels[l].len())
            .expect("the address level itself qualifies");
        Ok(TowerAddress::new(first, a.id))
    }

    /// Levels and links as JSON.
    pub fn to_json(&self) -> Value {
        let links: Vec<Value> = self
            .expansions
            .iter()
            .map(|k| match k.eta().map() {
                MapData::Points(t) => json!(t),
                MapData::Atoms(t) => json!(t),
            })
            .collect();
        json!({
            "class": self.class().name(),
            "budget": self.budget,
            "seed": self.seed.to_json(),
            "levels": self.levels.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
            "links": links,
        })
    }

    /// Rebuilds a tower from [`TowerHandle::to_json`] output and checks every stored level.
    pub fn from_json(v: &Value) -> Result<Self> {
        let seed = FiniteStructure::from_json(
            v.get("seed").ok_or_else(|| Error::Format("tower JSON without a seed".into()))?,
        )?;
        let budget = v
            .get("budget")
            .and_then(Value::as_u64)
            .map_or(DEFAULT_ELEMENT_BUDGET, |b| b as usize);
        let levels = v
            .get("levels")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("tower JSON without levels".into()))?;
        let mut t = TowerHandle::with_budget(Arc::new(seed), budget)?;
        t.expand_to(levels.len().saturating_sub(1))?;
        for (i, stored) in levels.iter().enumerate() {
            if FiniteStructure::from_json(stored)? != *t.levels[i] {
                return Err(Error::Format(format!("stored level {i} does not match the recomputed tower")));
            }
        }
        Ok(t)
    }
}

/// `K^k(f)` between the towers over `f`'s source and target, expanding both to depth `k`.
pub fn k_power(f: &Morphism, k: usize, src: &mut TowerHandle, tgt: &mut TowerHandle) -> Result<Morphism> {
    if src.seed() != f.source() || tgt.seed() != f.target() {
        return Err(Error::Contract("towers are not over the morphism's ends".into()));
    }
    src.expand_to(k)?;
    tgt.expand_to(k)?;
    let mut m = f.clone();
    for i in 0..k {
        m = k_morphism(&m, src.expansion(i)?, tgt.expansion(i)?)?;
    }
    Ok(m)
}

/// `n` and an embedding `h: B ↪ Kⁿ(A)` with `h ∘ g = ηⁿ_A`.
///
/// `g` is split into a chain of one-point extensions `A = A₀ ↪· A₁ ↪· … ↪· Aₙ ≅ B`; each
/// step is realized by some `fᵢ: Aᵢ ↪ K(Aᵢ₋₁)` and
/// `h = K^(n-1)(f₁) ∘ … ∘ K(fₙ₋₁) ∘ fₙ`. An isomorphism gives `n = 1`, `h = η_A ∘ g⁻¹`.
pub fn absorb_extension(g: &Morphism) -> Result<(usize, Morphism, TowerHandle)> {
    if g.kind() == MorphismKind::Homomorphism {
        g.with_kind(MorphismKind::Embedding)
            .map_err(|_| Error::Contract("absorb_extension needs an embedding".into()))?;
    }
    let a = g.source().clone();
    let mut tower_a = TowerHandle::new(a.clone())?;
    if g.strongest_kind() == Some(MorphismKind::Isomorphism) {
        tower_a.expand_to(1)?;
        let inv = g.with_kind(MorphismKind::Isomorphism)?.inverse()?;
        let h = inv.then(tower_a.link(0)?)?;
        return Ok((1, h, tower_a));
    }
    let (steps, to_b) = one_point_chain(g)?;
    let n = steps.len();
    // f_i realizes step i inside K(A_{i-1}).
    let mut towers: Vec<TowerHandle> = Vec::with_capacity(n + 1);
    towers.push(tower_a);
    for s in &steps {
        towers.push(TowerHandle::new(s.extension().clone())?);
    }
    let mut h: Option<Morphism> = None;
    for i in (1..=n).rev() {
        let step = &steps[i - 1];
        let k = n - i;
        towers[i - 1].expand_to(1)?;
        let f_i = resolve_extension(step, towers[i - 1].expansion(0)?)?;
        // K^k(f_i): K^k(A_i) -> K^(k+1)(A_{i-1}).
        let (left, right) = towers.split_at_mut(i);
        let src = &mut right[0];
        let tgt = &mut left[i - 1];
        src.expand_to(k)?;
        tgt.expand_to(k + 1)?;
        let mut m = f_i;
        for j in 0..k {
            m = k_morphism(&m, src.expansion(j)?, tgt.expansion(j + 1)?)?;
        }
        h = Some(match h {
            None => m,
            Some(prev) => prev.then(&m)?,
        });
    }
    let h = to_b.inverse()?.then(&h.expect("at least one step"))?;
    let tower_a = towers.swap_remove(0);
    let eta_n = tower_a.eta_power(0, n)?;
    if g.then(&h)? != eta_n {
        return Err(Error::Structural("absorbed extension does not commute with ηⁿ".into()));
    }
    Ok((n, h, tower_a))
}

/// One-point steps from `g`'s source up to a copy of its target, and the isomorphism
/// from the last step's extension onto the target.
fn one_point_chain(g: &Morphism) -> Result<(Vec<OnePointExtension>, Morphism)> {
    let a = g.source().clone();
    let b = g.target().clone();
    match g.map() {
        MapData::Points(t) => {
            let mut order: Vec<ElemId> = t.clone();
            let rest: Vec<ElemId> = b.elements().filter(|y| !t.contains(y)).collect();
            let mut steps = Vec::new();
            let mut prev = a.clone();
            for &y in &rest {
                order.push(y);
                let next = Arc::new(b.induced(&order)?);
                let inc = Morphism::points(
                    prev.clone(),
                    next.clone(),
                    (0..prev.len() as ElemId).collect(),
                    MorphismKind::Embedding,
                )?;
                steps.push(OnePointExtension::new(inc, Element::Point(prev.len() as ElemId))?);
                prev = next;
            }
            let to_b = Morphism::points(prev, b, order, MorphismKind::Isomorphism)?;
            Ok((steps, to_b))
        }
        MapData::Atoms(blocks) => {
            // Halve every block of the partition of B's atoms until all are singletons.
            let mut partition: Vec<Vec<ElemId>> = blocks.clone();
            let mut steps = Vec::new();
            let mut prev = a.clone();
            while partition.iter().any(|blk| blk.len() > 1) {
                let mut next_part = Vec::new();
                let mut inc_blocks = Vec::new();
                let mut x = Vec::new();
                for blk in &partition {
                    if blk.len() > 1 {
                        let (lo, hi) = blk.split_at(blk.len() / 2);
                        inc_blocks.push(vec![next_part.len() as ElemId, next_part.len() as ElemId + 1]);
                        x.push(next_part.len() as ElemId);
                        next_part.push(lo.to_vec());
                        next_part.push(hi.to_vec());
                    } else {
                        inc_blocks.push(vec![next_part.len() as ElemId]);
                        next_part.push(blk.clone());
                    }
                }
                let next = Arc::new(FiniteStructure::boolean_algebra(next_part.len()));
                let inc = Morphism::new(prev, next.clone(), MapData::Atoms(inc_blocks), MorphismKind::Embedding)?;
                steps.push(OnePointExtension::new(inc, Element::Join(x))?);
                partition = next_part;
                prev = next;
            }
            let to_b = Morphism::new(
                prev,
                b,
                MapData::Atoms(partition),
                MorphismKind::Isomorphism,
            )?;
            Ok((steps, to_b))
        }
    }
}

/// A one-point extension of a substructure of a level, realized in a (possibly later) level.
#[derive(Clone, Debug)]
pub struct ExtensionCertificate {
    /// The base as addresses (atoms of the level for Boolean towers).
    pub base: Vec<TowerAddress>,
    /// How the base sits in its level.
    pub base_inclusion: Morphism,
    pub extension: OnePointExtension,
    pub witness_level: usize,
    /// Embedding of the extension into level `witness_level`.
    pub witness: Morphism,
}

/// An extension the verifier could not realize.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub base: Vec<TowerAddress>,
    pub extension: OnePointExtension,
    pub reason: String,
}

/// Result of [`verify_extension_property`].
#[derive(Clone, Debug)]
pub struct ExtensionReport {
    pub base_depth: usize,
    pub size_bound: usize,
    pub certificates: Vec<ExtensionCertificate>,
    pub counterexample: Option<Counterexample>,
}

impl ExtensionReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn max_witness_level(&self) -> Option<usize> {
        self.certificates.iter().map(|c| c.witness_level).max()
    }
}

/// Substructures of `level` of size at most `bound`, each with its inclusion.
///
/// Point classes: induced substructures on id-sorted subsets. Boolean algebras: the
/// subalgebras generated by at most `bound` atoms.
pub fn substructures(level: &Arc<FiniteStructure>, bound: usize) -> Result<Vec<(Vec<ElemId>, Morphism)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(
        level: &Arc<FiniteStructure>,
        from: ElemId,
        bound: usize,
        cur: &mut Vec<ElemId>,
        out: &mut Vec<(Vec<ElemId>, Morphism)>,
    ) -> Result<()> {
        let inc = if level.class() == ClassTag::BooleanAlgebra {
            let (sub, blocks) = level.generated_subalgebra(cur)?;
            Morphism::new(Arc::new(sub), level.clone(), MapData::Atoms(blocks), MorphismKind::Embedding)?
        } else {
            let sub = level.induced(cur)?;
            Morphism::points(Arc::new(sub), level.clone(), cur.clone(), MorphismKind::Embedding)?
        };
        out.push((cur.clone(), inc));
        if cur.len() == bound {
            return Ok(());
        }
        for x in from..level.len() as ElemId {
            cur.push(x);
            go(level, x + 1, bound, cur, out)?;
            cur.pop();
        }
        Ok(())
    }
    go(level, 0, bound, &mut cur, &mut out)?;
    Ok(out)
}

/// Certifies that every one-point extension of every substructure of level `base_depth`
/// with at most `size_bound` elements is realized by level `base_depth + 1`.
///
/// Each witness is the construction `K(ι) ∘ g`, where `g` realizes the extension in
/// `K(A)` and `ι: A ↪ level` is the inclusion; the certificate records that it is an
/// embedding and that it restricts to `η ∘ ι` on the base.
pub fn verify_extension_property(
    t: &mut TowerHandle,
    base_depth: usize,
    size_bound: usize,
    exec: Execution,
) -> Result<ExtensionReport> {
    t.expand_to(base_depth + 1)?;
    let t: &TowerHandle = t;
    let level = t.level(base_depth)?.clone();
    let subs = substructures(&level, size_bound)?;
    let mut jobs = Vec::new();
    for (ids, inc) in &subs {
        for e in enumerate_one_point_extensions(inc.source())? {
            jobs.push((ids.clone(), inc.clone(), e));
        }
    }
    let results = par::map(exec, &jobs, |(ids, inc, e)| certify(t, base_depth, ids, inc, e));
    let mut certificates = Vec::with_capacity(results.len());
    let mut counterexample = None;
    for r in results {
        match r {
            Ok(c) => certificates.push(c),
            Err(ce) => {
                counterexample = Some(ce);
                break;
            }
        }
    }
    Ok(ExtensionReport {
        base_depth,
        size_bound,
        certificates,
        counterexample,
    })
}

fn certify(
    t: &TowerHandle,
    base_depth: usize,
    ids: &[ElemId],
    inc: &Morphism,
    e: &OnePointExtension,
) -> std::result::Result<ExtensionCertificate, Counterexample> {
    let base: Vec<TowerAddress> = ids.iter().map(|&x| TowerAddress::new(base_depth, x)).collect();
    let fail = |reason: String| Counterexample {
        base: base.clone(),
        extension: e.clone(),
        reason,
    };
    let attempt = || -> Result<Morphism> {
        let ka = crate::classes::k_object(inc.source())?;
        let g = resolve_extension(e, &ka)?;
        let k_inc = k_morphism(inc, &ka, t.expansion(base_depth)?)?;
        let witness = g.then(&k_inc)?.with_kind(MorphismKind::Embedding)?;
        let lhs = e.inclusion().then(&witness)?;
        let rhs = inc.then(t.link(base_depth)?)?;
        if lhs != rhs {
            return Err(Error::Structural("witness does not extend the base inclusion".into()));
        }
        Ok(witness)
    };
    match attempt() {
        Ok(witness) => Ok(ExtensionCertificate {
            base: base.clone(),
            base_inclusion: inc.clone(),
            extension: e.clone(),
            witness_level: base_depth + 1,
            witness,
        }),
        Err(err) => Err(fail(err.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(s: FiniteStructure) -> Arc<FiniteStructure> {
        Arc::new(s)
    }

    #[test]
    fn graph_tower_sizes() {
        let t = TowerHandle::iterate(arc(FiniteStructure::empty(ClassTag::Graph)), 3).unwrap();
        assert_eq!(t.level_sizes(), vec![0, 1, 3, 11]);
    }

    #[test]
    fn boolean_tower_doubles() {
        let t = TowerHandle::iterate(arc(FiniteStructure::boolean_algebra(1)), 3).unwrap();
        assert_eq!(t.level_sizes(), vec![1, 2, 4, 8]);
    }

    #[test]
    fn zero_iterations_keep_the_seed() {
        let seed = arc(FiniteStructure::chain(2));
        let t = TowerHandle::iterate(seed.clone(), 0).unwrap();
        assert_eq!(t.levels(), &[seed]);
    }

    #[test]
    fn addresses_follow_links() {
        let mut t = TowerHandle::iterate(arc(FiniteStructure::graph(1, &[]).unwrap()), 1).unwrap();
        assert_eq!(t.address_resolve(TowerAddress::new(0, 0), 0).unwrap(), 0);
        assert_eq!(t.address_resolve(TowerAddress::new(0, 0), 1).unwrap(), 0);
        let new_empty = t.expansion(0).unwrap().id_of(&crate::classes::KElement::New(crate::classes::Payload::Set(vec![]))).unwrap();
        assert_eq!(t.address_resolve(TowerAddress::new(1, new_empty), 2).unwrap(), new_empty);
        assert_eq!(t.canonical(TowerAddress::new(2, 0)).unwrap(), TowerAddress::new(0, 0));
        assert!(t.address_resolve(TowerAddress::new(1, 99), 1).is_err());
    }

    #[test]
    fn capacity_error_names_the_level() {
        let mut t = TowerHandle::with_budget(arc(FiniteStructure::empty(ClassTag::Graph)), 100).unwrap();
        let err = t.expand_to(5).unwrap_err();
        assert!(err.to_string().contains("level 4"), "{err}");
        assert_eq!(t.depth(), 3);
    }

    #[test]
    fn absorbing_an_isomorphism_takes_one_step() {
        let a = arc(FiniteStructure::graph(2, &[(0, 1)]).unwrap());
        let (n, h, t) = absorb_extension(&Morphism::identity(a)).unwrap();
        assert_eq!(n, 1);
        assert_eq!(&h, t.link(0).unwrap());
    }

    #[test]
    fn absorbing_a_path_from_nothing_takes_two_steps() {
        let empty = arc(FiniteStructure::empty(ClassTag::Graph));
        let p2 = arc(FiniteStructure::graph(2, &[(0, 1)]).unwrap());
        let g = Morphism::points(empty, p2, vec![], MorphismKind::Embedding).unwrap();
        let (n, h, t) = absorb_extension(&g).unwrap();
        assert_eq!(n, 2);
        assert_eq!(h.target(), t.level(2).unwrap());
    }

    #[test]
    fn absorbing_a_boolean_refinement() {
        let b1 = arc(FiniteStructure::boolean_algebra(1));
        let b4 = arc(FiniteStructure::boolean_algebra(4));
        let g = Morphism::new(b1, b4, MapData::Atoms(vec![vec![0, 1, 2, 3]]), MorphismKind::Embedding).unwrap();
        let (n, _, _) = absorb_extension(&g).unwrap();
        assert_eq!(n, 2);
    }

    #[test]
    fn extension_property_from_the_empty_graph() {
        let mut t = TowerHandle::new(arc(FiniteStructure::empty(ClassTag::Graph))).unwrap();
        let report = verify_extension_property(&mut t, 1, 1, Execution::Sequential).unwrap();
        assert!(report.passed());
        // Empty base: one extension; the single vertex: two.
        assert_eq!(report.certificates.len(), 3);
        assert_eq!(report.max_witness_level(), Some(2));
    }

    #[test]
    fn json_round_trip() {
        let t = TowerHandle::iterate(arc(FiniteStructure::empty(ClassTag::Poset)), 2).unwrap();
        let back = TowerHandle::from_json(&t.to_json()).unwrap();
        assert_eq!(back.levels(), t.levels());
    }
}
